# Copyright 2026 The SynOE Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json

import pytest
from PIL import Image

import synoe

synoe.set_logging(False)

CATEGORIES = ["Bicycle", "Bus", "Car", "Construction", "Motorcycle", "Trailer", "Truck",
              "Pedestrian"]


def write_dataset(root, count=4):
    (root / "images").mkdir()
    (root / "masks").mkdir()
    images, annotations = [], []
    for i in range(1, count + 1):
        img = Image.new("RGB", (640, 480), (128, 128, 128))
        img.paste((200, 40, 40), (100, 60, 140, 100))
        img.save(root / "images" / f"{i:03d}.png")
        mask = Image.new("L", (640, 480), 0)
        mask.paste(255, (0, 264, 640, 480))
        mask.save(root / "masks" / f"{i:03d}.png")
        images.append({"id": i, "width": 640, "height": 480,
                       "file_name": f"images/{i:03d}.png",
                       "road_mask": f"masks/{i:03d}.png"})
        annotations.append({"id": i, "image_id": i, "bbox": [100, 60, 40, 40],
                            "category_id": 3})
    doc = {"images": images, "annotations": annotations,
           "categories": [{"id": k + 1, "name": n} for k, n in enumerate(CATEGORIES)]
           + [{"id": 9, "name": "OOD"}]}
    path = root / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


def test_geometry():
    assert synoe.iou(synoe.BBox(0, 0, 10, 10), synoe.BBox(0, 0, 10, 10)) == pytest.approx(1.0)
    assert synoe.iou(synoe.BBox(0, 0, 10, 10), synoe.BBox(20, 20, 5, 5)) == 0.0
    assert synoe.size_bucket(synoe.BBox(0, 0, 1023, 1)) == "small"
    assert synoe.size_bucket(synoe.BBox(0, 0, 1024, 1)) == "medium"
    crop = synoe.crop_for_target(synoe.BBox(100, 100, 20, 20), 1600, 900)
    assert tuple(crop) == (46.0, 46.0, 128.0, 128.0)
    assert not synoe.min_distance_ok([synoe.BBox(0, 0, 128, 128)], synoe.BBox(100, 0, 128, 128))
    assert synoe.min_distance_ok([synoe.BBox(0, 0, 128, 128)], synoe.BBox(600, 0, 128, 128))


def test_variants():
    assert synoe.select_variant("V3")["road_region_inpaintings"]
    assert not synoe.select_variant("V4")["keep_partial_id"]
    with pytest.raises(synoe.UnknownVariant):
        synoe.select_variant("V9")


def test_generate_audit_evaluate(tmp_path):
    manifest = write_dataset(tmp_path)
    assert synoe.validate_manifest(str(manifest)) == (4, 4)
    out = tmp_path / "out"
    report = synoe.generate(str(manifest), str(out), "V1", proportion=1.0, seed=3)
    assert report["images_selected"] == 4
    assert report["counts"]["refined_ood"] >= 1
    again = synoe.generate(str(manifest), str(tmp_path / "again"), "V1", proportion=1.0, seed=3)
    assert again == report

    audited = tmp_path / "audited.json"
    audit = synoe.audit(str(out / "manifest.json"), str(out / "evidence.json"), str(audited))
    assert audit["matched"] + audit["ambiguous"] == audit["total_inpaintings"]

    gt = synoe.load_manifest(str(audited))
    dets = [{"image_id": a["image_id"], "bbox": a["bbox"], "category_id": a["category_id"],
             "score": 0.9}
            for a in gt["annotations"] if a["provenance"] != "removed"]
    dets_path = tmp_path / "dets.json"
    dets_path.write_text(json.dumps(dets))
    result = synoe.evaluate(str(audited), str(dets_path))
    assert result["overall"]["AP50_95"] == pytest.approx(1.0)
    agnostic = synoe.evaluate(str(audited), str(dets_path), class_agnostic=True)
    assert len(agnostic["per_category"]) == 1
