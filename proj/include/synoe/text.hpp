// Copyright 2026 The SynOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SYNOE_TEXT_HPP_
#define SYNOE_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace synoe {

std::string Trim(std::string_view s);
std::string ToLower(std::string_view s);
/// Trim + lowercase.
std::string Normalize(std::string_view s);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);

/// Splits a detector prompt ("penguin . car") into its trimmed phrases.
std::vector<std::string> SplitPrompt(std::string_view prompt);
/// Joins phrases with the detector separator " . ".
std::string JoinPrompt(const std::vector<std::string>& phrases);
/// Whitespace tokenization of the normalized text.
std::vector<std::string> Tokens(std::string_view s);

/// Emits one JSON object per line on stderr: {"level","event",...fields}.
void LogEvent(std::string_view level, std::string_view event,
              nlohmann::json fields = nlohmann::json::object());
/// Silences (or re-enables) LogEvent; used by tests.
void SetLoggingEnabled(bool enabled);

}  // namespace synoe

#endif  // SYNOE_TEXT_HPP_
