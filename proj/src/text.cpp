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

#include "synoe/text.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iostream>
#include <mutex>
#include <sstream>

namespace synoe {

namespace {

std::atomic<bool> g_logging_enabled{true};
std::mutex g_log_mutex;

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string Trim(std::string_view s) {
  auto begin = std::find_if_not(s.begin(), s.end(), IsSpace);
  auto end = std::find_if_not(s.rbegin(), s.rend(), IsSpace).base();
  if (begin >= end) return {};
  return std::string(begin, end);
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string Normalize(std::string_view s) { return ToLower(Trim(s)); }

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<std::string> SplitPrompt(std::string_view prompt) {
  std::vector<std::string> phrases;
  std::size_t start = 0;
  while (start <= prompt.size()) {
    std::size_t dot = prompt.find('.', start);
    if (dot == std::string_view::npos) dot = prompt.size();
    std::string phrase = Trim(prompt.substr(start, dot - start));
    if (!phrase.empty()) phrases.push_back(std::move(phrase));
    start = dot + 1;
  }
  return phrases;
}

std::string JoinPrompt(const std::vector<std::string>& phrases) {
  std::string out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i > 0) out += " . ";
    out += phrases[i];
  }
  return out;
}

std::vector<std::string> Tokens(std::string_view s) {
  std::istringstream in(Normalize(s));
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  return tokens;
}

void LogEvent(std::string_view level, std::string_view event,
              nlohmann::json fields) {
  if (!g_logging_enabled.load()) return;
  nlohmann::json line = std::move(fields);
  line["level"] = level;
  line["event"] = event;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << line.dump() << '\n';
}

void SetLoggingEnabled(bool enabled) { g_logging_enabled.store(enabled); }

}  // namespace synoe
