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

// The `synoe` command line: generate, audit, review, eval, mock-services,
// validate. Exit codes: 0 success, 1 usage or validation failure, 2 runtime
// error.

#ifndef SYNOE_TOOLS_CLI_HPP_
#define SYNOE_TOOLS_CLI_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace synoe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

/// key = value lines; '#' starts a comment; keys are case-sensitive.
std::map<std::string, std::string> ReadConfigFile(const std::filesystem::path& path);

/// Flag > environment variable > config file > fallback.
std::optional<std::string> Resolve(const std::optional<std::string>& flag, const char* env_var,
                                   const std::map<std::string, std::string>& config,
                                   const std::string& key);

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace synoe::cli

#endif  // SYNOE_TOOLS_CLI_HPP_
