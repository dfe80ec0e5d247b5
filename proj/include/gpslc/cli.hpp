/*
 * Copyright 2026 The gpslc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace gpslc {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitUsage = 2, kExitDataContract = 3 };

// Entry point for the gpslc binary: generate | fit | evaluate.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a over a file's bytes.
std::uint64_t fnv1a_file(const std::string& path);

// Flat key=value lines; blank lines, '#' comments and [section] headers are skipped.
std::map<std::string, std::string> read_key_values(const std::string& path);

}  // namespace gpslc
