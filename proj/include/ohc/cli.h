// Copyright 2026 The OHC Support Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The `ohc` command-line tool.
//
// Subcommands: ingest, featurize, train, evaluate, ablate, transfer, explain,
// stats, report. Every subcommand accepts `--config FILE` with key=value
// lines naming long flags (dashes or underscores); flags given on the command
// line win. Each run logs its seed and a hash of its resolved options to the
// error stream. Exit status: 0 on success, 2 on usage errors, 1 otherwise.

#ifndef OHC_CLI_H_
#define OHC_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ohc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int Main(int argc, const char* const* argv);

// `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Blank lines and lines starting with '#' are skipped. Throws ohc::ParseError
// on a line without '=' or with an empty key.
std::map<std::string, std::string> ParseConfig(std::istream& in);

uint64_t Fnv1a64(const std::string& text);

}  // namespace ohc::cli

#endif  // OHC_CLI_H_
