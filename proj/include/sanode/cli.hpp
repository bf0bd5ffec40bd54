// Copyright 2026 The sanode Authors
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

#pragma once

#include "sanode/errors.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace sanode::cli {

/// Exit codes of the command-line driver.
enum ExitCode : int
{
  ok = 0,
  usage = 2,
  numeric = 3,
  io = 4
};

/// Bad flags, config entries or argument combinations.
class UsageError : public Error
{
public:
  using Error::Error;
};

/// Parses `section.key = value` lines; `[section]` headers prefix the keys that
/// follow them. Blank lines and lines starting with '#' are skipped. Throws
/// UsageError naming the offending line.
std::map<std::string, std::string> parse_config(std::string const &text);

/// Runs the driver on argv-style arguments (args[0] is the program name) and
/// returns the exit code. Progress goes to `out`, diagnostics to `err`.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

} // namespace sanode::cli
