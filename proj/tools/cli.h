// Copyright 2026 The GridSwap Authors
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

#ifndef GRIDSWAP_TOOLS_CLI_H_
#define GRIDSWAP_TOOLS_CLI_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gridswap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string subcommand;
  std::string config;
  std::string data_dir;  // run and sweep; defaults to the config's directory
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<std::string> rule;
  std::optional<double> wholesale;
  std::optional<double> retail;
  std::optional<int> samples;
  std::optional<double> eta;
  std::string pricing = "marginal_bid";
  bool exact = false;
  std::string param;
  std::string values;
  bool quiet = false;
};

// Parses argv, runs the subcommand and writes its files. Usage errors go to
// `err` with the help text. Returns one of the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridswap::cli

#endif  // GRIDSWAP_TOOLS_CLI_H_
