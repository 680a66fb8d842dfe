// Copyright 2026 The Decision Authors.
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

// Subcommand bodies. Each returns a process exit code and never throws.

#ifndef DECISION_COMMANDS_H_
#define DECISION_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace decision {

enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,
  kExitConfigError = 2,
  kExitIoError = 3,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;  // defaults to the config's output_dir
  std::optional<std::uint64_t> seed;
  // adapt: where train-sources wrote its checkpoints (default <out>/checkpoints).
  std::filesystem::path checkpoints;
  // oracle
  std::size_t trials = 1000;
  bool inject_corrupt_predictor = false;
  // report
  std::vector<std::filesystem::path> runs;
};

int CmdTrainSources(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int CmdAdapt(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int CmdDistill(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int CmdOracle(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int CmdReport(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace decision

#endif  // DECISION_COMMANDS_H_
