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

// Command-line driver: train-sources, adapt, distill, oracle, report.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "decision/commands.h"

namespace {

void AddCommon(CLI::App* cmd, decision::CommandOptions& opts, std::uint64_t& seed) {
  cmd->add_option("--config", opts.config, "Experiment config (YAML)");
  cmd->add_option("--out", opts.out, "Output directory (default: output_dir from the config)");
  cmd->add_option("--seed", seed, "Global seed, overrides the config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-free multi-source adaptation on synthetic domains"};
  app.require_subcommand(1);
  decision::CommandOptions opts;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train-sources", "Train one model per source domain");
  AddCommon(train, opts, seed);
  auto* adapt = app.add_subcommand("adapt", "Run the enabled methods on the target domain");
  AddCommon(adapt, opts, seed);
  adapt->add_option("--checkpoints", opts.checkpoints, "Source checkpoint directory (default: <out>/checkpoints)");
  auto* distill = app.add_subcommand("distill", "Distill the adapted ensemble into one model");
  AddCommon(distill, opts, seed);
  auto* oracle = app.add_subcommand("oracle", "Randomized exact check of the combination guarantee");
  AddCommon(oracle, opts, seed);
  oracle->add_option("--trials", opts.trials, "Number of random instances")->check(CLI::NonNegativeNumber);
  oracle->add_flag("--inject-corrupt-predictor", opts.inject_corrupt_predictor)->group("");
  auto* report = app.add_subcommand("report", "Aggregate run directories into tables");
  AddCommon(report, opts, seed);
  report->add_option("runs", opts.runs, "Run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : decision::kExitConfigError;
  }
  for (auto* cmd : {train, adapt, distill, oracle, report}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) opts.seed = seed;
  }

  if (train->parsed()) return decision::CmdTrainSources(opts, std::cout, std::cerr);
  if (adapt->parsed()) return decision::CmdAdapt(opts, std::cout, std::cerr);
  if (distill->parsed()) return decision::CmdDistill(opts, std::cout, std::cerr);
  if (oracle->parsed()) return decision::CmdOracle(opts, std::cout, std::cerr);
  return decision::CmdReport(opts, std::cout, std::cerr);
}
