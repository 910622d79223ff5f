/**
 * Copyright 2026 The dfscil Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DFSCIL_CLI_HPP
#define DFSCIL_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dfscil/config.hpp"
#include "dfscil/protocol.hpp"

namespace dfscil {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

struct ExperimentResult {
  ProtocolResult protocol;
  std::string variant;
  std::filesystem::path report_csv;
  std::filesystem::path report_table;
};

/// Executes the full protocol for `cfg`, writing into cfg.output_dir:
/// effective_config.json, checkpoint_session<t>.json after every session,
/// report.csv, report.txt and summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

struct SweepRow {
  std::string value;
  double final_joint = 0.0;
  double final_harmonic = 0.0;  // 0 when the stream has no novel sessions
  double average = 0.0;
  double drift = 0.0;
};

/// One run per value of `axis`, each in its own directory under
/// cfg.output_dir/sweep_<axis>/, plus cfg.output_dir/sweep_<axis>.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                const std::vector<std::string>& values, std::ostream& log);

/// Entry point behind the `dfscil` binary: generate, run, sweep, evaluate, inspect.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfscil

#endif  // DFSCIL_CLI_HPP
