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

#ifndef DFSCIL_EVALUATION_HPP
#define DFSCIL_EVALUATION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dfscil/data.hpp"
#include "dfscil/trainer.hpp"

namespace dfscil {

/// Metrics after training session t, scored on the test rows of every class
/// seen so far.
struct SessionMetrics {
  std::size_t session = 0;
  double joint = 0.0;                // correct / total
  double base = 0.0;                 // A_b, over session-0 classes
  std::optional<double> novel;       // A_n, absent at session 0
  std::optional<double> harmonic;    // absent at session 0
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<Label> classes;                      // seen labels, ascending
  std::vector<std::vector<std::size_t>> confusion; // [true][predicted], indexed like `classes`
};

struct EvaluationReport {
  std::string variant;
  std::vector<SessionMetrics> sessions;
};

/// 2 ab an / (ab + an), or 0 when both are 0.
double harmonic_mean(double base_accuracy, double novel_accuracy);

/// Scores `test` with the prototypes of sessions 0..t. Never mutates `state`.
/// Throws ConfigError when a test label has not been seen by session t.
SessionMetrics evaluate_session(const ModelState& state, const SessionDataset& test,
                                std::size_t session);

/// Mean of per-session joint accuracies. Throws StateError when empty.
double average_accuracy(const EvaluationReport& report);
double average_accuracy(const std::vector<double>& joint_accuracies);

enum class ReportFormat { table_text, csv };

/// CSV columns: session,joint,base,novel,harmonic. Missing values are "NA".
std::string format_report_csv(const EvaluationReport& report);
std::string format_report_table(const EvaluationReport& report);

/// Writes the report deterministically. Throws StateError on an empty report
/// and IoError when the file cannot be written.
void emit_report(const EvaluationReport& report, const std::filesystem::path& path,
                 ReportFormat format);

/// Parses a CSV written by emit_report (metrics only, no confusion counts).
EvaluationReport parse_report_csv(const std::filesystem::path& path);

}  // namespace dfscil

#endif  // DFSCIL_EVALUATION_HPP
