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

#include "dfscil/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dfscil/errors.hpp"

namespace dfscil {

namespace {

std::string exact(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string percent(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

void require_sessions(const EvaluationReport& report) {
  if (report.sessions.empty()) throw StateError("report has no evaluated sessions");
}

}  // namespace

double harmonic_mean(double base_accuracy, double novel_accuracy) {
  const double sum = base_accuracy + novel_accuracy;
  if (!(sum > 0.0)) return 0.0;
  if (base_accuracy == novel_accuracy) return base_accuracy;
  return 2.0 * base_accuracy * novel_accuracy / sum;
}

SessionMetrics evaluate_session(const ModelState& state, const SessionDataset& test,
                                std::size_t session) {
  const auto sets = state.real_prototypes(session);
  std::map<Label, std::size_t> slot;
  std::vector<Label> classes;
  for (const PrototypeSet* set : sets) classes.insert(classes.end(), set->labels().begin(), set->labels().end());
  std::sort(classes.begin(), classes.end());
  for (std::size_t i = 0; i < classes.size(); ++i) slot[classes[i]] = i;
  const auto& base_labels = state.prototypes.at(0).labels();

  for (Label l : test.labels) {
    if (!slot.count(l)) {
      throw ConfigError("evaluate_session: test label " + std::to_string(l) +
                        " not seen by session " + std::to_string(session));
    }
  }

  SessionMetrics out;
  out.session = session;
  out.classes = classes;
  out.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  std::size_t base_total = 0, base_correct = 0, novel_total = 0, novel_correct = 0;
  if (test.size() > 0) {
    const Matrix z = state.coefficients(test.features);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const Label truth = test.labels[static_cast<std::size_t>(i)];
      const Label guess = predict(row_span(z, i), sets);
      ++out.confusion[slot.at(truth)][slot.at(guess)];
      const bool ok = guess == truth;
      const bool is_base = std::find(base_labels.begin(), base_labels.end(), truth) != base_labels.end();
      (is_base ? base_total : novel_total) += 1;
      if (ok) (is_base ? base_correct : novel_correct) += 1;
    }
  }
  out.total = base_total + novel_total;
  out.correct = base_correct + novel_correct;
  out.joint = out.total ? static_cast<double>(out.correct) / static_cast<double>(out.total) : 0.0;
  out.base = base_total ? static_cast<double>(base_correct) / static_cast<double>(base_total) : 0.0;
  if (session > 0) {
    out.novel = novel_total ? static_cast<double>(novel_correct) / static_cast<double>(novel_total) : 0.0;
    out.harmonic = harmonic_mean(out.base, *out.novel);
  }
  return out;
}

double average_accuracy(const std::vector<double>& joint_accuracies) {
  if (joint_accuracies.empty()) throw StateError("average accuracy of an empty report");
  double sum = 0.0;
  for (double a : joint_accuracies) sum += a;
  return sum / static_cast<double>(joint_accuracies.size());
}

double average_accuracy(const EvaluationReport& report) {
  require_sessions(report);
  std::vector<double> joint;
  for (const SessionMetrics& s : report.sessions) joint.push_back(s.joint);
  return average_accuracy(joint);
}

std::string format_report_csv(const EvaluationReport& report) {
  require_sessions(report);
  std::string out = "session,joint,base,novel,harmonic\n";
  for (const SessionMetrics& s : report.sessions) {
    out += std::to_string(s.session) + "," + exact(s.joint) + "," + exact(s.base) + "," +
           (s.novel ? exact(*s.novel) : "NA") + "," + (s.harmonic ? exact(*s.harmonic) : "NA") +
           "\n";
  }
  return out;
}

std::string format_report_table(const EvaluationReport& report) {
  require_sessions(report);
  std::ostringstream out;
  out << "variant: " << (report.variant.empty() ? "-" : report.variant) << "\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %8s\n", "session", "joint", "base", "novel",
                "harmonic");
  out << line;
  for (const SessionMetrics& s : report.sessions) {
    std::snprintf(line, sizeof(line), "%-8zu %8s %8s %8s %8s\n", s.session,
                  percent(s.joint).c_str(), percent(s.base).c_str(), percent(s.novel).c_str(),
                  percent(s.harmonic).c_str());
    out << line;
  }
  out << "average  " << percent(average_accuracy(report)) << "\n";
  return out.str();
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  const std::string text =
      format == ReportFormat::csv ? format_report_csv(report) : format_report_table(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

EvaluationReport parse_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "session,joint,base,novel,harmonic") {
    throw ParseError(path.string() + ":1: unexpected report header");
  }
  EvaluationReport report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
    auto number = [&](const std::string& c) {
      double v = 0.0;
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      return v;
    };
    auto optional = [&](const std::string& c) -> std::optional<double> {
      if (c == "NA") return std::nullopt;
      return number(c);
    };
    SessionMetrics s;
    s.session = static_cast<std::size_t>(number(cells[0]));
    s.joint = number(cells[1]);
    s.base = number(cells[2]);
    s.novel = optional(cells[3]);
    s.harmonic = optional(cells[4]);
    report.sessions.push_back(std::move(s));
  }
  return report;
}

}  // namespace dfscil
