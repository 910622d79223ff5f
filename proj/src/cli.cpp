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

#include "dfscil/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dfscil/checkpoint.hpp"
#include "dfscil/errors.hpp"

namespace dfscil {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string exact(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e)) {
    return kExitUsage;
  }
  return kExitRuntime;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.manifest.empty()) throw ConfigError("config does not name a data.manifest");
  const SessionStream stream = load_stream(cfg.manifest);
  ensure_dir(cfg.output_dir);
  const json effective = cfg.to_json();
  write_text(cfg.output_dir / "effective_config.json", effective.dump(2) + "\n");

  ExperimentResult result;
  result.variant = cfg.variant();
  ProtocolHooks hooks;
  hooks.on_session = [&](std::size_t t, const ModelState& state, const SessionMetrics& m) {
    save_checkpoint(state, effective,
                    cfg.output_dir / ("checkpoint_session" + std::to_string(t) + ".json"));
    log << "[" << result.variant << "] session " << t << ": joint " << exact(m.joint);
    if (m.harmonic) log << " harmonic " << exact(*m.harmonic);
    log << "\n";
  };
  result.protocol = run_protocol(stream, cfg.effective_model(), cfg.effective_pseudo(),
                                 cfg.effective_trainer(), hooks);
  EvaluationReport& report = result.protocol.report;
  report.variant = result.variant;

  result.report_csv = cfg.output_dir / "report.csv";
  result.report_table = cfg.output_dir / "report.txt";
  emit_report(report, result.report_csv, ReportFormat::csv);
  emit_report(report, result.report_table, ReportFormat::table_text);

  const SessionMetrics& last = report.sessions.back();
  json summary;
  summary["variant"] = result.variant;
  summary["average"] = average_accuracy(report);
  summary["final_joint"] = last.joint;
  summary["final_harmonic"] = last.harmonic ? json(*last.harmonic) : json(nullptr);
  summary["drift"] = result.protocol.drift;
  summary["base_epoch_loss"] = result.protocol.logs.front().epoch_loss;
  write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                const std::vector<std::string>& values, std::ostream& log) {
  const std::string key = sweep_axis_key(axis);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> runs;
  for (const std::string& v : values) {
    ExperimentConfig c = cfg;
    c.set(key, v);
    c.output_dir = cfg.output_dir / ("sweep_" + axis) / ("value_" + v);
    c.validate();
    runs.push_back(std::move(c));
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    log << "sweep " << axis << "=" << values[i] << "\n";
    ExperimentResult r = run_experiment(runs[i], log);
    const SessionMetrics& last = r.protocol.report.sessions.back();
    rows.push_back({values[i], last.joint, last.harmonic.value_or(0.0),
                    average_accuracy(r.protocol.report), r.protocol.drift.back()});
  }

  std::string csv = axis + ",final_joint,final_harmonic,average,drift\n";
  for (const SweepRow& r : rows) {
    csv += r.value + "," + exact(r.final_joint) + "," + exact(r.final_harmonic) + "," +
           exact(r.average) + "," + exact(r.drift) + "\n";
  }
  ensure_dir(cfg.output_dir);
  write_text(cfg.output_dir / ("sweep_" + axis + ".csv"), csv);
  return rows;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot class-incremental learning with deep dictionaries"};
  app.require_subcommand(1);

  SyntheticBenchmarkSpec spec;
  fs::path gen_out;
  std::string gen_format = "csv";
  bool force = false;
  auto* generate = app.add_subcommand("generate", "Write a synthetic Gaussian-cluster session stream");
  generate->add_option("--dim", spec.input_dim, "Input dimension")->capture_default_str();
  generate->add_option("--base", spec.base_classes, "Base classes")->capture_default_str();
  generate->add_option("--novel-classes", spec.novel_classes,
                       "Novel classes available (0: sessions * way)")->capture_default_str();
  generate->add_option("--sessions", spec.sessions, "Novel sessions")->capture_default_str();
  generate->add_option("--way", spec.way, "Classes per novel session")->capture_default_str();
  generate->add_option("--shot", spec.shot, "Train shots per novel class")->capture_default_str();
  generate->add_option("--sigma", spec.sigma, "Cluster standard deviation")->capture_default_str();
  generate->add_option("--separation", spec.separation,
                       "Minimum center distance in units of sigma")->capture_default_str();
  generate->add_option("--train-per-class", spec.base_train_per_class,
                       "Train rows per base class")->capture_default_str();
  generate->add_option("--test-per-class", spec.test_per_class, "Test rows per class")
      ->capture_default_str();
  generate->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  generate->add_option("--format", gen_format, "Feature file format: csv or binary")
      ->capture_default_str();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_flag("--force", force, "Overwrite an existing manifest");

  fs::path run_config;
  auto* run = app.add_subcommand("run", "Train and evaluate every session of a stream");
  run->add_option("config", run_config, "Experiment config (flat JSON)")->required();

  fs::path sweep_config;
  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one hyper-parameter");
  sweep->add_option("config", sweep_config, "Experiment config (flat JSON)")->required();
  sweep->add_option("--axis", axis, "m, lambda, tau, eta, alpha or pseudo-classes")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  fs::path eval_checkpoint, eval_manifest, eval_report;
  auto* evaluate = app.add_subcommand("evaluate", "Re-score a checkpoint on a stream's test splits");
  evaluate->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--manifest", eval_manifest, "Stream manifest")->required();
  evaluate->add_option("--report", eval_report, "Optional CSV output path");

  fs::path inspect_checkpoint;
  auto* inspect = app.add_subcommand("inspect", "Print checkpoint metadata");
  inspect->add_option("checkpoint", inspect_checkpoint, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const SyntheticBenchmark bench = generate_synthetic(spec);
      for (const std::string& w : bench.warnings) err << "warning: " << w << "\n";
      const fs::path manifest =
          save_stream(bench.stream, gen_out, parse_feature_format(gen_format), force);
      load_stream(manifest);
      out << "wrote " << manifest.string() << " (separation " << exact(bench.separation_ratio)
          << " sigma)\n";
    } else if (run->parsed()) {
      const ExperimentConfig cfg = load_experiment_config(run_config);
      const ExperimentResult r = run_experiment(cfg, out);
      out << format_report_table(r.protocol.report);
    } else if (sweep->parsed()) {
      const ExperimentConfig cfg = load_experiment_config(sweep_config);
      const auto rows = run_sweep(cfg, axis, values, out);
      for (const SweepRow& r : rows) {
        out << axis << "=" << r.value << " final_joint " << exact(r.final_joint)
            << " final_harmonic " << exact(r.final_harmonic) << " drift " << exact(r.drift) << "\n";
      }
    } else if (evaluate->parsed()) {
      const Checkpoint ck = load_checkpoint(eval_checkpoint);
      const SessionStream stream = load_stream(eval_manifest);
      if (ck.state.cursor == 0) throw StateError("checkpoint has no trained session");
      const std::size_t t = ck.state.cursor - 1;
      EvaluationReport report;
      ExperimentConfig stored;
      if (ck.config.is_object()) stored.merge(ck.config);
      report.variant = stored.variant();
      report.sessions.push_back(evaluate_session(ck.state, cumulative_test(stream, t), t));
      if (!eval_report.empty()) emit_report(report, eval_report, ReportFormat::csv);
      out << format_report_table(report);
    } else if (inspect->parsed()) {
      const Checkpoint ck = load_checkpoint(inspect_checkpoint);
      const ModelState& s = ck.state;
      json meta;
      meta["format"] = kCheckpointFormat;
      meta["version"] = kCheckpointVersion;
      meta["seed"] = s.seed;
      meta["sessions_trained"] = s.cursor;
      meta["extractor_widths"] = s.extractor.widths();
      meta["extractor_frozen"] = s.extractor.frozen();
      meta["atoms"] = s.dictionary.m();
      meta["feature_dim"] = s.dictionary.d();
      meta["lambda"] = s.dictionary.lambda();
      meta["tau"] = s.classifier.tau;
      json sets = json::array();
      for (const PrototypeSet& p : s.prototypes) {
        sets.push_back({{"session", p.session()}, {"classes", p.size()}, {"frozen", p.frozen()}});
      }
      meta["prototype_sets"] = std::move(sets);
      meta["pseudo_classes"] = s.plan ? s.plan->pairs.size() : 0;
      meta["drift"] = s.anchor ? json(s.drift_norm()) : json(nullptr);
      meta["config"] = ck.config;
      out << meta.dump(2) << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dfscil
