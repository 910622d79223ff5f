#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dfscil/cli.hpp"
#include "dfscil/errors.hpp"

using namespace dfscil;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dfscil");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dfscil_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> small_generate(const fs::path& out) {
  return {"generate", "--dim", "8", "--base", "4", "--sessions", "2", "--way", "2", "--shot", "3",
          "--train-per-class", "10", "--test-per-class", "5", "--out", out.string()};
}

fs::path write_config(const fs::path& dir, nlohmann::json extra) {
  nlohmann::json cfg = {{"data.manifest", "data/manifest.json"},
                        {"output.dir", "out"},
                        {"model.hidden", {12}},
                        {"model.feature_dim", 8},
                        {"dictionary.atoms", 6},
                        {"trainer.base_epochs", 3},
                        {"trainer.novel_epochs", 2},
                        {"trainer.batch_size", 16}};
  if (extra.is_object()) cfg.update(extra);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << cfg.dump(2);
  return p;
}

}  // namespace

TEST_CASE("generate writes a valid manifest and refuses to overwrite") {
  const fs::path dir = fresh("generate");
  const CliRun first = cli(small_generate(dir / "data"));
  CHECK(first.code == kExitOk);
  CHECK(fs::exists(dir / "data" / "manifest.json"));
  CHECK_NOTHROW(load_stream(dir / "data" / "manifest.json"));

  const CliRun again = cli(small_generate(dir / "data"));
  CHECK(again.code != kExitOk);
  CHECK(again.err.find("error:") != std::string::npos);

  std::vector<std::string> forced = small_generate(dir / "data");
  forced.push_back("--force");
  CHECK(cli(forced).code == kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("generate rejects more novel classes than available") {
  const fs::path dir = fresh("generate_bad");
  std::vector<std::string> args = small_generate(dir / "data");
  args.insert(args.end(), {"--novel-classes", "3"});
  const CliRun r = cli(args);
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
  fs::remove_all(dir);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"generate"}).code == kExitUsage);
  CHECK(cli({"run", "/nonexistent/dfscil/config.json"}).code != kExitOk);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("run writes reports, checkpoints and a labelled variant; repeats are byte-identical") {
  const fs::path dir = fresh("run");
  REQUIRE(cli(small_generate(dir / "data")).code == kExitOk);
  const fs::path cfg = write_config(dir, {{"ablation.enable_pc", false}, {"ablation.enable_da", false}});
  const CliRun r = cli({"run", cfg.string()});
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir / "out";
  for (const char* f : {"report.csv", "report.txt", "summary.json", "effective_config.json",
                        "checkpoint_session0.json", "checkpoint_session2.json"})
    CHECK(fs::exists(out / f));
  const nlohmann::json summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["variant"] == "DDL");
  CHECK(slurp(out / "report.txt").find("DDL") != std::string::npos);
  const nlohmann::json effective = nlohmann::json::parse(slurp(out / "effective_config.json"));
  CHECK(effective["trainer.base_epochs"] == 3);

  const std::string first = slurp(out / "report.csv");
  fs::remove_all(out);
  REQUIRE(cli({"run", cfg.string()}).code == kExitOk);
  CHECK(slurp(out / "report.csv") == first);

  const CliRun inspect = cli({"inspect", (out / "checkpoint_session2.json").string()});
  CHECK(inspect.code == kExitOk);
  const nlohmann::json meta = nlohmann::json::parse(inspect.out);
  CHECK(meta["sessions_trained"] == 3);
  CHECK(meta["atoms"] == 6);

  const CliRun eval = cli({"evaluate", "--checkpoint", (out / "checkpoint_session2.json").string(),
                           "--manifest", (dir / "data" / "manifest.json").string(), "--report",
                           (dir / "rescored.csv").string()});
  CHECK(eval.code == kExitOk);
  // Re-scoring the final checkpoint reproduces the last report line.
  const std::string rescored = slurp(dir / "rescored.csv");
  const std::string last_line = first.substr(first.rfind('\n', first.size() - 2) + 1);
  CHECK(rescored.substr(rescored.find('\n') + 1) == last_line);
  fs::remove_all(dir);
}

TEST_CASE("invalid config values exit with a usage code") {
  const fs::path dir = fresh("badcfg");
  REQUIRE(cli(small_generate(dir / "data")).code == kExitOk);
  CHECK(cli({"run", write_config(dir, {{"dictionary.lambda", 0.0}}).string()}).code == kExitUsage);
  CHECK(cli({"run", write_config(dir, {{"trainer.no_such_key", 1}}).string()}).code == kExitUsage);
  CHECK(cli({"run", write_config(dir, {{"classifier.tau", -0.1}}).string()}).code == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("sweep emits one row per value and rejects unknown axes") {
  const fs::path dir = fresh("sweep");
  REQUIRE(cli(small_generate(dir / "data")).code == kExitOk);
  const fs::path cfg = write_config(dir, {});
  const CliRun r = cli({"sweep", cfg.string(), "--axis", "lambda", "--values", "0.01,0.1,1"});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(dir / "out" / "sweep_lambda.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "lambda,final_joint,final_harmonic,average,drift");
  CHECK(lines[1].rfind("0.01,", 0) == 0);
  CHECK(fs::exists(dir / "out" / "sweep_lambda" / "value_1" / "report.csv"));

  CHECK(cli({"sweep", cfg.string(), "--axis", "width", "--values", "1"}).code == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("output root environment variable redirects relative output dirs") {
  const fs::path dir = fresh("envroot");
  REQUIRE(cli(small_generate(dir / "data")).code == kExitOk);
  const fs::path cfg = write_config(dir, {{"trainer.base_epochs", 1}, {"trainer.novel_epochs", 0}});
  const fs::path root = dir / "elsewhere";
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  const ExperimentConfig loaded = load_experiment_config(cfg);
  ::unsetenv(kOutputRootEnv);
  CHECK(loaded.output_dir == root / "out");
  CHECK(loaded.manifest == dir / "data" / "manifest.json");
  fs::remove_all(dir);
}

TEST_CASE("config keys and ablation variants") {
  ExperimentConfig c;
  CHECK(c.variant() == "D-FSCIL");
  c.enable_da = false;
  CHECK(c.variant() == "DDL+PC");
  CHECK(c.effective_trainer().novel_epochs == 0);
  c.enable_pc = false;
  CHECK(c.variant() == "DDL");
  CHECK(c.effective_trainer().eta == 0.0);
  CHECK_FALSE(c.effective_pseudo().enabled);
  c.enable_da = true;
  CHECK(c.variant() == "DDL+DA");

  ExperimentConfig d;
  d.set("dictionary.atoms", "16");
  d.set("trainer.alpha", "0");
  CHECK(d.model.atoms == 16);
  CHECK(d.trainer.alpha == 0.0);
  ExperimentConfig e;
  e.merge(d.to_json());
  CHECK(e.to_json() == d.to_json());
  CHECK(sweep_axis_key("m") == "dictionary.atoms");
  CHECK(sweep_axis_key("pseudo-classes") == "pseudo.classes");
  CHECK_THROWS_AS(sweep_axis_key("width"), ConfigError);
  d.set("dictionary.lambda", "0");
  CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("installed binary reports exit codes") {
  const std::string bin = DFSCIL_CLI_PATH;
  CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
  const int bad = std::system((bin + " nothing-here > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(bad) == kExitUsage);
  const fs::path dir = fresh("binary");
  const std::string gen = bin + " generate --dim 4 --base 3 --sessions 1 --way 1 --shot 2 --out " +
                          (dir / "d").string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(gen.c_str())) == kExitOk);
  CHECK(WEXITSTATUS(std::system(gen.c_str())) == kExitRuntime);
  fs::remove_all(dir);
}
