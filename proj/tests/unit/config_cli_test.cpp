#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evoforge/cli.hpp"
#include "evoforge/config.hpp"
#include "evoforge/text.hpp"

using namespace evoforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string write_json(const fs::path& path, const json& j) {
  std::ofstream(path) << j.dump(2);
  return path.string();
}

std::string line_value(const std::string& text, const std::string& key) {
  for (const auto& l : split_lines(text)) {
    if (l.rfind(key, 0) == 0) return trim(l.substr(key.size()));
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing lists every problem at once") {
  const json j{{"optimizer", {{"population_size", "ten"}, {"engine", "pso"}, {"bogus", 1}}},
               {"operator", {{"kind", "simulated"}}},
               {"extra_section", {}}};
  try {
    parse_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("optimizer.population_size") != std::string::npos);
    CHECK(what.find("optimizer.engine: unknown engine 'pso' (expected one of: ga, de)") !=
          std::string::npos);
    CHECK(what.find("optimizer.bogus") != std::string::npos);
    CHECK(what.find("extra_section") != std::string::npos);
  }
}

TEST_CASE("finalize derives the manual count and synthetic defaults") {
  auto c = parse_config(json{{"optimizer", {{"population_size", 10}, {"init", {{"kind", "manual+resampled"}, {"resampled_count", 5}}}}},
                             {"operator", {{"kind", "simulated"}}}});
  finalize_config(c);
  CHECK(c.optimizer.init.manual_count == 5);
  CHECK(c.task.synthetic.keywords.count("sentiment") == 1);
  CHECK_FALSE(c.op.vocabulary.empty());
  CHECK(resolve_prompts(c).size() == 10);

  auto bad = parse_config(json{{"optimizer", {{"population_size", 4}, {"iterations", 0}}},
                               {"operator", {{"kind", "simulated"}, {"mutation_rate", 2.0}}}});
  try {
    finalize_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("optimizer.iterations") != std::string::npos);
    CHECK(what.find("operator.mutation_rate") != std::string::npos);
  }
}

TEST_CASE("overrides replace config values") {
  AppConfig c;
  ConfigOverrides o;
  o.engine = "de";
  o.seed = 42;
  o.no_cache = true;
  o.task = "sst2-mini";
  apply_overrides(c, o);
  CHECK(c.optimizer.engine == EngineKind::de);
  CHECK(c.optimizer.rng_seed == 42);
  CHECK_FALSE(c.use_cache);
  CHECK(c.task.kind == "classification");
  ConfigOverrides bad;
  bad.selection = "best";
  CHECK_THROWS_AS(apply_overrides(c, bad), ConfigError);
}

TEST_CASE("the API key never reaches the serialized config") {
  ::setenv("EVOFORGE_TEST_KEY", "sk-very-secret", 1);
  AppConfig c;
  c.provider.api_key_env = "EVOFORGE_TEST_KEY";
  const auto text = c.to_json().dump();
  CHECK(text.find("sk-very-secret") == std::string::npos);
  CHECK(text.find("EVOFORGE_TEST_KEY") != std::string::npos);
  const auto round = parse_config(c.to_json());
  CHECK(round.to_json() == c.to_json());
}

TEST_CASE("cli exit codes") {
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({}).code == kExitConfig);
  CHECK(cli({"optimize", "--no-such-flag"}).code == kExitConfig);
  CHECK(cli({"optimize", "--config", "/nonexistent/config.json"}).code == kExitConfig);
  CHECK(cli({"optimize", "--operator", "simulated", "--engine", "xyz"}).code == kExitConfig);
  CHECK(cli({"evaluate", "--operator", "simulated"}).code == kExitConfig);
}

TEST_CASE("cli optimize writes the run artifacts") {
  const auto dir = scratch("evoforge_cli_opt");
  const auto r = cli({"optimize", "--operator", "simulated", "--iterations", "4", "--seed", "3",
                      "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  const fs::path run = line_value(r.out, "run directory:");
  for (const char* f : {"config.json", "ledger.jsonl", "best_prompt.txt", "curves.csv",
                        "diversity.csv", "summary.json"}) {
    CHECK(fs::exists(run / f));
  }
  std::ifstream s(run / "summary.json");
  const auto summary = json::parse(s);
  CHECK(summary["best_curve"].size() == 5);
  CHECK(summary["budget_evolution"]["expected_requests"].is_null());
  CHECK(fs::path(run).filename().string().rfind("ga-s3-", 0) == 0);

  // Same config, same run directory, same best prompt.
  const auto again = cli({"optimize", "--operator", "simulated", "--iterations", "4", "--seed",
                          "3", "--out-dir", dir.string()});
  CHECK(line_value(again.out, "run directory:") == run.string());
  CHECK(line_value(again.out, "best prompt:") == line_value(r.out, "best prompt:"));

  const auto rep = cli({"report", run.string(), "--out", (dir / "report").string()});
  CHECK(rep.code == kExitOk);
  CHECK(fs::exists(dir / "report" / "cost.csv"));
  CHECK(cli({"report", (dir / "missing").string()}).code != kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("cli evaluate and resample-init on the synthetic task") {
  const auto e = cli({"evaluate", "--operator", "simulated", "--prompt",
                      "classify the sentiment as positive or negative"});
  CHECK(e.code == kExitOk);
  CHECK(line_value(e.out, "score:") == "1.0000");

  const auto r = cli({"resample-init", "--operator", "simulated", "--count", "3"});
  CHECK(r.code == kExitOk);
  CHECK(split_lines(trim(r.out)).size() == 3);
}

TEST_CASE("cli maps I/O and provider failures to their exit codes") {
  const auto dir = scratch("evoforge_cli_err");
  { std::ofstream(dir / "blocker") << "x"; }
  const auto io = cli({"optimize", "--operator", "simulated", "--iterations", "1", "--out-dir",
                       (dir / "blocker" / "runs").string()});
  CHECK(io.code == kExitIo);

  const auto cfg = write_json(dir / "llm.json",
                              json{{"optimizer", {{"population_size", 2}, {"iterations", 1}}},
                                   {"provider", {{"base_url", "http://127.0.0.1:9"}, {"max_attempts", 1}, {"timeout_s", 2}}},
                                   {"prompts", {"classify it", "label it"}},
                                   {"run", {{"out_dir", (dir / "runs").string()}}}});
  const auto pe = cli({"resample-init", "--config", cfg, "--count", "1"});
  CHECK(pe.code == kExitProvider);
  CHECK(pe.err.find("provider error") != std::string::npos);
  fs::remove_all(dir);
}
