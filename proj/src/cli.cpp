#include "evoforge/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "evoforge/config.hpp"
#include "evoforge/eval_harness.hpp"
#include "evoforge/llm_operators.hpp"
#include "evoforge/optimizer.hpp"
#include "evoforge/provider.hpp"
#include "evoforge/reporting.hpp"
#include "evoforge/sim_operators.hpp"
#include "evoforge/text.hpp"

namespace evoforge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Everything a command needs to score prompts and run operators.
struct Wiring {
  BudgetTracker budget;
  std::unique_ptr<HttpChatTransport> transport;
  std::unique_ptr<ResponseCache> cache;
  std::unique_ptr<ChatClient> client;
  std::unique_ptr<FitnessFunction> fitness;
  std::unique_ptr<CachedFitness> cached;
  std::unique_ptr<EvolutionOperator> op;
  TaskFitness* task_fitness = nullptr;
  std::optional<std::size_t> dev_size;
  double metric_scale = 1.0;
  std::string metric = "keyword_fitness";
};

bool needs_provider(const AppConfig& c) {
  return c.op.kind == OperatorKind::llm || !c.task.synthetic_task();
}

TaskSpec build_task_spec(const AppConfig& c) {
  TaskSpec spec;
  spec.name = c.task.name;
  spec.kind = task_kind_from_string(c.task.kind);
  const auto dir = (fs::path(c.task.data_dir) / c.task.name).string();
  spec.data = load_dataset(dir, spec.kind);
  spec.label_space = c.task.label_space;
  spec.baseline_prompt = c.task.baseline_prompt;
  apply_task_descriptor(dir, spec);
  spec.tpl = TaskTemplate::preset(spec.kind);
  if (!c.task.template_body.empty()) {
    spec.tpl.body = c.task.template_body;
    spec.tpl.completion_anchor = c.task.anchor.empty() ? spec.tpl.completion_anchor : c.task.anchor;
  }
  spec.metric = c.task.metric.empty() ? default_metric(spec.kind, spec.baseline_prompt.has_value())
                                      : metric_from_string(c.task.metric);
  spec.shots = c.task.shots.value_or(spec.kind == TaskKind::bbh              ? 3
                                     : spec.kind == TaskKind::classification ? 1
                                                                             : 0);
  spec.dev_size = c.task.dev_size.value_or(default_dev_size(spec.kind));
  spec.tokenizer.strip_punctuation = c.task.strip_punctuation;
  spec.model = c.provider.eval_model.empty() ? c.provider.model : c.provider.eval_model;
  spec.max_tokens = c.task.max_tokens;
  return spec;
}

/// `cache_file` empty disables the persistent response cache.
void wire(Wiring& w, const AppConfig& c, const std::string& cache_file) {
  if (needs_provider(c)) {
    HttpTransportOptions opts;
    opts.base_url = c.provider.base_url;
    if (const char* key = std::getenv(c.provider.api_key_env.c_str())) opts.api_key = key;
    opts.timeout = std::chrono::seconds(c.provider.timeout_s);
    opts.retry.max_attempts = c.provider.max_attempts;
    opts.requests_per_minute = c.provider.requests_per_minute;
    w.transport = std::make_unique<HttpChatTransport>(std::move(opts));
    if (!cache_file.empty()) w.cache = std::make_unique<ResponseCache>(cache_file);
    w.client = std::make_unique<ChatClient>(*w.transport, w.budget, w.cache.get());
  }

  if (c.task.synthetic_task()) {
    w.fitness = std::make_unique<SyntheticFitness>(c.task.synthetic);
  } else {
    auto tf = std::make_unique<TaskFitness>(build_task_spec(c), *w.client, c.optimizer.rng_seed);
    w.task_fitness = tf.get();
    w.dev_size = tf->dev().size();
    w.metric_scale = metric_scale(tf->task().metric);
    w.metric = std::string(to_string(tf->task().metric));
    w.fitness = std::move(tf);
  }
  w.cached = std::make_unique<CachedFitness>(*w.fitness, c.use_cache);

  if (c.op.kind == OperatorKind::simulated) {
    w.op = std::make_unique<SimulatedOperator>(c.op.vocabulary, c.op.mutation_rate,
                                               c.op.resample_rate);
  } else {
    OperatorSampling s;
    s.model = c.provider.model;
    s.temperature = c.op.temperature;
    s.top_p = c.op.top_p;
    s.max_tokens = c.op.max_tokens;
    s.max_attempts = c.op.max_attempts;
    const auto& templates =
        c.op.templates_dir.empty() ? TemplateSet::builtin() : TemplateSet::load(c.op.templates_dir);
    w.op = std::make_unique<LlmOperator>(*w.client, s, templates);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

BudgetLedger ledger_minus(const BudgetLedger& a, const BudgetLedger& b) {
  BudgetLedger d;
  for (std::size_t i = 0; i < d.requests.size(); ++i) d.requests[i] = a.requests[i] - b.requests[i];
  d.prompt_tokens = a.prompt_tokens - b.prompt_tokens;
  d.completion_tokens = a.completion_tokens - b.completion_tokens;
  d.cache_hits = a.cache_hits - b.cache_hits;
  return d;
}

AppConfig resolve_config(const std::string& path, const ConfigOverrides& overrides) {
  AppConfig c = path.empty() ? AppConfig{} : load_config(path);
  apply_overrides(c, overrides);
  finalize_config(c);
  return c;
}

void add_config_flags(CLI::App& cmd, std::string& config_path, ConfigOverrides& o) {
  cmd.add_option("--config", config_path, "JSON config file");
  cmd.add_option_function<std::string>(
      "--engine", [&o](const std::string& v) { o.engine = v; }, "ga | de");
  cmd.add_option_function<std::string>(
      "--selection", [&o](const std::string& v) { o.selection = v; },
      "roulette | tournament | random");
  cmd.add_option_function<std::size_t>(
      "--tournament-size", [&o](const std::size_t& v) { o.tournament_size = v; });
  cmd.add_option_function<std::string>(
      "--de-mutate", [&o](const std::string& v) { o.de_mutate = v; }, "diff | all");
  cmd.add_option_function<std::string>(
      "--de-prompt3", [&o](const std::string& v) { o.de_prompt3 = v; }, "best | random | eliminate");
  cmd.add_option_function<std::size_t>(
      "--population-size", [&o](const std::size_t& v) { o.population_size = v; });
  cmd.add_option_function<std::size_t>("--iterations",
                                       [&o](const std::size_t& v) { o.iterations = v; });
  cmd.add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) { o.seed = v; });
  cmd.add_option_function<std::string>(
      "--operator", [&o](const std::string& v) { o.op = v; }, "llm | simulated");
  cmd.add_option_function<std::string>("--task", [&o](const std::string& v) { o.task = v; });
  cmd.add_option_function<std::string>("--out-dir", [&o](const std::string& v) { o.out_dir = v; });
  cmd.add_flag("--no-cache", o.no_cache, "disable response and score caches");
}

int cmd_optimize(const std::string& config_path, const ConfigOverrides& overrides,
                 std::ostream& out) {
  AppConfig c = resolve_config(config_path, overrides);
  const auto manual = resolve_prompts(c);
  const json config_json = c.to_json();
  json id_basis = config_json;
  id_basis.erase("run");
  const auto run_id =
      make_run_id(to_string(c.optimizer.engine), c.optimizer.rng_seed, id_basis);
  const fs::path run_dir = fs::path(c.out_dir) / run_id;
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + run_dir.string() + ": " + ec.message());
  write_text(run_dir / "config.json", config_json.dump(2) + "\n");

  Wiring w;
  std::string cache_file;
  if (c.use_cache) {
    cache_file = c.provider.cache_path.empty() ? (run_dir / "cache.jsonl").string()
                                               : c.provider.cache_path;
  }
  wire(w, c, cache_file);

  auto init = initialize_population(manual, c.optimizer, *w.op, *w.cached);
  RunLedger ledger((run_dir / "ledger.jsonl").string());
  auto engine = make_engine(c.optimizer);
  BudgetProbe probe = [&w] { return w.budget.snapshot(); };
  const auto result = run_optimization(c.optimizer, init, *engine, *w.op, *w.cached, ledger, probe);

  write_text(run_dir / "best_prompt.txt", result.best.prompt.text + "\n");
  const auto conv = convergence_summary(ledger.records(), 0.003 * w.metric_scale);
  {
    std::ofstream curves(run_dir / "curves.csv");
    write_curves_csv(curves, conv);
    std::ofstream div(run_dir / "diversity.csv");
    write_diversity_csv(div, diversity_stats(ledger.records()));
    if (!curves || !div) throw IoError("cannot write CSVs in " + run_dir.string());
  }

  const auto& recs = ledger.records();
  const auto evolution = ledger_minus(recs.back().budget, recs.front().budget);
  std::optional<std::uint64_t> expected;
  if (c.op.kind == OperatorKind::llm && w.dev_size) {
    expected = expected_requests(c.optimizer.population_size, c.optimizer.iterations, *w.dev_size);
  }
  json summary{{"run_id", run_id},
               {"engine", std::string(to_string(c.optimizer.engine))},
               {"seed", c.optimizer.rng_seed},
               {"population_size", c.optimizer.population_size},
               {"iterations", c.optimizer.iterations},
               {"task", c.task.name},
               {"metric", w.metric},
               {"metric_scale", w.metric_scale},
               {"initial_best", recs.front().best},
               {"best_score", result.best.score.value()},
               {"best_id", result.best.prompt.id},
               {"best_prompt", result.best.prompt.text},
               {"best_curve", conv.best_curve},
               {"mean_curve", conv.mean_curve},
               {"budget_total", recs.back().budget},
               {"budget_evolution", to_json(budget_report(evolution, expected))}};
  summary["converged_at"] = conv.converged_at ? json(*conv.converged_at) : json(nullptr);
  summary["dev_size"] = w.dev_size ? json(*w.dev_size) : json(nullptr);
  write_text(run_dir / "summary.json", summary.dump(2) + "\n");

  out << "run directory: " << run_dir.string() << "\n";
  out << "best score: " << fmt(result.best.score.value()) << "\n";
  out << "best prompt: " << result.best.prompt.text << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& config_path, const ConfigOverrides& overrides,
                 const std::string& prompt_text, const std::string& prompt_file,
                 const std::string& split, std::ostream& out) {
  AppConfig c = resolve_config(config_path, overrides);
  std::string text = prompt_text;
  if (!prompt_file.empty()) text = read_file(prompt_file);
  text = trim(text);
  if (text.empty()) throw ConfigError("prompt: empty prompt text");
  if (split != "dev" && split != "test") {
    throw ConfigError("--split: unknown value '" + split + "' (dev, test)");
  }
  Wiring w;
  wire(w, c, std::string());
  const auto prompt = make_prompt(text, "eval");
  const auto score = w.task_fitness ? w.task_fitness->evaluate_on(prompt, split)
                                    : w.fitness->evaluate(prompt);
  json record{{"task", c.task.name},
              {"split", split},
              {"metric", w.metric},
              {"score", score.value()},
              {"prompt", text}};
  out << "score: " << fmt(score.value()) << "\n";
  out << record.dump() << "\n";
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
               std::ostream& out) {
  if (run_dirs.empty()) throw ConfigError("report: give at least one run directory");
  std::vector<RunArtifacts> runs;
  for (const auto& d : run_dirs) runs.push_back(load_run(d));
  const auto rows = merge_runs(runs);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  {
    std::ofstream curves(fs::path(out_dir) / "curves.csv");
    write_merged_curves_csv(curves, rows, runs.size());
    std::ofstream div(fs::path(out_dir) / "diversity.csv");
    write_merged_diversity_csv(div, rows, runs.size());
    std::ofstream cost(fs::path(out_dir) / "cost.csv");
    cost << "run,operator_requests,eval_requests,cache_hits,network_requests,prompt_tokens,"
            "completion_tokens,expected_requests\n";
    for (const auto& r : runs) {
      const auto& b = r.records.back().budget;
      std::string expected;
      if (r.summary.is_object() && r.summary.contains("budget_evolution")) {
        const auto& e = r.summary["budget_evolution"]["expected_requests"];
        if (!e.is_null()) expected = std::to_string(e.get<std::uint64_t>());
      }
      cost << fs::path(r.directory).filename().string() << ',' << b.requests_for(Purpose::operator_call)
           << ',' << b.requests_for(Purpose::task_eval) << ',' << b.cache_hits << ','
           << b.network_requests() << ',' << b.prompt_tokens << ',' << b.completion_tokens << ','
           << expected << '\n';
    }
    if (!curves || !div || !cost) throw IoError("cannot write report files in " + out_dir);
  }

  const bool multi = runs.size() > 1;
  out << "runs: " << runs.size() << "\n";
  out << std::left << std::setw(6) << "iter" << std::setw(multi ? 20 : 10) << "best"
      << (multi ? "mean" : "mean") << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(6) << r.iteration;
    if (multi) {
      out << std::setw(20) << (fmt(r.best.mean) + " ± " + fmt(r.best.stddev))
          << fmt(r.mean.mean) + " ± " + fmt(r.mean.stddev) << "\n";
    } else {
      out << std::setw(10) << fmt(r.best.mean) << fmt(r.mean.mean) << "\n";
    }
  }
  out << "\ncost\n";
  for (const auto& r : runs) {
    const auto& b = r.records.back().budget;
    out << "  " << fs::path(r.directory).filename().string()
        << ": requests=" << b.total_requests() << " network=" << b.network_requests()
        << " cache_hits=" << b.cache_hits << " tokens=" << b.prompt_tokens + b.completion_tokens
        << "\n";
  }
  out << "written: " << out_dir << "/{curves,diversity,cost}.csv\n";
  return kExitOk;
}

int cmd_resample_init(const std::string& config_path, const ConfigOverrides& overrides,
                      std::optional<std::size_t> count, const std::string& out_file,
                      std::ostream& out) {
  AppConfig c = resolve_config(config_path, overrides);
  const auto manual = resolve_prompts(c);
  const std::size_t k = count.value_or(c.optimizer.init.resampled_count > 0
                                           ? c.optimizer.init.resampled_count
                                           : manual.size());
  Wiring w;
  wire(w, c, c.use_cache && !c.provider.cache_path.empty() ? c.provider.cache_path : std::string());
  std::string text;
  for (std::size_t j = 0; j < k; ++j) {
    const auto source = make_prompt(manual[j % manual.size()], "m" + std::to_string(j % manual.size()));
    auto rng = Rng::derive(c.optimizer.rng_seed, {0x7273 /* "rs" */, j});
    text += collapse_spaces(w.op->resample(source, rng)) + "\n";
  }
  if (out_file.empty()) {
    out << text;
  } else {
    write_text(out_file, text);
    out << "wrote " << k << " prompts to " << out_file << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary prompt optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  ConfigOverrides overrides;

  auto* optimize = app.add_subcommand("optimize", "evolve a prompt population");
  add_config_flags(*optimize, config_path, overrides);

  auto* evaluate = app.add_subcommand("evaluate", "score one prompt on a split");
  std::string eval_config;
  ConfigOverrides eval_overrides;
  add_config_flags(*evaluate, eval_config, eval_overrides);
  std::string prompt_text, prompt_file, split = "test";
  auto* prompt_opt = evaluate->add_option("--prompt", prompt_text, "prompt text");
  auto* file_opt = evaluate->add_option("--prompt-file", prompt_file, "file holding the prompt");
  prompt_opt->excludes(file_opt);
  evaluate->add_option("--split", split, "dev | test");

  auto* report = app.add_subcommand("report", "merge run ledgers into curves and tables");
  std::vector<std::string> run_dirs;
  std::string report_out = "report";
  report->add_option("runs", run_dirs, "run directories")->required();
  report->add_option("--out", report_out, "output directory");

  auto* resample = app.add_subcommand("resample-init", "generate resampled initial prompts");
  std::string rs_config;
  ConfigOverrides rs_overrides;
  add_config_flags(*resample, rs_config, rs_overrides);
  std::size_t rs_count = 0;
  std::string rs_out;
  auto* count_opt = resample->add_option("--count", rs_count, "number of variants");
  resample->add_option("--out", rs_out, "output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(config_path, overrides, out);
    if (evaluate->parsed()) {
      if (prompt_opt->count() == 0 && file_opt->count() == 0) {
        throw ConfigError("evaluate: give --prompt or --prompt-file");
      }
      return cmd_evaluate(eval_config, eval_overrides, prompt_text, prompt_file, split, out);
    }
    if (report->parsed()) return cmd_report(run_dirs, report_out, out);
    if (resample->parsed()) {
      std::optional<std::size_t> count;
      if (count_opt->count() > 0) count = rs_count;
      return cmd_resample_init(rs_config, rs_overrides, count, rs_out, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const StepError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace evoforge
