#include "evoforge/config.hpp"

#include <fstream>
#include <set>

#include "evoforge/eval_harness.hpp"
#include "evoforge/text.hpp"

namespace evoforge {

using nlohmann::json;

std::string_view to_string(OperatorKind k) { return k == OperatorKind::llm ? "llm" : "simulated"; }

OperatorKind operator_kind_from_string(std::string_view s) {
  if (s == "llm") return OperatorKind::llm;
  if (s == "simulated") return OperatorKind::simulated;
  throw ConfigError("operator.kind: unknown value '" + std::string(s) + "' (llm, simulated)");
}

namespace {

std::string_view synthetic_kind_name(SyntheticKind k) {
  return k == SyntheticKind::keyword_coverage ? "keyword_coverage" : "target_distance";
}

SyntheticKind synthetic_kind_from_string(std::string_view s) {
  if (s == "keyword_coverage") return SyntheticKind::keyword_coverage;
  if (s == "target_distance") return SyntheticKind::target_distance;
  throw ConfigError("unknown value '" + std::string(s) + "' (keyword_coverage, target_distance)");
}

/// Reads fields of one JSON object, collecting a diagnostic per bad field and
/// per unknown key instead of stopping at the first.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) errors_.push_back(where() + ": expected an object");
  }

  ~Reader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!known_.contains(key)) errors_.push_back(field(key) + ": unknown field");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back(field(key) + ": wrong type");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    T value{};
    const bool present = has(key);
    get(key, value);
    if (present) out = value;
  }

  /// Enum field parsed by `parse`, which throws ConfigError on unknown values.
  template <typename E, typename Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    std::string s;
    if (!has(key)) {
      known_.insert(key);
      return;
    }
    get(key, s);
    try {
      out = parse(s);
    } catch (const ConfigError& e) {
      errors_.push_back(field(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

  const json& child(const char* key) {
    known_.insert(key);
    static const json empty = json::object();
    return has(key) ? obj_.at(key) : empty;
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

void throw_if_any(const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

}  // namespace

SyntheticTask default_synthetic_task() {
  SyntheticTask t;
  t.name = std::string(kSyntheticTaskName);
  t.kind = SyntheticKind::keyword_coverage;
  t.keywords = {"classify", "sentiment", "positive", "negative"};
  return t;
}

std::vector<std::string> default_synthetic_vocabulary() {
  return {"classify", "sentiment", "review", "label", "positive", "negative", "the",
          "text",     "each",      "given",  "please", "read",     "carefully", "answer",
          "output",   "word",      "only",   "movie",  "decide",   "whether",   "is",
          "a",        "of",        "and",    "return", "tone",     "opinion",   "judge"};
}

std::vector<std::string> default_synthetic_prompts() {
  return {"Please classify the sentiment expressed in each short text below",
          "Read the movie review carefully and then return a single label",
          "Answer with positive or negative only and nothing else at all",
          "Classify each review you are given into the right category",
          "Give a label that describes the sentiment of the given text",
          "Decide whether the opinion in the text is positive or not",
          "Judge if the opinion of the writer is negative or otherwise",
          "Determine the sentiment and output a label for every input",
          "Look at the review text and then classify it as requested",
          "Output negative when the text is unfavourable and positive otherwise"};
}

json AppConfig::to_json() const {
  const auto& o = optimizer;
  json init{{"kind", std::string(evoforge::to_string(o.init.kind))},
            {"pick", std::string(evoforge::to_string(o.init.pick))},
            {"manual_count", o.init.manual_count},
            {"resampled_count", o.init.resampled_count}};
  json opt{{"population_size", o.population_size},
           {"iterations", o.iterations},
           {"engine", std::string(evoforge::to_string(o.engine))},
           {"selection", std::string(evoforge::to_string(o.selection.kind))},
           {"tournament_size", o.selection.tournament_size},
           {"de_mutate", std::string(evoforge::to_string(o.de_variant.mutate_scope))},
           {"de_prompt3", std::string(evoforge::to_string(o.de_variant.prompt3_source))},
           {"rng_seed", o.rng_seed},
           {"init", init}};

  json t{{"name", task.name}, {"kind", task.kind}};
  if (task.synthetic_task()) {
    t["synthetic_kind"] = std::string(synthetic_kind_name(task.synthetic.kind));
    t["keywords"] = task.synthetic.keywords;
    t["target_text"] = task.synthetic.target_text;
  } else {
    t["data_dir"] = task.data_dir;
    t["label_space"] = task.label_space;
    t["metric"] = task.metric;
    if (task.shots) t["shots"] = *task.shots;
    if (task.dev_size) t["dev_size"] = *task.dev_size;
    if (task.baseline_prompt) t["baseline_prompt"] = *task.baseline_prompt;
    if (!task.template_body.empty()) t["template"] = task.template_body;
    if (!task.anchor.empty()) t["anchor"] = task.anchor;
    t["strip_punctuation"] = task.strip_punctuation;
    t["max_tokens"] = task.max_tokens;
  }

  json opr{{"kind", std::string(evoforge::to_string(op.kind))}};
  if (op.kind == OperatorKind::llm) {
    opr["temperature"] = op.temperature;
    opr["top_p"] = op.top_p;
    opr["max_tokens"] = op.max_tokens;
    opr["max_attempts"] = op.max_attempts;
    if (!op.templates_dir.empty()) opr["templates_dir"] = op.templates_dir;
  } else {
    opr["mutation_rate"] = op.mutation_rate;
    opr["resample_rate"] = op.resample_rate;
    if (!op.vocabulary_path.empty()) opr["vocabulary_path"] = op.vocabulary_path;
    opr["vocabulary"] = op.vocabulary;
  }

  json j{{"optimizer", opt}, {"task", t}, {"operator", opr}, {"prompts", prompts}};
  if (!prompts_file.empty()) j["prompts_file"] = prompts_file;
  if (op.kind == OperatorKind::llm || !task.synthetic_task()) {
    json p{{"base_url", provider.base_url},
           {"model", provider.model},
           {"eval_model", provider.eval_model},
           {"api_key_env", provider.api_key_env},
           {"requests_per_minute", provider.requests_per_minute},
           {"timeout_s", provider.timeout_s},
           {"max_attempts", provider.max_attempts}};
    if (!provider.cache_path.empty()) p["cache_path"] = provider.cache_path;
    j["provider"] = p;
  }
  j["run"] = json{{"out_dir", out_dir}, {"use_cache", use_cache}};
  return j;
}

AppConfig parse_config(const json& j) {
  AppConfig c;
  std::vector<std::string> errors;
  {
    Reader root(j, "", errors);
    {
      Reader r(root.child("optimizer"), "optimizer", errors);
      auto& o = c.optimizer;
      r.get("population_size", o.population_size);
      r.get("iterations", o.iterations);
      r.get_enum("engine", o.engine, engine_from_string);
      r.get_enum("selection", o.selection.kind, selection_from_string);
      r.get("tournament_size", o.selection.tournament_size);
      r.get_enum("de_mutate", o.de_variant.mutate_scope, mutate_scope_from_string);
      r.get_enum("de_prompt3", o.de_variant.prompt3_source, prompt3_from_string);
      r.get("rng_seed", o.rng_seed);
      Reader ri(r.child("init"), "optimizer.init", errors);
      ri.get_enum("kind", o.init.kind, init_kind_from_string);
      ri.get_enum("pick", o.init.pick, init_pick_from_string);
      c.manual_count_set = ri.has("manual_count");
      ri.get("manual_count", o.init.manual_count);
      ri.get("resampled_count", o.init.resampled_count);
    }
    {
      Reader r(root.child("task"), "task", errors);
      auto& t = c.task;
      r.get("name", t.name);
      r.get("kind", t.kind);
      r.get_enum("synthetic_kind", t.synthetic.kind, synthetic_kind_from_string);
      r.get("keywords", t.synthetic.keywords);
      r.get("target_text", t.synthetic.target_text);
      r.get("data_dir", t.data_dir);
      r.get("label_space", t.label_space);
      r.get("metric", t.metric);
      r.get("shots", t.shots);
      r.get("dev_size", t.dev_size);
      r.get("baseline_prompt", t.baseline_prompt);
      r.get("template", t.template_body);
      r.get("anchor", t.anchor);
      r.get("strip_punctuation", t.strip_punctuation);
      r.get("max_tokens", t.max_tokens);
    }
    {
      Reader r(root.child("operator"), "operator", errors);
      auto& op = c.op;
      r.get_enum("kind", op.kind, operator_kind_from_string);
      r.get("temperature", op.temperature);
      r.get("top_p", op.top_p);
      r.get("max_tokens", op.max_tokens);
      r.get("max_attempts", op.max_attempts);
      r.get("templates_dir", op.templates_dir);
      r.get("mutation_rate", op.mutation_rate);
      r.get("resample_rate", op.resample_rate);
      r.get("vocabulary_path", op.vocabulary_path);
      r.get("vocabulary", op.vocabulary);
    }
    {
      Reader r(root.child("provider"), "provider", errors);
      auto& p = c.provider;
      r.get("base_url", p.base_url);
      r.get("model", p.model);
      r.get("eval_model", p.eval_model);
      r.get("api_key_env", p.api_key_env);
      r.get("requests_per_minute", p.requests_per_minute);
      r.get("timeout_s", p.timeout_s);
      r.get("max_attempts", p.max_attempts);
      r.get("cache_path", p.cache_path);
    }
    {
      Reader r(root.child("run"), "run", errors);
      r.get("out_dir", c.out_dir);
      r.get("use_cache", c.use_cache);
    }
    root.get("prompts", c.prompts);
    root.get("prompts_file", c.prompts_file);
  }
  throw_if_any(errors);
  return c;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

void apply_overrides(AppConfig& c, const ConfigOverrides& o) {
  std::vector<std::string> errors;
  auto set_enum = [&](const std::optional<std::string>& v, const char* flag, auto& out,
                      auto parse) {
    if (!v) return;
    try {
      out = parse(*v);
    } catch (const ConfigError& e) {
      errors.push_back(std::string(flag) + ": " + e.what());
    }
  };
  set_enum(o.engine, "--engine", c.optimizer.engine, engine_from_string);
  set_enum(o.selection, "--selection", c.optimizer.selection.kind, selection_from_string);
  set_enum(o.de_mutate, "--de-mutate", c.optimizer.de_variant.mutate_scope,
           mutate_scope_from_string);
  set_enum(o.de_prompt3, "--de-prompt3", c.optimizer.de_variant.prompt3_source,
           prompt3_from_string);
  set_enum(o.op, "--operator", c.op.kind, operator_kind_from_string);
  if (o.tournament_size) c.optimizer.selection.tournament_size = *o.tournament_size;
  if (o.population_size) c.optimizer.population_size = *o.population_size;
  if (o.iterations) c.optimizer.iterations = *o.iterations;
  if (o.seed) c.optimizer.rng_seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.no_cache) c.use_cache = false;
  if (o.task) {
    if (*o.task != c.task.name) {
      c.task = TaskSettings{};
      c.task.name = *o.task;
      c.task.kind = *o.task == kSyntheticTaskName ? "synthetic" : "classification";
    }
  }
  throw_if_any(errors);
}

void finalize_config(AppConfig& c) {
  auto& o = c.optimizer;
  if (!c.manual_count_set && o.population_size >= o.init.resampled_count) {
    o.init.manual_count = o.population_size - o.init.resampled_count;
  }
  if (c.task.synthetic_task()) {
    if (c.task.synthetic.kind == SyntheticKind::keyword_coverage && c.task.synthetic.keywords.empty()) {
      c.task.synthetic.keywords = default_synthetic_task().keywords;
    }
    c.task.synthetic.name = c.task.name;
    std::set<std::string> lowered;
    for (const auto& k : c.task.synthetic.keywords) lowered.insert(to_lower(k));
    c.task.synthetic.keywords = std::move(lowered);
  }
  if (c.op.kind == OperatorKind::simulated && c.op.vocabulary.empty()) {
    c.op.vocabulary = c.op.vocabulary_path.empty() ? default_synthetic_vocabulary()
                                                   : load_vocabulary(c.op.vocabulary_path);
  }

  std::vector<std::string> errors = o.validate();
  const std::set<std::string> kinds{"synthetic", "classification", "summarization",
                                    "simplification", "bbh"};
  if (!kinds.contains(c.task.kind)) {
    errors.push_back("task.kind: unknown value '" + c.task.kind + "'");
  }
  if (c.task.synthetic_task()) {
    try {
      c.task.synthetic.validate();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  } else if (!c.task.metric.empty()) {
    try {
      metric_from_string(c.task.metric);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  if (c.task.name.empty()) errors.push_back("task.name: empty");
  if (c.op.kind == OperatorKind::simulated) {
    if (!(c.op.mutation_rate >= 0.0 && c.op.mutation_rate <= 1.0)) {
      errors.push_back("operator.mutation_rate: must lie in [0, 1]");
    }
    if (!(c.op.resample_rate >= 0.0 && c.op.resample_rate <= 1.0)) {
      errors.push_back("operator.resample_rate: must lie in [0, 1]");
    }
  } else {
    if (!(c.op.temperature >= 0.0)) errors.push_back("operator.temperature: must be >= 0");
    if (!(c.op.top_p > 0.0 && c.op.top_p <= 1.0)) errors.push_back("operator.top_p: must lie in (0, 1]");
    if (c.op.max_tokens <= 0) errors.push_back("operator.max_tokens: must be positive");
    if (c.op.max_attempts < 1) errors.push_back("operator.max_attempts: must be >= 1");
  }
  if (c.op.kind == OperatorKind::llm || !c.task.synthetic_task()) {
    if (c.provider.model.empty()) errors.push_back("provider.model: empty");
    if (c.provider.base_url.find("://") == std::string::npos) {
      errors.push_back("provider.base_url: expected scheme://host[:port]");
    }
    if (c.provider.max_attempts < 1) errors.push_back("provider.max_attempts: must be >= 1");
    if (c.provider.requests_per_minute < 0.0) {
      errors.push_back("provider.requests_per_minute: must be >= 0");
    }
    if (c.provider.timeout_s <= 0) errors.push_back("provider.timeout_s: must be positive");
  }
  if (c.out_dir.empty()) errors.push_back("run.out_dir: empty");
  if (!c.prompts.empty() && !c.prompts_file.empty()) {
    errors.push_back("prompts_file: give either prompts or prompts_file, not both");
  }
  for (std::size_t i = 0; i < c.prompts.size(); ++i) {
    if (trim(c.prompts[i]).empty()) {
      errors.push_back("prompts[" + std::to_string(i) + "]: empty prompt");
    }
  }
  throw_if_any(errors);
}

std::vector<std::string> resolve_prompts(const AppConfig& c) {
  if (!c.prompts.empty()) return c.prompts;
  if (!c.prompts_file.empty()) {
    std::vector<std::string> out;
    for (const auto& line : split_lines(read_file(c.prompts_file))) {
      if (!trim(line).empty()) out.push_back(trim(line));
    }
    if (out.empty()) throw ConfigError("prompts_file: " + c.prompts_file + " has no prompts");
    return out;
  }
  if (c.task.synthetic_task()) return default_synthetic_prompts();
  throw ConfigError("prompts: no manual prompts configured");
}

}  // namespace evoforge
