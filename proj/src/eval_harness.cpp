#include "evoforge/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "evoforge/text.hpp"

namespace evoforge {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::classification: return "classification";
    case TaskKind::summarization: return "summarization";
    case TaskKind::simplification: return "simplification";
    case TaskKind::bbh: return "bbh";
  }
  return "?";
}

TaskKind task_kind_from_string(std::string_view s) {
  for (auto k : {TaskKind::classification, TaskKind::summarization, TaskKind::simplification,
                 TaskKind::bbh}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("task.kind: unknown value '" + std::string(s) +
                    "' (classification, summarization, simplification, bbh)");
}

std::string_view to_string(MetricId m) {
  switch (m) {
    case MetricId::accuracy: return "accuracy";
    case MetricId::rouge1: return "rouge1";
    case MetricId::rouge2: return "rouge2";
    case MetricId::rouge_l: return "rougeL";
    case MetricId::rouge_avg: return "rouge";
    case MetricId::sari: return "sari";
    case MetricId::normalized: return "normalized";
  }
  return "?";
}

MetricId metric_from_string(std::string_view s) {
  for (auto m : {MetricId::accuracy, MetricId::rouge1, MetricId::rouge2, MetricId::rouge_l,
                 MetricId::rouge_avg, MetricId::sari, MetricId::normalized}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("task.metric: unknown value '" + std::string(s) + "'");
}

MetricId default_metric(TaskKind kind, bool has_baseline) {
  switch (kind) {
    case TaskKind::classification: return MetricId::accuracy;
    case TaskKind::summarization: return MetricId::rouge_avg;
    case TaskKind::simplification: return MetricId::sari;
    case TaskKind::bbh: return has_baseline ? MetricId::normalized : MetricId::accuracy;
  }
  return MetricId::accuracy;
}

double metric_scale(MetricId m) {
  return m == MetricId::sari || m == MetricId::normalized ? 100.0 : 1.0;
}

std::size_t default_dev_size(TaskKind kind) {
  switch (kind) {
    case TaskKind::classification: return 200;
    case TaskKind::summarization:
    case TaskKind::simplification: return 100;
    case TaskKind::bbh: return 50;
  }
  return 200;
}

TaskTemplate TaskTemplate::preset(TaskKind kind) {
  switch (kind) {
    case TaskKind::classification:
      return {"Below is an instruction that describes a task, paired with an input that provides "
              "further context. Write a response that appropriately completes the request.\n\n"
              "### Instruction:\n{{PROMPT}}\n\n### Input:\n{{INPUT}}\n\n### Response:",
              "### Response:"};
    case TaskKind::summarization:
      return {"{{PROMPT}}\n{{INPUT}}\nTL;DR:", "TL;DR:"};
    case TaskKind::simplification:
      return {"{{PROMPT}}\n{{INPUT}}\nThe simplification of the sentence is",
              "The simplification of the sentence is"};
    case TaskKind::bbh:
      return {"{{DESC}}\n\n{{DEMO}}Q: {{INPUT}}\nA: {{PROMPT}}", "A: {{PROMPT}}"};
  }
  return {};
}

void TaskTemplate::validate(TaskKind kind) const {
  std::map<std::string, int> seen;
  for (const auto& name : placeholders_in(body)) ++seen[name];
  for (const auto& [name, count] : seen) {
    if (name != "PROMPT" && name != "INPUT" && name != "DESC" && name != "DEMO") {
      throw ConfigError("task.template.body: unknown placeholder {{" + name + "}}");
    }
  }
  if (seen["PROMPT"] != 1) throw ConfigError("task.template.body: {{PROMPT}} must appear once");
  if (seen["INPUT"] != 1) throw ConfigError("task.template.body: {{INPUT}} must appear once");
  if (seen["DEMO"] > 1) throw ConfigError("task.template.body: {{DEMO}} appears more than once");
  if (kind == TaskKind::bbh && seen["DESC"] != 1) {
    throw ConfigError("task.template.body: bbh templates need {{DESC}} once");
  }
  if (completion_anchor.empty()) throw ConfigError("task.template.anchor: empty");
  const auto b = trim(body);
  if (b.size() < completion_anchor.size() ||
      b.compare(b.size() - completion_anchor.size(), completion_anchor.size(),
                completion_anchor) != 0) {
    throw ConfigError("task.template.body: must end with the anchor '" + completion_anchor + "'");
  }
}

void TaskSpec::validate() const {
  if (name.empty()) throw ConfigError("task.name: empty");
  tpl.validate(kind);
  if ((kind == TaskKind::classification || kind == TaskKind::bbh) && label_space.empty()) {
    throw ConfigError("task.label_space: required for " + std::string(to_string(kind)));
  }
  std::set<std::string> labels(label_space.begin(), label_space.end());
  if (labels.size() != label_space.size()) throw ConfigError("task.label_space: duplicate labels");
  if (dev_size == 0) throw ConfigError("task.dev_size: must be positive");
  if (metric == MetricId::normalized && !baseline_prompt) {
    throw ConfigError("task.baseline_prompt: required for the normalized metric");
  }
  const bool generation = kind == TaskKind::summarization || kind == TaskKind::simplification;
  const bool labelled_metric = metric == MetricId::accuracy || metric == MetricId::normalized;
  if (generation == labelled_metric) {
    throw ConfigError("task.metric: " + std::string(to_string(metric)) + " does not apply to " +
                      std::string(to_string(kind)) + " tasks");
  }
  auto check = [&](const std::vector<Example>& xs, std::string_view split) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto where = "task." + std::string(split) + "[" + std::to_string(i) + "]";
      if (generation && xs[i].references.empty()) throw ConfigError(where + ": no references");
      if (!generation && !labels.contains(xs[i].label)) {
        throw ConfigError(where + ": label '" + xs[i].label + "' not in label_space");
      }
    }
  };
  if (data.dev.empty()) throw ConfigError("task.dev: no examples");
  check(data.dev, "dev");
  check(data.test, "test");
  check(data.demo, "demo");
}

namespace {

Example parse_example(const json& j, TaskKind kind, const std::string& where) {
  Example ex;
  if (!j.is_object()) throw IoError(where + ": expected an object");
  if (!j.contains("input") || !j["input"].is_string()) throw IoError(where + ": missing input");
  ex.input = j["input"].get<std::string>();
  if (auto it = j.find("label"); it != j.end()) {
    if (it->is_string()) {
      ex.label = it->get<std::string>();
    } else {
      ex.label = it->dump();
    }
  }
  if (auto it = j.find("references"); it != j.end()) {
    if (it->is_string()) {
      ex.references.push_back(it->get<std::string>());
    } else {
      ex.references = it->get<std::vector<std::string>>();
    }
  }
  if (auto it = j.find("rationale"); it != j.end()) ex.rationale = it->get<std::string>();
  const bool generation = kind == TaskKind::summarization || kind == TaskKind::simplification;
  if (generation && ex.references.empty()) throw IoError(where + ": missing references");
  if (!generation && ex.label.empty()) throw IoError(where + ": missing label");
  return ex;
}

std::string find_split(const std::string& dir, std::string_view split) {
  for (const auto* ext : {".jsonl", ".tsv"}) {
    auto p = fs::path(dir) / (std::string(split) + ext);
    if (fs::exists(p)) return p.string();
  }
  return {};
}

void require_disjoint(const std::vector<Example>& a, std::string_view a_name,
                      const std::vector<Example>& b, std::string_view b_name) {
  std::set<std::string> inputs;
  for (const auto& e : a) inputs.insert(e.input);
  for (const auto& e : b) {
    if (inputs.contains(e.input)) {
      throw ConfigError("dataset: example '" + e.input.substr(0, 60) + "' is in both " +
                        std::string(a_name) + " and " + std::string(b_name));
    }
  }
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Position of `needle` in `hay` as a whole word, or npos.
std::size_t find_whole_word(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return std::string_view::npos;
  std::size_t pos = hay.find(needle);
  while (pos != std::string_view::npos) {
    const bool left_ok =
        pos == 0 || !is_word_char(needle.front()) || !is_word_char(hay[pos - 1]);
    const auto end = pos + needle.size();
    const bool right_ok =
        end == hay.size() || !is_word_char(needle.back()) || !is_word_char(hay[end]);
    if (left_ok && right_ok) return pos;
    pos = hay.find(needle, pos + 1);
  }
  return std::string_view::npos;
}

std::string answer_of(const TaskSpec& task, const Example& ex) {
  if (task.kind == TaskKind::summarization || task.kind == TaskKind::simplification) {
    return ex.references.empty() ? std::string() : ex.references.front();
  }
  return ex.label;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::vector<Example> load_examples(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  const bool tsv = fs::path(path).extension() == ".tsv";
  if (tsv && kind != TaskKind::classification) {
    throw ConfigError(path + ": TSV is accepted for classification tasks only");
  }
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto where = path + ":" + std::to_string(lineno);
    if (tsv) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw IoError(where + ": expected input<TAB>label");
      Example ex;
      ex.input = line.substr(0, tab);
      ex.label = trim(line.substr(tab + 1));
      if (lineno == 1 && ex.input == "input" && ex.label == "label") continue;
      out.push_back(std::move(ex));
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    out.push_back(parse_example(j, kind, where));
  }
  return out;
}

Dataset load_dataset(const std::string& dir, TaskKind kind) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir);
  Dataset d;
  const auto dev = find_split(dir, "dev");
  if (dev.empty()) throw IoError(dir + ": no dev.jsonl or dev.tsv");
  d.dev = load_examples(dev, kind);
  if (auto p = find_split(dir, "train"); !p.empty()) d.train = load_examples(p, kind);
  if (auto p = find_split(dir, "test"); !p.empty()) d.test = load_examples(p, kind);
  if (auto p = fs::path(dir) / "demo.jsonl"; fs::exists(p)) d.demo = load_examples(p.string(), kind);

  require_disjoint(d.dev, "dev", d.test, "test");
  const auto& pool = d.demo.empty() ? d.train : d.demo;
  const auto pool_name = d.demo.empty() ? "train" : "demo";
  require_disjoint(pool, pool_name, d.dev, "dev");
  require_disjoint(pool, pool_name, d.test, "test");
  return d;
}

void apply_task_descriptor(const std::string& dir, TaskSpec& task) {
  const auto path = fs::path(dir) / "task.json";
  if (!fs::exists(path)) return;
  json j;
  try {
    std::ifstream in(path);
    j = json::parse(in);
    if (task.description.empty() && j.contains("description")) {
      task.description = j.at("description").get<std::string>();
    }
    if (!task.baseline_prompt && j.contains("baseline_prompt")) {
      task.baseline_prompt = j.at("baseline_prompt").get<std::string>();
    }
    if (task.label_space.empty() && j.contains("label_space")) {
      task.label_space = j.at("label_space").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<Example> pick_demonstrations(const TaskSpec& task, Rng& rng) {
  const auto& pool = task.data.demo.empty() ? task.data.train : task.data.demo;
  std::vector<Example> out;
  if (task.kind == TaskKind::classification) {
    if (task.shots == 0) return out;
    for (const auto& label : task.label_space) {
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].label == label) candidates.push_back(i);
      }
      if (candidates.empty()) {
        throw ConfigError("task.demo: no demonstration example for label '" + label + "'");
      }
      out.push_back(pool[candidates[rng.uniform_index(candidates.size())]]);
    }
    return out;
  }
  if (task.shots > pool.size()) {
    throw ConfigError("task.shots: " + std::to_string(task.shots) + " requested but only " +
                      std::to_string(pool.size()) + " demonstration examples available");
  }
  if (task.kind == TaskKind::bbh) {
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(task.shots));
    return out;
  }
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < task.shots; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  }
  for (std::size_t i = 0; i < task.shots; ++i) out.push_back(pool[idx[i]]);
  return out;
}

std::string build_demonstration(const TaskSpec& task, const std::vector<Example>& demos,
                                const Prompt& prompt) {
  std::string out;
  for (const auto& ex : demos) {
    if (task.kind == TaskKind::bbh) {
      const auto answer = ex.rationale.empty() ? "So the answer is " + ex.label + "." : ex.rationale;
      out += "Q: " + ex.input + "\nA: " + prompt.text + " " + answer + "\n\n";
    } else {
      const char* sep = task.kind == TaskKind::classification ? "\n" : " ";
      out += render_task_prompt(task, prompt, ex) + sep + answer_of(task, ex) + "\n\n";
    }
  }
  return out;
}

std::string render_task_prompt(const TaskSpec& task, const Prompt& prompt, const Example& example,
                               std::string_view demonstration) {
  const bool has_slot = task.tpl.body.find("{{DEMO}}") != std::string::npos;
  std::map<std::string, std::string> values{{"PROMPT", prompt.text},
                                            {"INPUT", example.input},
                                            {"DESC", task.description},
                                            {"DEMO", std::string(demonstration)}};
  auto body = trim(substitute(task.tpl.body, values));
  if (has_slot) return body;
  return std::string(demonstration) + body;
}

std::string parse_label(std::string_view completion, const std::vector<std::string>& label_space) {
  const auto lines = split_lines(completion);
  std::string first;
  for (const auto& l : lines) {
    if (!trim(l).empty()) {
      first = to_lower(trim(l));
      break;
    }
  }
  for (const auto& label : label_space) {
    if (first == to_lower(label)) return label;
  }
  const auto hay = to_lower(completion);
  for (const auto& label : label_space) {
    if (find_whole_word(hay, to_lower(label)) != std::string_view::npos) return label;
  }
  return {};
}

std::string parse_bbh_answer(std::string_view completion,
                             const std::vector<std::string>& label_space) {
  const auto lower = to_lower(completion);
  const auto pos = lower.rfind("answer is");
  if (pos != std::string::npos) {
    auto tail = completion.substr(pos + 9);
    auto label = parse_label(trim(tail), label_space);
    if (!label.empty()) return label;
  }
  return parse_label(completion, label_space);
}

double aggregate_metric(const TaskSpec& task, MetricId metric, const std::vector<Example>& examples,
                        const std::vector<std::string>& completions) {
  if (examples.size() != completions.size() || examples.empty()) {
    throw Error("aggregate_metric: need one completion per example");
  }
  if (metric == MetricId::accuracy || metric == MetricId::normalized) {
    std::vector<std::string> preds, golds;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      preds.push_back(task.kind == TaskKind::bbh ? parse_bbh_answer(completions[i], task.label_space)
                                                 : parse_label(completions[i], task.label_space));
      golds.push_back(examples[i].label);
    }
    return metrics::accuracy(preds, golds);
  }
  std::vector<double> per;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto cand = trim(completions[i]);
    const auto& refs = examples[i].references;
    switch (metric) {
      case MetricId::rouge1: per.push_back(metrics::rouge_n(cand, refs, 1, task.tokenizer)); break;
      case MetricId::rouge2: per.push_back(metrics::rouge_n(cand, refs, 2, task.tokenizer)); break;
      case MetricId::rouge_l: per.push_back(metrics::rouge_l(cand, refs, task.tokenizer)); break;
      case MetricId::rouge_avg:
        per.push_back((metrics::rouge_n(cand, refs, 1, task.tokenizer) +
                       metrics::rouge_n(cand, refs, 2, task.tokenizer) +
                       metrics::rouge_l(cand, refs, task.tokenizer)) /
                      3.0);
        break;
      case MetricId::sari:
        per.push_back(metrics::sari(examples[i].input, cand, refs, task.tokenizer));
        break;
      default: break;
    }
  }
  return mean_of(per);
}

Score score_prompt(const Prompt& prompt, const TaskSpec& task, const std::vector<Example>& examples,
                   const std::vector<Example>& demos, ChatClient& client,
                   std::optional<double> baseline_accuracy) {
  if (examples.empty()) throw ConfigError("task: no examples to score on");
  const auto demo = build_demonstration(task, demos, prompt);
  std::vector<std::string> completions;
  completions.reserve(examples.size());
  for (const auto& ex : examples) {
    CompletionRequest req;
    req.model = task.model;
    req.messages = {{"user", render_task_prompt(task, prompt, ex, demo)}};
    req.temperature = kEvalTemperature;
    req.top_p = 1.0;
    req.max_tokens = task.max_tokens;
    req.purpose = Purpose::task_eval;
    completions.push_back(client.complete(req));
  }
  const double value = aggregate_metric(task, task.metric, examples, completions);
  if (task.metric == MetricId::normalized) {
    if (!baseline_accuracy) throw Error("score_prompt: normalized metric needs a baseline");
    return Score(metrics::normalized_score(value, *baseline_accuracy));
  }
  return Score(value);
}

std::vector<Example> subsample(const std::vector<Example>& pool, std::size_t size,
                               std::uint64_t seed) {
  if (size >= pool.size()) return pool;
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = Rng::derive(seed, {0x6476 /* "dv" */});
  for (std::size_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  std::vector<Example> out;
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

TaskFitness::TaskFitness(TaskSpec task, ChatClient& client, std::uint64_t seed)
    : task_(std::move(task)), client_(client) {
  task_.validate();
  dev_ = subsample(task_.data.dev, task_.dev_size, seed);
  auto rng = Rng::derive(seed, {0x646d /* "dm" */});
  demos_ = pick_demonstrations(task_, rng);

  json id{{"template", task_.tpl.body},
          {"anchor", task_.tpl.completion_anchor},
          {"metric", std::string(to_string(task_.metric))},
          {"model", task_.model},
          {"max_tokens", task_.max_tokens},
          {"labels", task_.label_space},
          {"desc", task_.description},
          {"lowercase", task_.tokenizer.lowercase},
          {"strip_punctuation", task_.tokenizer.strip_punctuation}};
  for (const auto& e : dev_) id["dev"].push_back(e.input);
  for (const auto& e : demos_) id["demo"].push_back(e.input);
  id_ = task_.name + ":" + sha256_hex(id.dump()).substr(0, 16);
}

double TaskFitness::baseline_for(const std::vector<Example>& examples, std::string_view split) {
  auto& slot = split == "test" ? baseline_test_ : baseline_dev_;
  std::lock_guard lock(mu_);
  if (!slot) {
    TaskSpec plain = task_;
    plain.metric = MetricId::accuracy;
    slot = score_prompt(make_prompt(*task_.baseline_prompt, "baseline"), plain, examples, demos_,
                        client_)
               .value();
  }
  return *slot;
}

Score TaskFitness::evaluate(const Prompt& prompt) { return evaluate_on(prompt, "dev"); }

Score TaskFitness::evaluate_on(const Prompt& prompt, std::string_view split) {
  const std::vector<Example>* examples = nullptr;
  if (split == "dev") {
    examples = &dev_;
  } else if (split == "test") {
    examples = &task_.data.test;
  } else {
    throw ConfigError("split: unknown value '" + std::string(split) + "' (dev, test)");
  }
  if (examples->empty()) throw ConfigError("task." + std::string(split) + ": no examples");
  std::optional<double> baseline;
  if (task_.metric == MetricId::normalized) baseline = baseline_for(*examples, split);
  return score_prompt(prompt, task_, *examples, demos_, client_, baseline);
}

}  // namespace evoforge
