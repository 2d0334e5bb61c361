#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evoforge/core.hpp"
#include "evoforge/metrics.hpp"
#include "evoforge/provider.hpp"

namespace evoforge {

enum class TaskKind { classification, summarization, simplification, bbh };
std::string_view to_string(TaskKind k);
TaskKind task_kind_from_string(std::string_view s);

/// accuracy | rouge1 | rouge2 | rougeL | rouge (mean of the three) | sari | normalized
enum class MetricId { accuracy, rouge1, rouge2, rouge_l, rouge_avg, sari, normalized };
std::string_view to_string(MetricId m);
MetricId metric_from_string(std::string_view s);
MetricId default_metric(TaskKind kind, bool has_baseline);
/// 100 for metrics reported in points (sari, normalized), else 1.
double metric_scale(MetricId m);

struct Example {
  std::string input;
  std::vector<std::string> references;  // generation tasks
  std::string label;                    // classification and bbh
  std::string rationale;                // bbh demonstrations only
};

/// Body placeholders: {{PROMPT}}, {{INPUT}}, {{DESC}}, and optionally {{DEMO}}
/// marking where demonstrations go (prepended when absent).
struct TaskTemplate {
  std::string body;
  std::string completion_anchor;  // may itself contain {{PROMPT}}

  static TaskTemplate preset(TaskKind kind);
  void validate(TaskKind kind) const;
};

struct Dataset {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
  std::vector<Example> demo;
};

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::classification;
  TaskTemplate tpl;
  std::vector<std::string> label_space;
  MetricId metric = MetricId::accuracy;
  std::size_t shots = 0;
  std::size_t dev_size = 200;
  std::optional<std::string> baseline_prompt;
  std::string description;  // DESC for bbh
  metrics::TokenizerOptions tokenizer;
  std::string model;
  int max_tokens = 128;
  Dataset data;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Dev-set sizes used when none is configured.
std::size_t default_dev_size(TaskKind kind);

/// Reads `<dir>/{train,dev,test}.jsonl` (or `.tsv` for classification),
/// `<dir>/demo.jsonl` and the optional `<dir>/task.json` descriptor
/// (description, baseline_prompt, label_space). Rejects dev/test overlap and
/// demonstrations that also appear in dev or test.
Dataset load_dataset(const std::string& dir, TaskKind kind);
std::vector<Example> load_examples(const std::string& path, TaskKind kind);

/// Applies task.json from `dir` onto `task` where the task leaves fields unset.
void apply_task_descriptor(const std::string& dir, TaskSpec& task);

/// Demonstration examples: one per label in label_space order (classification,
/// drawn by `rng` from the demo pool, or train when there is no demo pool),
/// the first `shots` demo examples (bbh), or `shots` random ones (generation).
std::vector<Example> pick_demonstrations(const TaskSpec& task, Rng& rng);

/// Renders the picked demonstrations for `prompt`, each followed by its answer.
std::string build_demonstration(const TaskSpec& task, const std::vector<Example>& demos,
                                const Prompt& prompt);

/// Demonstrations + template with PROMPT/INPUT/DESC substituted.
std::string render_task_prompt(const TaskSpec& task, const Prompt& prompt, const Example& example,
                               std::string_view demonstration = {});

/// Exact case-insensitive match of the first line, else the first label that
/// appears as a whole word, else "" (unparsed).
std::string parse_label(std::string_view completion, const std::vector<std::string>& label_space);

/// bbh completions: parses the text after the last "answer is" when present.
std::string parse_bbh_answer(std::string_view completion,
                             const std::vector<std::string>& label_space);

/// Metric over collected completions in example order.
double aggregate_metric(const TaskSpec& task, MetricId metric, const std::vector<Example>& examples,
                        const std::vector<std::string>& completions);

/// Completes every example with `prompt` and applies the task metric. With the
/// normalized metric, `baseline_accuracy` must be given.
Score score_prompt(const Prompt& prompt, const TaskSpec& task, const std::vector<Example>& examples,
                   const std::vector<Example>& demos, ChatClient& client,
                   std::optional<double> baseline_accuracy = std::nullopt);

/// Seeded dev subsample of at most `size` examples, kept in file order.
std::vector<Example> subsample(const std::vector<Example>& pool, std::size_t size,
                               std::uint64_t seed);

/// f_D for a task: dev subsample and demonstrations fixed at construction.
class TaskFitness final : public FitnessFunction {
 public:
  TaskFitness(TaskSpec task, ChatClient& client, std::uint64_t seed);

  Score evaluate(const Prompt& prompt) override;
  std::string task_id() const override { return id_; }

  /// Scores on "dev" (the subsample) or "test" (the full split).
  Score evaluate_on(const Prompt& prompt, std::string_view split);

  const TaskSpec& task() const { return task_; }
  const std::vector<Example>& dev() const { return dev_; }
  const std::vector<Example>& demonstrations() const { return demos_; }

 private:
  double baseline_for(const std::vector<Example>& examples, std::string_view split);

  TaskSpec task_;
  ChatClient& client_;
  std::vector<Example> dev_;
  std::vector<Example> demos_;
  std::string id_;
  std::mutex mu_;
  std::optional<double> baseline_dev_;
  std::optional<double> baseline_test_;
};

}  // namespace evoforge
