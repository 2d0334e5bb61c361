#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoforge/core.hpp"
#include "evoforge/sim_operators.hpp"

namespace evoforge {

inline constexpr std::string_view kSyntheticTaskName = "synthetic-keywords";

enum class OperatorKind { llm, simulated };
std::string_view to_string(OperatorKind k);
OperatorKind operator_kind_from_string(std::string_view s);

struct ProviderSettings {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "gpt-3.5-turbo";
  std::string eval_model;  // defaults to `model`
  std::string api_key_env = "EVOFORGE_API_KEY";
  double requests_per_minute = 0.0;
  int timeout_s = 120;
  int max_attempts = 5;
  std::string cache_path;  // defaults to <run dir>/cache.jsonl
};

struct OperatorSettings {
  OperatorKind kind = OperatorKind::llm;
  double temperature = 0.5;
  double top_p = 0.95;
  int max_tokens = 512;
  int max_attempts = 3;
  std::string templates_dir;
  double mutation_rate = 0.1;
  double resample_rate = 0.3;
  std::string vocabulary_path;
  std::vector<std::string> vocabulary;
};

struct TaskSettings {
  std::string name = std::string(kSyntheticTaskName);
  std::string kind = "synthetic";  // synthetic | classification | summarization | simplification | bbh
  SyntheticTask synthetic;
  std::string data_dir = "data";
  std::vector<std::string> label_space;
  std::string metric;  // empty: default for the kind
  std::optional<std::size_t> shots;
  std::optional<std::size_t> dev_size;
  std::optional<std::string> baseline_prompt;
  std::string template_body;  // empty: preset for the kind
  std::string anchor;
  bool strip_punctuation = false;
  int max_tokens = 128;

  bool synthetic_task() const { return kind == "synthetic"; }
};

struct AppConfig {
  OptimizerConfig optimizer;
  bool manual_count_set = false;  // else derived as N - resampled_count
  TaskSettings task;
  ProviderSettings provider;
  OperatorSettings op;
  std::vector<std::string> prompts;
  std::string prompts_file;
  std::string out_dir = "runs";
  bool use_cache = true;

  /// Canonical form, written as config.json. Never contains the API key.
  nlohmann::json to_json() const;
};

/// Every invalid field is reported; throws ConfigError listing all of them.
AppConfig parse_config(const nlohmann::json& j);
AppConfig load_config(const std::string& path);

struct ConfigOverrides {
  std::optional<std::string> engine;
  std::optional<std::string> selection;
  std::optional<std::size_t> tournament_size;
  std::optional<std::string> de_mutate;
  std::optional<std::string> de_prompt3;
  std::optional<std::size_t> population_size;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> op;
  std::optional<std::string> task;
  std::optional<std::string> out_dir;
  bool no_cache = false;
};

void apply_overrides(AppConfig& config, const ConfigOverrides& overrides);

/// Fills derived defaults (init counts, synthetic task data), then validates
/// the whole config. Throws ConfigError listing every problem.
void finalize_config(AppConfig& config);

/// Built-in synthetic task data used when the config does not provide it.
SyntheticTask default_synthetic_task();
std::vector<std::string> default_synthetic_vocabulary();
std::vector<std::string> default_synthetic_prompts();

/// Manual prompts from `prompts`, else one per non-empty line of `prompts_file`,
/// else the synthetic defaults.
std::vector<std::string> resolve_prompts(const AppConfig& config);

}  // namespace evoforge
