#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evoforge/rng.hpp"

namespace evoforge {

// ---------------------------------------------------------------------------
// Errors. The CLI maps ConfigError, ProviderError and IoError to exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, std::string request_id = {})
      : Error(request_id.empty() ? what : what + " (request " + request_id + ")"),
        request_id_(std::move(request_id)) {}
  const std::string& request_id() const { return request_id_; }

 private:
  std::string request_id_;
};

/// An evolution operator could not produce a usable child prompt.
class OperatorError : public Error {
 public:
  using Error::Error;
};

/// Failure inside one optimizer iteration; carries the iteration index.
class StepError : public Error {
 public:
  StepError(std::size_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// ---------------------------------------------------------------------------
// Genomes and scores.

enum class Origin { manual, llm_resampled, evolved };

std::string_view to_string(Origin o);
Origin origin_from_string(std::string_view s);

struct Prompt {
  std::string text;
  std::string id;
  Origin origin = Origin::manual;
  std::vector<std::string> parent_ids;

  bool operator==(const Prompt&) const = default;
};

/// Builds a prompt, rejecting text that is empty after trimming.
Prompt make_prompt(std::string text, std::string id, Origin origin = Origin::manual,
                   std::vector<std::string> parent_ids = {});

/// Fitness value in task-metric units. Always finite.
class Score {
 public:
  constexpr Score() = default;
  explicit Score(double v) : value_(v) {
    if (!std::isfinite(v)) throw Error("score must be finite");
  }
  double value() const { return value_; }
  auto operator<=>(const Score&) const = default;

 private:
  double value_ = 0.0;
};

struct ScoredPrompt {
  Prompt prompt;
  Score score;

  bool operator==(const ScoredPrompt&) const = default;
};

/// Ordered members with a fixed capacity N. Engines must hand back exactly N.
class Population {
 public:
  Population() = default;
  Population(std::vector<ScoredPrompt> members, std::size_t capacity);

  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return members_.empty(); }
  const ScoredPrompt& operator[](std::size_t i) const { return members_.at(i); }
  const std::vector<ScoredPrompt>& members() const { return members_; }
  std::vector<double> scores() const;
  double mean_score() const;

  bool operator==(const Population&) const = default;

 private:
  std::vector<ScoredPrompt> members_;
  std::size_t capacity_ = 0;
};

/// Highest-scoring member; ties go to the lowest index.
std::size_t best_index(const Population& population);
const ScoredPrompt& best_of(const Population& population);

// ---------------------------------------------------------------------------
// Configuration.

enum class EngineKind { ga, de };
enum class SelectionKind { roulette, tournament, random };
enum class MutateScope { diff, all };
enum class Prompt3Source { best, random, eliminate };
enum class InitKind { manual_only, manual_plus_resampled };
/// Which manual prompts survive into the initial population, ranked by dev score.
enum class InitPick { top, random, bottom };

std::string_view to_string(EngineKind k);
std::string_view to_string(SelectionKind k);
std::string_view to_string(MutateScope k);
std::string_view to_string(Prompt3Source k);
std::string_view to_string(InitKind k);
std::string_view to_string(InitPick k);
EngineKind engine_from_string(std::string_view s);
SelectionKind selection_from_string(std::string_view s);
MutateScope mutate_scope_from_string(std::string_view s);
Prompt3Source prompt3_from_string(std::string_view s);
InitKind init_kind_from_string(std::string_view s);
InitPick init_pick_from_string(std::string_view s);

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::roulette;
  std::size_t tournament_size = 2;
};

struct DeVariant {
  MutateScope mutate_scope = MutateScope::diff;
  Prompt3Source prompt3_source = Prompt3Source::best;
};

struct InitStrategy {
  InitKind kind = InitKind::manual_only;
  InitPick pick = InitPick::top;
  std::size_t manual_count = 10;
  std::size_t resampled_count = 0;
};

struct OptimizerConfig {
  std::size_t population_size = 10;
  std::size_t iterations = 10;
  EngineKind engine = EngineKind::ga;
  SelectionStrategy selection;
  DeVariant de_variant;
  std::uint64_t rng_seed = 0;
  InitStrategy init;

  /// One diagnostic per invalid field, each prefixed with its field path.
  std::vector<std::string> validate() const;
  void validate_or_throw() const;
};

// ---------------------------------------------------------------------------
// Fitness.

class FitnessFunction {
 public:
  virtual ~FitnessFunction() = default;
  virtual Score evaluate(const Prompt& prompt) = 0;
  /// Identifies the dev set + template + metric; part of the score cache key.
  virtual std::string task_id() const = 0;
};

/// Score cache in front of another fitness function, keyed by (text, task id).
/// Identical texts are evaluated once. Safe for concurrent use.
class CachedFitness : public FitnessFunction {
 public:
  explicit CachedFitness(FitnessFunction& inner, bool enabled = true)
      : inner_(inner), enabled_(enabled) {}

  Score evaluate(const Prompt& prompt) override;
  std::string task_id() const override { return inner_.task_id(); }

  std::size_t evaluations() const;
  std::size_t cache_hits() const;

 private:
  FitnessFunction& inner_;
  bool enabled_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Score> cache_;
  std::size_t evaluations_ = 0;
  std::size_t hits_ = 0;
};

// ---------------------------------------------------------------------------
// Evolution operators.

struct DeParents {
  const Prompt& basic;
  const Prompt& donor1;
  const Prompt& donor2;
  const Prompt* prompt3;  // null when the variant eliminates Prompt 3
  DeVariant variant;
};

/// Produces child prompt text from parents. Backed by an LLM following
/// instruction templates, or by deterministic word-level simulations.
class EvolutionOperator {
 public:
  virtual ~EvolutionOperator() = default;
  /// GA: crossover of the two parents followed by mutation.
  virtual std::string ga_offspring(const Prompt& parent1, const Prompt& parent2, Rng& rng) = 0;
  /// DE: mutate donor differences, merge into Prompt 3, cross over with basic.
  virtual std::string de_offspring(const DeParents& parents, Rng& rng) = 0;
  /// Semantic-preserving variation used to fill the initial population.
  virtual std::string resample(const Prompt& seed, Rng& rng) = 0;
};

}  // namespace evoforge
