#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evoforge/core.hpp"

namespace evoforge {

// Word-level stand-ins for the LLM operators and the dev-set fitness, so the
// engines run offline and every run is reproducible from its seed.

enum class SyntheticKind { keyword_coverage, target_distance };

struct SyntheticTask {
  std::string name = "synthetic-keywords";
  SyntheticKind kind = SyntheticKind::keyword_coverage;
  std::set<std::string> keywords;  // lowercase
  std::string target_text;

  void validate() const;
};

/// Lowercased words with leading/trailing ASCII punctuation removed.
std::vector<std::string> fitness_words(std::string_view text);

/// keyword_coverage: |words ∩ keywords| / |keywords|.
/// target_distance: 1 - word-level Levenshtein / max(word counts).
Score keyword_fitness(const Prompt& prompt, const SyntheticTask& task);

std::size_t word_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// One-point crossover on word tokens: cut c ~ U{0..|p1|}, child = p1[:c] + p2[c:].
std::string sim_crossover(const Prompt& parent1, const Prompt& parent2, Rng& rng);
std::vector<std::string> one_point_crossover(const std::vector<std::string>& a,
                                             const std::vector<std::string>& b, Rng& rng);

/// Each token independently replaced by a uniform vocabulary word with probability `rate`.
std::string sim_mutate(const Prompt& prompt, const std::vector<std::string>& vocabulary,
                       double rate, Rng& rng);
std::vector<std::string> mutate_tokens(std::vector<std::string> tokens,
                                       const std::vector<std::string>& vocabulary, double rate,
                                       Rng& rng);

/// Tokens present in `a` but not in `b`, multiset-wise, in `a`'s order.
std::vector<std::string> multiset_minus(const std::vector<std::string>& a,
                                        const std::vector<std::string>& b);

/// Word-level DE: mutate the donors' different parts (or all donor tokens),
/// splice them as one block into Prompt 3 and trim random words until the
/// result is no longer than the longest input (or append them to the donor
/// overlap when Prompt 3 is eliminated), then cross over with the basic prompt.
std::string sim_de_evolve(const Prompt& basic, const Prompt& donor1, const Prompt& donor2,
                          const Prompt* prompt3, const DeVariant& variant,
                          const std::vector<std::string>& vocabulary, double rate, Rng& rng);

std::vector<std::string> load_vocabulary(const std::string& path);

class SyntheticFitness final : public FitnessFunction {
 public:
  explicit SyntheticFitness(SyntheticTask task);
  Score evaluate(const Prompt& prompt) override { return keyword_fitness(prompt, task_); }
  std::string task_id() const override { return id_; }

 private:
  SyntheticTask task_;
  std::string id_;
};

class SimulatedOperator final : public EvolutionOperator {
 public:
  SimulatedOperator(std::vector<std::string> vocabulary, double mutation_rate,
                    double resample_rate);

  std::string ga_offspring(const Prompt& parent1, const Prompt& parent2, Rng& rng) override;
  std::string de_offspring(const DeParents& parents, Rng& rng) override;
  std::string resample(const Prompt& seed, Rng& rng) override;

 private:
  std::vector<std::string> vocabulary_;
  double mutation_rate_;
  double resample_rate_;
};

}  // namespace evoforge
