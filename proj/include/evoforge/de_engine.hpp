#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "evoforge/core.hpp"
#include "evoforge/engine.hpp"

namespace evoforge {

/// Ordered donor pair (r1, r2), pairwise distinct from the basic index,
/// uniform over the (N-1)(N-2) valid pairs.
std::pair<std::size_t, std::size_t> sample_donors(std::size_t population_size,
                                                  std::size_t basic_index, Rng& rng);

/// Prompt 3 for the variant: the best member, a uniform member, or nothing.
std::optional<Prompt> resolve_prompt3(const Population& population, const DeVariant& variant,
                                      Rng& rng);

/// One DE generation. Every slot i is evolved from (p_i, p_r1, p_r2, Prompt 3)
/// against the population as it stood at the start of the step; slot i takes
/// the child only when the child scores strictly higher.
Population de_step(const Population& population, const DeVariant& variant, EvolutionOperator& op,
                   FitnessFunction& fitness, const StepContext& ctx);

class DeEngine final : public Engine {
 public:
  explicit DeEngine(DeVariant variant) : variant_(variant) {}
  std::string_view name() const override { return "de"; }
  Population step(const Population& population, EvolutionOperator& op, FitnessFunction& fitness,
                  const StepContext& ctx) override {
    return de_step(population, variant_, op, fitness, ctx);
  }

 private:
  DeVariant variant_;
};

}  // namespace evoforge
