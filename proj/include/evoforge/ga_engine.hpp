#pragma once

#include <cstddef>
#include <vector>

#include "evoforge/core.hpp"
#include "evoforge/engine.hpp"

namespace evoforge {

/// Keeps the n best of old ∪ new, ordered by score descending, incumbents
/// before offspring on ties, then by original index.
Population top_n_merge(const std::vector<ScoredPrompt>& old_members,
                       const std::vector<ScoredPrompt>& new_members, std::size_t n);

/// One GA generation: for each of the N slots select two parents afresh,
/// produce and score one offspring, then keep the top N of parents and
/// offspring together.
Population ga_step(const Population& population, const SelectionStrategy& strategy,
                   EvolutionOperator& op, FitnessFunction& fitness, const StepContext& ctx);

class GaEngine final : public Engine {
 public:
  explicit GaEngine(SelectionStrategy strategy) : strategy_(strategy) {}
  std::string_view name() const override { return "ga"; }
  Population step(const Population& population, EvolutionOperator& op, FitnessFunction& fitness,
                  const StepContext& ctx) override {
    return ga_step(population, strategy_, op, fitness, ctx);
  }

 private:
  SelectionStrategy strategy_;
};

}  // namespace evoforge
