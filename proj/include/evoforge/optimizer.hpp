#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "evoforge/core.hpp"
#include "evoforge/engine.hpp"
#include "evoforge/provider.hpp"
#include "evoforge/reporting.hpp"

namespace evoforge {

/// Scores the manual prompts, keeps `manual_count` of them by the configured
/// pick (top, random or bottom by score) and fills the remaining slots with
/// resampled variants of the kept prompts, taken round-robin. Members get ids
/// "t0-k" in population order.
Population initialize_population(const std::vector<std::string>& manual_prompts,
                                 const OptimizerConfig& config, EvolutionOperator& resampler,
                                 FitnessFunction& fitness);

std::unique_ptr<Engine> make_engine(const OptimizerConfig& config);

/// Budget snapshot taken after every iteration; may be empty.
using BudgetProbe = std::function<BudgetLedger()>;

struct RunResult {
  ScoredPrompt best;
  Population final_population;
};

/// Logs `init` as record 0, then runs T engine steps, logging each. Step
/// failures are rethrown as StepError carrying the iteration.
RunResult run_optimization(const OptimizerConfig& config, const Population& init, Engine& engine,
                           EvolutionOperator& op, FitnessFunction& fitness, RunLedger& ledger,
                           const BudgetProbe& budget = {});

}  // namespace evoforge
