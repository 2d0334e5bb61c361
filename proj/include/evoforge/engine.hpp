#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "evoforge/core.hpp"

namespace evoforge {

/// Per-step inputs every engine needs to stay reproducible.
struct StepContext {
  std::uint64_t seed = 0;
  std::size_t iteration = 1;  // 1-based; 0 is the initial population
};

/// Stable id for the child produced at (iteration, slot).
std::string child_id(std::size_t iteration, std::size_t slot);

/// One iteration of an evolutionary algorithm over a scored population.
class Engine {
 public:
  virtual ~Engine() = default;
  virtual std::string_view name() const = 0;
  virtual Population step(const Population& population, EvolutionOperator& op,
                          FitnessFunction& fitness, const StepContext& ctx) = 0;
};

}  // namespace evoforge
