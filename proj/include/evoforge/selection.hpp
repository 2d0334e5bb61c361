#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "evoforge/core.hpp"
#include "evoforge/rng.hpp"

namespace evoforge {

/// Shift applied to roulette weights when any score is negative.
inline constexpr double kRouletteShiftEpsilon = 1e-6;

/// Roulette weights for `scores`: unchanged when all are non-negative,
/// otherwise shifted by -min + epsilon.
std::vector<double> roulette_weights(std::span<const double> scores);

/// Index i with probability w_i / sum(w) over `candidates`. Uniform when the
/// candidate weights sum to zero.
std::size_t roulette_pick_among(std::span<const double> weights,
                                std::span<const std::size_t> candidates, Rng& rng);

/// Fitness-proportional pick: P(i) = s_i / sum_j s_j.
std::size_t roulette_pick(std::span<const double> scores, Rng& rng);
std::size_t roulette_pick(const Population& population, Rng& rng);

/// Best of k distinct uniformly sampled indices from `candidates`
/// (ties to the lowest index).
std::size_t tournament_pick_among(std::span<const double> scores,
                                  std::span<const std::size_t> candidates, std::size_t k, Rng& rng);
std::size_t tournament_pick(std::span<const double> scores, std::size_t k, Rng& rng);
std::size_t tournament_pick(const Population& population, std::size_t k, Rng& rng);

/// Two distinct parent indices. The second draw excludes the first parent and
/// renormalises over the rest; tournaments on the remainder are capped at N-1.
std::pair<std::size_t, std::size_t> select_parents(std::span<const double> scores,
                                                   const SelectionStrategy& strategy, Rng& rng);
std::pair<std::size_t, std::size_t> select_parents(const Population& population,
                                                   const SelectionStrategy& strategy, Rng& rng);

}  // namespace evoforge
