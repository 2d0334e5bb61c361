#include "evoforge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evoforge {
namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

std::vector<double> roulette_weights(std::span<const double> scores) {
  std::vector<double> w(scores.begin(), scores.end());
  if (w.empty()) return w;
  for (double s : w) {
    if (!std::isfinite(s)) throw ConfigError("roulette: non-finite score");
  }
  const double lo = *std::min_element(w.begin(), w.end());
  if (lo < 0.0) {
    const double shift = -lo + kRouletteShiftEpsilon;
    for (auto& x : w) x += shift;
  }
  for (double x : w) {
    if (x < 0.0) throw ConfigError("roulette: negative weight after shift");
  }
  return w;
}

std::size_t roulette_pick_among(std::span<const double> weights,
                                std::span<const std::size_t> candidates, Rng& rng) {
  if (candidates.empty()) throw Error("roulette: no candidates");
  double total = 0.0;
  for (auto i : candidates) total += weights[i];
  if (total <= 0.0) return candidates[rng.uniform_index(candidates.size())];

  const double u = rng.uniform01() * total;
  double acc = 0.0;
  std::size_t last_positive = candidates.front();
  for (auto i : candidates) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding can leave u at the very top of the wheel.
  return last_positive;
}

std::size_t roulette_pick(std::span<const double> scores, Rng& rng) {
  if (scores.empty()) throw Error("roulette: empty population");
  const auto w = roulette_weights(scores);
  const auto idx = all_indices(scores.size());
  return roulette_pick_among(w, idx, rng);
}

std::size_t roulette_pick(const Population& population, Rng& rng) {
  const auto s = population.scores();
  return roulette_pick(s, rng);
}

std::size_t tournament_pick_among(std::span<const double> scores,
                                  std::span<const std::size_t> candidates, std::size_t k,
                                  Rng& rng) {
  if (k < 1 || k > candidates.size()) {
    throw ConfigError("tournament size " + std::to_string(k) + " outside [1, " +
                      std::to_string(candidates.size()) + "]");
  }
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  std::vector<std::size_t> pool(candidates.begin(), candidates.end());
  for (std::size_t j = 0; j < k; ++j) {
    auto r = j + rng.uniform_index(pool.size() - j);
    std::swap(pool[j], pool[r]);
  }
  std::size_t best = pool[0];
  for (std::size_t j = 1; j < k; ++j) {
    const auto c = pool[j];
    if (scores[c] > scores[best] || (scores[c] == scores[best] && c < best)) best = c;
  }
  return best;
}

std::size_t tournament_pick(std::span<const double> scores, std::size_t k, Rng& rng) {
  const auto idx = all_indices(scores.size());
  return tournament_pick_among(scores, idx, k, rng);
}

std::size_t tournament_pick(const Population& population, std::size_t k, Rng& rng) {
  const auto s = population.scores();
  return tournament_pick(s, k, rng);
}

std::pair<std::size_t, std::size_t> select_parents(std::span<const double> scores,
                                                   const SelectionStrategy& strategy, Rng& rng) {
  const auto n = scores.size();
  if (n < 2) throw Error("select_parents: population needs at least 2 members");

  auto idx = all_indices(n);
  auto without = [&idx](std::size_t first) {
    std::vector<std::size_t> rest;
    rest.reserve(idx.size() - 1);
    for (auto i : idx) {
      if (i != first) rest.push_back(i);
    }
    return rest;
  };

  switch (strategy.kind) {
    case SelectionKind::roulette: {
      const auto w = roulette_weights(scores);
      const auto first = roulette_pick_among(w, idx, rng);
      const auto rest = without(first);
      return {first, roulette_pick_among(w, rest, rng)};
    }
    case SelectionKind::tournament: {
      const auto first = tournament_pick_among(scores, idx, strategy.tournament_size, rng);
      const auto rest = without(first);
      const auto k2 = std::min(strategy.tournament_size, rest.size());
      return {first, tournament_pick_among(scores, rest, k2, rng)};
    }
    case SelectionKind::random: {
      const auto first = rng.uniform_index(n);
      const auto rest = without(first);
      return {first, rest[rng.uniform_index(rest.size())]};
    }
  }
  throw Error("select_parents: unknown strategy");
}

std::pair<std::size_t, std::size_t> select_parents(const Population& population,
                                                   const SelectionStrategy& strategy, Rng& rng) {
  const auto s = population.scores();
  return select_parents(s, strategy, rng);
}

}  // namespace evoforge
