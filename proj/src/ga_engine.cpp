#include "evoforge/ga_engine.hpp"

#include <algorithm>

#include "evoforge/selection.hpp"

namespace evoforge {

std::string child_id(std::size_t iteration, std::size_t slot) {
  return "t" + std::to_string(iteration) + "-" + std::to_string(slot);
}

Population top_n_merge(const std::vector<ScoredPrompt>& old_members,
                       const std::vector<ScoredPrompt>& new_members, std::size_t n) {
  if (old_members.size() + new_members.size() < n) {
    throw Error("top_n_merge: union has fewer than " + std::to_string(n) + " members");
  }
  struct Entry {
    const ScoredPrompt* member;
    bool incumbent;
    std::size_t index;
  };
  std::vector<Entry> pool;
  pool.reserve(old_members.size() + new_members.size());
  for (std::size_t i = 0; i < old_members.size(); ++i) pool.push_back({&old_members[i], true, i});
  for (std::size_t i = 0; i < new_members.size(); ++i) pool.push_back({&new_members[i], false, i});

  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    if (a.member->score != b.member->score) return a.member->score > b.member->score;
    if (a.incumbent != b.incumbent) return a.incumbent;
    return a.index < b.index;
  });

  std::vector<ScoredPrompt> kept;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i) kept.push_back(*pool[i].member);
  return Population(std::move(kept), n);
}

Population ga_step(const Population& population, const SelectionStrategy& strategy,
                   EvolutionOperator& op, FitnessFunction& fitness, const StepContext& ctx) {
  const auto n = population.size();
  if (n < 2) throw Error("ga_step: population needs at least 2 members");
  const auto scores = population.scores();

  std::vector<ScoredPrompt> offspring;
  offspring.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = Rng::derive(ctx.seed, {0x6761 /* "ga" */, ctx.iteration, i});
    const auto [r1, r2] = select_parents(scores, strategy, rng);
    const auto& p1 = population[r1].prompt;
    const auto& p2 = population[r2].prompt;
    auto text = op.ga_offspring(p1, p2, rng);
    auto child = make_prompt(std::move(text), child_id(ctx.iteration, i), Origin::evolved,
                             {p1.id, p2.id});
    auto score = fitness.evaluate(child);
    offspring.push_back({std::move(child), score});
  }
  return top_n_merge(population.members(), offspring, n);
}

}  // namespace evoforge
