#include "evoforge/de_engine.hpp"

#include <algorithm>
#include <vector>

namespace evoforge {

std::pair<std::size_t, std::size_t> sample_donors(std::size_t population_size,
                                                  std::size_t basic_index, Rng& rng) {
  if (population_size < 3) throw Error("sample_donors: population needs at least 3 members");
  if (basic_index >= population_size) throw Error("sample_donors: basic index out of range");
  // Draw from the index space with the excluded slots squeezed out.
  auto r1 = rng.uniform_index(population_size - 1);
  if (r1 >= basic_index) ++r1;
  const auto lo = std::min(basic_index, r1);
  const auto hi = std::max(basic_index, r1);
  auto r2 = rng.uniform_index(population_size - 2);
  if (r2 >= lo) ++r2;
  if (r2 >= hi) ++r2;
  return {r1, r2};
}

std::optional<Prompt> resolve_prompt3(const Population& population, const DeVariant& variant,
                                      Rng& rng) {
  if (population.empty()) throw Error("resolve_prompt3: empty population");
  switch (variant.prompt3_source) {
    case Prompt3Source::best:
      return best_of(population).prompt;
    case Prompt3Source::random:
      return population[rng.uniform_index(population.size())].prompt;
    case Prompt3Source::eliminate:
      return std::nullopt;
  }
  return std::nullopt;
}

Population de_step(const Population& population, const DeVariant& variant, EvolutionOperator& op,
                   FitnessFunction& fitness, const StepContext& ctx) {
  const auto n = population.size();
  if (n < 3) throw Error("de_step: population needs at least 3 members");

  // Best is frozen for the whole sweep.
  std::optional<Prompt> best;
  if (variant.prompt3_source == Prompt3Source::best) best = best_of(population).prompt;

  std::vector<ScoredPrompt> next = population.members();
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = Rng::derive(ctx.seed, {0x6465 /* "de" */, ctx.iteration, i});
    const auto [r1, r2] = sample_donors(n, i, rng);
    std::optional<Prompt> prompt3 =
        variant.prompt3_source == Prompt3Source::random ? resolve_prompt3(population, variant, rng)
                                                        : best;

    const auto& basic = population[i].prompt;
    const auto& d1 = population[r1].prompt;
    const auto& d2 = population[r2].prompt;
    DeParents parents{basic, d1, d2, prompt3 ? &*prompt3 : nullptr, variant};
    auto text = op.de_offspring(parents, rng);

    std::vector<std::string> lineage{basic.id, d1.id, d2.id};
    if (prompt3) lineage.push_back(prompt3->id);
    auto child = make_prompt(std::move(text), child_id(ctx.iteration, i), Origin::evolved,
                             std::move(lineage));
    auto score = fitness.evaluate(child);
    if (score > population[i].score) next[i] = ScoredPrompt{std::move(child), score};
  }
  return Population(std::move(next), n);
}

}  // namespace evoforge
