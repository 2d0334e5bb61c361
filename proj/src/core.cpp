#include "evoforge/core.hpp"

#include <algorithm>
#include <numeric>

#include "evoforge/text.hpp"

namespace evoforge {
namespace {

template <typename E, std::size_t K>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[K],
             std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  std::string allowed;
  for (const auto& entry : table) {
    if (!allowed.empty()) allowed += ", ";
    allowed += entry.second;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of: " +
                    allowed + ")");
}

template <typename E, std::size_t K>
std::string_view enum_name(E v, const std::pair<E, std::string_view> (&table)[K]) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::pair<Origin, std::string_view> kOrigins[] = {
    {Origin::manual, "manual"},
    {Origin::llm_resampled, "llm-resampled"},
    {Origin::evolved, "evolved"}};
constexpr std::pair<EngineKind, std::string_view> kEngines[] = {{EngineKind::ga, "ga"},
                                                                {EngineKind::de, "de"}};
constexpr std::pair<SelectionKind, std::string_view> kSelections[] = {
    {SelectionKind::roulette, "roulette"},
    {SelectionKind::tournament, "tournament"},
    {SelectionKind::random, "random"}};
constexpr std::pair<MutateScope, std::string_view> kScopes[] = {{MutateScope::diff, "diff"},
                                                                {MutateScope::all, "all"}};
constexpr std::pair<Prompt3Source, std::string_view> kPrompt3[] = {
    {Prompt3Source::best, "best"},
    {Prompt3Source::random, "random"},
    {Prompt3Source::eliminate, "eliminate"}};
constexpr std::pair<InitKind, std::string_view> kInitKinds[] = {
    {InitKind::manual_only, "manual-only"},
    {InitKind::manual_plus_resampled, "manual+resampled"}};
constexpr std::pair<InitPick, std::string_view> kInitPicks[] = {
    {InitPick::top, "top"}, {InitPick::random, "random"}, {InitPick::bottom, "bottom"}};

}  // namespace

std::string_view to_string(Origin o) { return enum_name(o, kOrigins); }
std::string_view to_string(EngineKind k) { return enum_name(k, kEngines); }
std::string_view to_string(SelectionKind k) { return enum_name(k, kSelections); }
std::string_view to_string(MutateScope k) { return enum_name(k, kScopes); }
std::string_view to_string(Prompt3Source k) { return enum_name(k, kPrompt3); }
std::string_view to_string(InitKind k) { return enum_name(k, kInitKinds); }
std::string_view to_string(InitPick k) { return enum_name(k, kInitPicks); }

Origin origin_from_string(std::string_view s) { return parse_enum(s, kOrigins, "origin"); }
EngineKind engine_from_string(std::string_view s) { return parse_enum(s, kEngines, "engine"); }
SelectionKind selection_from_string(std::string_view s) {
  return parse_enum(s, kSelections, "selection strategy");
}
MutateScope mutate_scope_from_string(std::string_view s) {
  return parse_enum(s, kScopes, "DE mutate scope");
}
Prompt3Source prompt3_from_string(std::string_view s) {
  return parse_enum(s, kPrompt3, "DE prompt3 source");
}
InitKind init_kind_from_string(std::string_view s) {
  return parse_enum(s, kInitKinds, "init strategy");
}
InitPick init_pick_from_string(std::string_view s) { return parse_enum(s, kInitPicks, "init pick"); }

Prompt make_prompt(std::string text, std::string id, Origin origin,
                   std::vector<std::string> parent_ids) {
  if (trim(text).empty()) throw Error("prompt text is empty");
  return Prompt{std::move(text), std::move(id), origin, std::move(parent_ids)};
}

Population::Population(std::vector<ScoredPrompt> members, std::size_t capacity)
    : members_(std::move(members)), capacity_(capacity) {
  if (capacity_ == 0) throw Error("population capacity must be positive");
  if (members_.size() != capacity_) {
    throw Error("population holds " + std::to_string(members_.size()) + " members, expected " +
                std::to_string(capacity_));
  }
}

std::vector<double> Population::scores() const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.score.value());
  return out;
}

double Population::mean_score() const {
  if (members_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : members_) sum += m.score.value();
  return sum / static_cast<double>(members_.size());
}

std::size_t best_index(const Population& population) {
  if (population.empty()) throw Error("best_of: empty population");
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].score > population[best].score) best = i;
  }
  return best;
}

const ScoredPrompt& best_of(const Population& population) {
  return population[best_index(population)];
}

std::vector<std::string> OptimizerConfig::validate() const {
  std::vector<std::string> errors;
  const auto n = population_size;
  if (n < 2) errors.push_back("optimizer.population_size: must be >= 2 (GA needs two parents)");
  if (engine == EngineKind::de && n < 3) {
    errors.push_back("optimizer.population_size: DE needs >= 3 members (donors r1 != r2 != i)");
  }
  if (iterations < 1) errors.push_back("optimizer.iterations: must be >= 1");
  if (selection.kind == SelectionKind::tournament &&
      (selection.tournament_size < 1 || selection.tournament_size > n)) {
    errors.push_back("optimizer.tournament_size: must be in [1, population_size]");
  }
  if (engine == EngineKind::de && de_variant.mutate_scope == MutateScope::all &&
      de_variant.prompt3_source == Prompt3Source::eliminate) {
    errors.push_back(
        "optimizer.de_prompt3: 'eliminate' is only defined with de_mutate 'diff' "
        "(no operator template covers all+eliminate)");
  }
  if (init.manual_count < 1) errors.push_back("optimizer.init.manual_count: must be >= 1");
  if (init.kind == InitKind::manual_only && init.resampled_count != 0) {
    errors.push_back("optimizer.init.resampled_count: must be 0 for manual-only");
  }
  if (init.manual_count + init.resampled_count != n) {
    errors.push_back("optimizer.init: manual_count + resampled_count must equal population_size (" +
                     std::to_string(init.manual_count + init.resampled_count) + " != " +
                     std::to_string(n) + ")");
  }
  return errors;
}

void OptimizerConfig::validate_or_throw() const {
  auto errors = validate();
  if (errors.empty()) return;
  std::string msg = "invalid optimizer configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

Score CachedFitness::evaluate(const Prompt& prompt) {
  const std::string key = inner_.task_id() + '\x1f' + prompt.text;
  if (enabled_) {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Evaluated outside the lock; a racing duplicate computes the same value.
  Score s = inner_.evaluate(prompt);
  std::lock_guard lock(mu_);
  ++evaluations_;
  if (enabled_) cache_.emplace(key, s);
  return s;
}

std::size_t CachedFitness::evaluations() const {
  std::lock_guard lock(mu_);
  return evaluations_;
}

std::size_t CachedFitness::cache_hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

}  // namespace evoforge
