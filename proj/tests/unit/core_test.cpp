#include <doctest.h>

#include "evoforge/core.hpp"
#include "evoforge/text.hpp"

using namespace evoforge;

namespace {

ScoredPrompt sp(const std::string& text, double score) {
  return {make_prompt(text, text), Score(score)};
}

class CountingFitness : public FitnessFunction {
 public:
  Score evaluate(const Prompt& p) override {
    ++calls;
    return Score(static_cast<double>(p.text.size()));
  }
  std::string task_id() const override { return "len"; }
  int calls = 0;
};

}  // namespace

TEST_CASE("best_of returns the highest score with ties to the lowest index") {
  Population pop({sp("a", 0.2), sp("b", 0.9), sp("c", 0.9), sp("d", 0.1)}, 4);
  CHECK(best_index(pop) == 1);
  CHECK(best_of(pop).prompt.text == "b");
  CHECK(pop.mean_score() == doctest::Approx(0.525));
}

TEST_CASE("population size must equal its capacity") {
  CHECK_THROWS_AS(Population({sp("a", 1), sp("b", 1)}, 1), Error);
  CHECK_THROWS_AS(Population({sp("a", 1)}, 2), Error);
  CHECK_THROWS_AS(Population({}, 0), Error);
}

TEST_CASE("score must be finite") {
  CHECK_THROWS_AS(Score(std::nan("")), Error);
  CHECK_THROWS_AS(Score(1.0 / 0.0), Error);
}

TEST_CASE("make_prompt rejects blank text") {
  CHECK_THROWS_AS(make_prompt("   \n", "x"), Error);
  CHECK(make_prompt("ok", "x").origin == Origin::manual);
}

TEST_CASE("enum names round-trip") {
  CHECK(engine_from_string(to_string(EngineKind::de)) == EngineKind::de);
  CHECK(selection_from_string("tournament") == SelectionKind::tournament);
  CHECK(prompt3_from_string("eliminate") == Prompt3Source::eliminate);
  CHECK(mutate_scope_from_string("all") == MutateScope::all);
  CHECK(init_pick_from_string("bottom") == InitPick::bottom);
  CHECK(origin_from_string(to_string(Origin::llm_resampled)) == Origin::llm_resampled);
  CHECK_THROWS(engine_from_string("pso"));
}

TEST_CASE("optimizer config reports every invalid field") {
  OptimizerConfig c;
  c.population_size = 1;
  c.iterations = 0;
  c.selection.kind = SelectionKind::tournament;
  c.selection.tournament_size = 0;
  const auto errors = c.validate();
  CHECK(errors.size() >= 3);
  CHECK_THROWS_AS(c.validate_or_throw(), ConfigError);

  OptimizerConfig ok;
  CHECK(ok.validate().empty());
}

TEST_CASE("cached fitness evaluates identical texts once") {
  CountingFitness inner;
  CachedFitness cached(inner);
  CHECK(cached.evaluate(make_prompt("abc", "1")).value() == 3.0);
  CHECK(cached.evaluate(make_prompt("abc", "2")).value() == 3.0);
  CHECK(cached.evaluate(make_prompt("abcd", "3")).value() == 4.0);
  CHECK(inner.calls == 2);
  CHECK(cached.cache_hits() == 1);

  CountingFitness raw;
  CachedFitness off(raw, false);
  off.evaluate(make_prompt("abc", "1"));
  off.evaluate(make_prompt("abc", "1"));
  CHECK(raw.calls == 2);
}

TEST_CASE("rng streams are reproducible and path-dependent") {
  auto a = Rng::derive(5, {1, 2});
  auto b = Rng::derive(5, {1, 2});
  auto c = Rng::derive(5, {2, 1});
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.uniform_index(7);
    CHECK(k < 7);
    const double u = r.uniform01();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("text helpers") {
  CHECK(collapse_spaces("  a \t b\n\nc ") == "a b c");
  CHECK(split_words(" x  y ") == std::vector<std::string>{"x", "y"});
  CHECK(substitute("{{A}}-{{B}}-{{C}}", {{"A", "{{B}}"}, {"B", "2"}}) == "{{B}}-2-{{C}}");
  CHECK(placeholders_in("{{A}} {{B}} {{A}}") == std::vector<std::string>{"A", "B", "A"});
  CHECK(count_occurrences("abab", "ab") == 2);
}
