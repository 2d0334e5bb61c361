#include "evoforge/optimizer.hpp"

#include <algorithm>
#include <numeric>

#include "evoforge/de_engine.hpp"
#include "evoforge/ga_engine.hpp"

namespace evoforge {
namespace {

class CountingOperator final : public EvolutionOperator {
 public:
  explicit CountingOperator(EvolutionOperator& inner) : inner_(inner) {}

  std::string ga_offspring(const Prompt& p1, const Prompt& p2, Rng& rng) override {
    ++calls;
    return inner_.ga_offspring(p1, p2, rng);
  }
  std::string de_offspring(const DeParents& parents, Rng& rng) override {
    ++calls;
    return inner_.de_offspring(parents, rng);
  }
  std::string resample(const Prompt& seed, Rng& rng) override {
    ++calls;
    return inner_.resample(seed, rng);
  }

  std::size_t calls = 0;

 private:
  EvolutionOperator& inner_;
};

}  // namespace

Population initialize_population(const std::vector<std::string>& manual_prompts,
                                 const OptimizerConfig& config, EvolutionOperator& resampler,
                                 FitnessFunction& fitness) {
  const auto& init = config.init;
  const auto n = config.population_size;
  if (init.manual_count < 1) throw ConfigError("optimizer.init.manual_count: must be >= 1");
  if (init.manual_count + init.resampled_count != n) {
    throw ConfigError("optimizer.init: manual_count + resampled_count must equal population_size");
  }
  if (manual_prompts.size() < init.manual_count) {
    throw ConfigError("optimizer.init.manual_count: " + std::to_string(init.manual_count) +
                      " requested but only " + std::to_string(manual_prompts.size()) +
                      " manual prompts given");
  }

  std::vector<ScoredPrompt> scored;
  for (std::size_t k = 0; k < manual_prompts.size(); ++k) {
    auto p = make_prompt(manual_prompts[k], "m" + std::to_string(k));
    auto s = fitness.evaluate(p);
    scored.push_back({std::move(p), s});
  }

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  switch (init.pick) {
    case InitPick::top:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score > scored[b].score;
      });
      break;
    case InitPick::bottom:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score < scored[b].score;
      });
      break;
    case InitPick::random: {
      auto rng = Rng::derive(config.rng_seed, {0x696e /* "in" */, 0});
      for (std::size_t i = 0; i < init.manual_count; ++i) {
        std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
      }
      std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(init.manual_count));
      break;
    }
  }

  std::vector<ScoredPrompt> members;
  for (std::size_t k = 0; k < init.manual_count; ++k) {
    auto m = scored[order[k]];
    m.prompt.id = "t0-" + std::to_string(k);
    members.push_back(std::move(m));
  }
  for (std::size_t j = 0; j < init.resampled_count; ++j) {
    const auto& source = members[j % init.manual_count].prompt;
    auto rng = Rng::derive(config.rng_seed, {0x7273 /* "rs" */, j});
    auto text = resampler.resample(source, rng);
    auto p = make_prompt(std::move(text), "t0-" + std::to_string(init.manual_count + j),
                         Origin::llm_resampled, {source.id});
    auto s = fitness.evaluate(p);
    members.push_back({std::move(p), s});
  }
  return Population(std::move(members), n);
}

std::unique_ptr<Engine> make_engine(const OptimizerConfig& config) {
  if (config.engine == EngineKind::de) return std::make_unique<DeEngine>(config.de_variant);
  return std::make_unique<GaEngine>(config.selection);
}

RunResult run_optimization(const OptimizerConfig& config, const Population& init, Engine& engine,
                           EvolutionOperator& op, FitnessFunction& fitness, RunLedger& ledger,
                           const BudgetProbe& budget) {
  config.validate_or_throw();
  if (init.size() != config.population_size || init.capacity() != config.population_size) {
    throw ConfigError("initial population has " + std::to_string(init.size()) +
                      " members, expected " + std::to_string(config.population_size));
  }
  if (ledger.size() != 0) throw Error("run_optimization: ledger already has records");

  auto snapshot = [&] { return budget ? budget() : BudgetLedger{}; };
  ledger.log_iteration(init, 0, snapshot());

  CountingOperator counting(op);
  Population current = init;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    counting.calls = 0;
    try {
      current = engine.step(current, counting, fitness, StepContext{config.rng_seed, t});
    } catch (const StepError&) {
      throw;
    } catch (const ProviderError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(t, e.what());
    }
    if (current.size() != config.population_size) {
      throw StepError(t, "engine returned " + std::to_string(current.size()) + " members");
    }
    ledger.log_iteration(current, counting.calls, snapshot());
  }
  return RunResult{best_of(current), current};
}

}  // namespace evoforge
