#include "evoforge/sim_operators.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "evoforge/text.hpp"

namespace evoforge {
namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

void require_vocabulary(const std::vector<std::string>& vocabulary) {
  if (vocabulary.empty()) throw ConfigError("simulated operator: vocabulary is empty");
}

}  // namespace

void SyntheticTask::validate() const {
  if (kind == SyntheticKind::keyword_coverage && keywords.empty()) {
    throw ConfigError("task.keywords: keyword set is empty");
  }
  if (kind == SyntheticKind::target_distance && trim(target_text).empty()) {
    throw ConfigError("task.target_text: target is empty");
  }
}

std::vector<std::string> fitness_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& w : split_words(to_lower(text))) {
    std::size_t b = 0;
    std::size_t e = w.size();
    while (b < e && is_punct(w[b])) ++b;
    while (e > b && is_punct(w[e - 1])) --e;
    if (e > b) out.push_back(w.substr(b, e - b));
  }
  return out;
}

std::size_t word_levenshtein(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Score keyword_fitness(const Prompt& prompt, const SyntheticTask& task) {
  const auto words = fitness_words(prompt.text);
  switch (task.kind) {
    case SyntheticKind::keyword_coverage: {
      if (task.keywords.empty()) throw ConfigError("keyword_fitness: empty keyword set");
      std::set<std::string> present(words.begin(), words.end());
      std::size_t hit = 0;
      for (const auto& k : task.keywords) hit += present.count(k);
      return Score(static_cast<double>(hit) / static_cast<double>(task.keywords.size()));
    }
    case SyntheticKind::target_distance: {
      const auto target = fitness_words(task.target_text);
      const auto longest = std::max(words.size(), target.size());
      if (longest == 0) return Score(1.0);
      const auto d = word_levenshtein(words, target);
      return Score(1.0 - static_cast<double>(d) / static_cast<double>(longest));
    }
  }
  return Score(0.0);
}

std::vector<std::string> one_point_crossover(const std::vector<std::string>& a,
                                             const std::vector<std::string>& b, Rng& rng) {
  const auto cut = rng.uniform_index(a.size() + 1);
  std::vector<std::string> child(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut));
  if (cut < b.size()) child.insert(child.end(), b.begin() + static_cast<std::ptrdiff_t>(cut), b.end());
  return child;
}

std::string sim_crossover(const Prompt& parent1, const Prompt& parent2, Rng& rng) {
  const auto a = split_words(parent1.text);
  const auto b = split_words(parent2.text);
  if (a.empty() || b.empty()) throw OperatorError("sim_crossover: empty parent");
  return join_words(one_point_crossover(a, b, rng));
}

std::vector<std::string> mutate_tokens(std::vector<std::string> tokens,
                                       const std::vector<std::string>& vocabulary, double rate,
                                       Rng& rng) {
  require_vocabulary(vocabulary);
  for (auto& t : tokens) {
    if (rng.bernoulli(rate)) t = vocabulary[rng.uniform_index(vocabulary.size())];
  }
  return tokens;
}

std::string sim_mutate(const Prompt& prompt, const std::vector<std::string>& vocabulary,
                       double rate, Rng& rng) {
  auto tokens = split_words(prompt.text);
  if (tokens.empty()) throw OperatorError("sim_mutate: empty prompt");
  return join_words(mutate_tokens(std::move(tokens), vocabulary, rate, rng));
}

std::vector<std::string> multiset_minus(const std::vector<std::string>& a,
                                        const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> budget;
  for (const auto& t : b) ++budget[t];
  std::vector<std::string> out;
  for (const auto& t : a) {
    auto it = budget.find(t);
    if (it != budget.end() && it->second > 0) {
      --it->second;
    } else {
      out.push_back(t);
    }
  }
  return out;
}

std::string sim_de_evolve(const Prompt& basic, const Prompt& donor1, const Prompt& donor2,
                          const Prompt* prompt3, const DeVariant& variant,
                          const std::vector<std::string>& vocabulary, double rate, Rng& rng) {
  require_vocabulary(vocabulary);
  const auto base = split_words(basic.text);
  const auto t1 = split_words(donor1.text);
  const auto t2 = split_words(donor2.text);
  if (base.empty()) throw OperatorError("sim_de_evolve: empty basic prompt");

  // Steps 1-2: the parts that differ (or everything) get mutated.
  std::vector<std::string> diff;
  if (variant.mutate_scope == MutateScope::diff) {
    diff = multiset_minus(t1, t2);
    const auto only2 = multiset_minus(t2, t1);
    diff.insert(diff.end(), only2.begin(), only2.end());
  } else {
    diff = t1;
    diff.insert(diff.end(), t2.begin(), t2.end());
  }
  const auto mutated = mutate_tokens(std::move(diff), vocabulary, rate, rng);

  // Step 3: splice the mutated parts into Prompt 3 as one block at a random position.
  std::vector<std::string> generated;
  if (prompt3 != nullptr) {
    generated = split_words(prompt3->text);
    if (generated.empty()) throw OperatorError("sim_de_evolve: empty prompt 3");
    const auto at = rng.uniform_index(generated.size() + 1);
    generated.insert(generated.begin() + static_cast<std::ptrdiff_t>(at), mutated.begin(),
                     mutated.end());
    // Random deletions bring the splice back to the longest input length.
    const auto limit = std::max({base.size(), t1.size(), t2.size(), split_words(prompt3->text).size()});
    while (generated.size() > limit) {
      generated.erase(generated.begin() +
                      static_cast<std::ptrdiff_t>(rng.uniform_index(generated.size())));
    }
  } else {
    // Without Prompt 3 the donors' shared words carry the mutated parts.
    const auto only1 = multiset_minus(t1, t2);
    generated = multiset_minus(t1, only1);
    generated.insert(generated.end(), mutated.begin(), mutated.end());
  }
  if (generated.empty()) return join_words(base);

  // Step 4: crossover with the basic prompt.
  return join_words(one_point_crossover(base, generated, rng));
}

std::vector<std::string> load_vocabulary(const std::string& path) {
  std::vector<std::string> words;
  for (auto& line : split_lines(read_file(path))) {
    auto w = trim(line);
    if (!w.empty()) words.push_back(std::move(w));
  }
  if (words.empty()) throw ConfigError("vocabulary file " + path + " has no words");
  return words;
}

SyntheticFitness::SyntheticFitness(SyntheticTask task) : task_(std::move(task)) {
  task_.validate();
  id_ = task_.name + (task_.kind == SyntheticKind::keyword_coverage ? ":keywords=" : ":target=");
  if (task_.kind == SyntheticKind::keyword_coverage) {
    std::vector<std::string> kw(task_.keywords.begin(), task_.keywords.end());
    id_ += join_words(kw);
  } else {
    id_ += collapse_spaces(task_.target_text);
  }
}

SimulatedOperator::SimulatedOperator(std::vector<std::string> vocabulary, double mutation_rate,
                                     double resample_rate)
    : vocabulary_(std::move(vocabulary)),
      mutation_rate_(mutation_rate),
      resample_rate_(resample_rate) {
  require_vocabulary(vocabulary_);
  if (mutation_rate_ < 0.0 || mutation_rate_ > 1.0 || resample_rate_ < 0.0 ||
      resample_rate_ > 1.0) {
    throw ConfigError("simulated operator: rates must lie in [0, 1]");
  }
}

std::string SimulatedOperator::ga_offspring(const Prompt& parent1, const Prompt& parent2,
                                            Rng& rng) {
  auto crossed = sim_crossover(parent1, parent2, rng);
  return join_words(mutate_tokens(split_words(crossed), vocabulary_, mutation_rate_, rng));
}

std::string SimulatedOperator::de_offspring(const DeParents& parents, Rng& rng) {
  return sim_de_evolve(parents.basic, parents.donor1, parents.donor2, parents.prompt3,
                       parents.variant, vocabulary_, mutation_rate_, rng);
}

std::string SimulatedOperator::resample(const Prompt& seed, Rng& rng) {
  return sim_mutate(seed, vocabulary_, resample_rate_, rng);
}

}  // namespace evoforge
