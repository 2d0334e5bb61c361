#include "evoforge/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "evoforge/core.hpp"
#include "evoforge/text.hpp"

namespace evoforge::metrics {
namespace {

using Counts = std::map<std::string, long>;

Counts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  Counts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      g.push_back(' ');
      g += tokens[i + k];
    }
    ++counts[g];
  }
  return counts;
}

long total(const Counts& c) {
  long t = 0;
  for (const auto& [_, v] : c) t += v;
  return t;
}

// Counter & Counter: elementwise min, non-positive entries dropped.
Counts intersect(const Counts& a, const Counts& b) {
  Counts out;
  for (const auto& [g, v] : a) {
    auto it = b.find(g);
    if (it == b.end()) continue;
    const long m = std::min(v, it->second);
    if (m > 0) out[g] = m;
  }
  return out;
}

// Counter - Counter: elementwise difference, non-positive entries dropped.
Counts subtract(const Counts& a, const Counts& b) {
  Counts out;
  for (const auto& [g, v] : a) {
    auto it = b.find(g);
    const long d = v - (it == b.end() ? 0 : it->second);
    if (d > 0) out[g] = d;
  }
  return out;
}

Counts scaled(const Counts& c, long k) {
  Counts out;
  for (const auto& [g, v] : c) out[g] = v * k;
  return out;
}

long lookup(const Counts& c, const std::string& g) {
  auto it = c.find(g);
  return it == c.end() ? 0 : it->second;
}

double f1_of(double p, double r) { return (p > 0.0 || r > 0.0) ? 2.0 * p * r / (p + r) : 0.0; }

PrfScore prf(long matched, long candidate_total, long reference_total) {
  if (candidate_total == 0 && reference_total == 0) return {1.0, 1.0, 1.0};
  if (candidate_total == 0 || reference_total == 0) return {0.0, 0.0, 0.0};
  PrfScore s;
  s.precision = static_cast<double>(matched) / static_cast<double>(candidate_total);
  s.recall = static_cast<double>(matched) / static_cast<double>(reference_total);
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts) {
  std::string s(text);
  if (opts.strip_punctuation) {
    std::string kept;
    kept.reserve(s.size());
    for (char c : s) {
      if (std::ispunct(static_cast<unsigned char>(c)) == 0) kept.push_back(c);
    }
    s = std::move(kept);
  }
  if (opts.lowercase) s = to_lower(s);
  return split_words(s);
}

double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) {
    throw Error("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) throw Error("accuracy: no examples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!predictions[i].empty() && predictions[i] == golds[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(golds.size());
}

PrfScore rouge_n_single(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, std::size_t n) {
  if (n == 0) throw Error("rouge_n: n must be >= 1");
  const auto c = ngram_counts(candidate, n);
  const auto r = ngram_counts(reference, n);
  return prf(total(intersect(c, r)), total(c), total(r));
}

double rouge_n(std::string_view candidate, std::span<const std::string> references, std::size_t n,
               const TokenizerOptions& opts) {
  if (references.empty()) throw Error("rouge_n: no references");
  const auto cand = tokenize(candidate, opts);
  double best = 0.0;
  for (const auto& ref : references) {
    best = std::max(best, rouge_n_single(cand, tokenize(ref, opts), n).f1);
  }
  return best;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_l_single(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference) {
  const auto lcs = static_cast<long>(lcs_length(candidate, reference));
  return prf(lcs, static_cast<long>(candidate.size()), static_cast<long>(reference.size()));
}

double rouge_l(std::string_view candidate, std::span<const std::string> references,
               const TokenizerOptions& opts) {
  if (references.empty()) throw Error("rouge_l: no references");
  const auto cand = tokenize(candidate, opts);
  double best = 0.0;
  for (const auto& ref : references) {
    best = std::max(best, rouge_l_single(cand, tokenize(ref, opts)).f1);
  }
  return best;
}

SariComponents sari_ngram(const std::vector<std::string>& source,
                          const std::vector<std::string>& candidate,
                          const std::vector<std::vector<std::string>>& references, std::size_t n) {
  const long num_refs = static_cast<long>(references.size());
  Counts ref_counts;
  for (const auto& ref : references) {
    for (const auto& [g, v] : ngram_counts(ref, n)) ref_counts[g] += v;
  }
  const auto src_counts = ngram_counts(source, n);
  const auto cand_counts = ngram_counts(candidate, n);
  const auto src_rep = scaled(src_counts, num_refs);
  const auto cand_rep = scaled(cand_counts, num_refs);

  SariComponents out;

  // Keep.
  const auto keep = intersect(src_rep, cand_rep);
  const auto keep_good = intersect(keep, ref_counts);
  const auto keep_all = intersect(src_rep, ref_counts);
  double keep_p_sum = 0.0;
  double keep_r_sum = 0.0;
  for (const auto& [g, good] : keep_good) {
    keep_p_sum += static_cast<double>(good) / static_cast<double>(lookup(keep, g));
    keep_r_sum += static_cast<double>(good) / static_cast<double>(lookup(keep_all, g));
  }
  const double keep_p = keep.empty() ? 1.0 : keep_p_sum / static_cast<double>(keep.size());
  const double keep_r = keep_all.empty() ? 1.0 : keep_r_sum / static_cast<double>(keep_all.size());
  out.keep_f1 = f1_of(keep_p, keep_r);

  // Delete (precision only).
  const auto del = subtract(src_rep, cand_rep);
  const auto del_good = subtract(del, ref_counts);
  double del_p_sum = 0.0;
  for (const auto& [g, good] : del_good) {
    del_p_sum += static_cast<double>(good) / static_cast<double>(lookup(del, g));
  }
  out.delete_precision = del.empty() ? 1.0 : del_p_sum / static_cast<double>(del.size());

  // Add, on n-gram types.
  std::set<std::string> added;
  for (const auto& [g, _] : cand_counts) {
    if (!src_counts.contains(g)) added.insert(g);
  }
  std::set<std::string> add_all;
  for (const auto& [g, _] : ref_counts) {
    if (!src_counts.contains(g)) add_all.insert(g);
  }
  std::size_t add_good = 0;
  for (const auto& g : added) add_good += ref_counts.contains(g) ? 1 : 0;
  const double add_p =
      added.empty() ? 1.0 : static_cast<double>(add_good) / static_cast<double>(added.size());
  const double add_r =
      add_all.empty() ? 1.0 : static_cast<double>(add_good) / static_cast<double>(add_all.size());
  out.add_f1 = f1_of(add_p, add_r);
  return out;
}

double sari(std::string_view source, std::string_view candidate,
            std::span<const std::string> references, const TokenizerOptions& opts) {
  if (references.empty()) throw Error("sari: no references");
  const auto src = tokenize(source, opts);
  const auto cand = tokenize(candidate, opts);
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r, opts));

  double keep = 0.0;
  double del = 0.0;
  double add = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = sari_ngram(src, cand, refs, n);
    keep += c.keep_f1;
    del += c.delete_precision;
    add += c.add_f1;
  }
  return 100.0 * (keep / 4.0 + del / 4.0 + add / 4.0) / 3.0;
}

double normalized_score(double prompt_accuracy, double baseline_accuracy) {
  if (!(prompt_accuracy >= 0.0 && prompt_accuracy <= 1.0) ||
      !(baseline_accuracy >= 0.0 && baseline_accuracy <= 1.0)) {
    throw Error("normalized_score: accuracies must lie in [0, 1]");
  }
  return (prompt_accuracy - baseline_accuracy) * 100.0;
}

}  // namespace evoforge::metrics
