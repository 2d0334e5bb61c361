#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoforge::metrics {

/// Tokenization shared by every metric in a run.
struct TokenizerOptions {
  bool lowercase = true;
  bool strip_punctuation = false;  // drop ASCII punctuation characters before splitting
};

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts = {});

/// Fraction of positions where prediction == gold. An unparsed prediction is
/// passed as an empty string and never matches.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Clipped n-gram overlap against one tokenized reference.
PrfScore rouge_n_single(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, std::size_t n);

/// ROUGE-N F1 against the best-matching reference.
double rouge_n(std::string_view candidate, std::span<const std::string> references, std::size_t n,
               const TokenizerOptions& opts = {});

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);
PrfScore rouge_l_single(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference);

/// ROUGE-L F1 against the best-matching reference.
double rouge_l(std::string_view candidate, std::span<const std::string> references,
               const TokenizerOptions& opts = {});

/// Per-order SARI components, each in [0, 1].
struct SariComponents {
  double keep_f1 = 0.0;
  double delete_precision = 0.0;
  double add_f1 = 0.0;
};

SariComponents sari_ngram(const std::vector<std::string>& source,
                          const std::vector<std::string>& candidate,
                          const std::vector<std::vector<std::string>>& references, std::size_t n);

/// SARI on the [0, 100] scale: mean over n = 1..4 of (keep F1 + delete
/// precision + add F1) / 3. Empty-over-empty ratios count as 1.
double sari(std::string_view source, std::string_view candidate,
            std::span<const std::string> references, const TokenizerOptions& opts = {});

/// (prompt - baseline) in percentage points; the baseline itself maps to 0.
double normalized_score(double prompt_accuracy, double baseline_accuracy);

}  // namespace evoforge::metrics
