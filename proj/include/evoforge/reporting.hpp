#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoforge/core.hpp"
#include "evoforge/provider.hpp"

namespace evoforge {

struct MemberRecord {
  std::string id;
  std::string text;
  Origin origin = Origin::manual;
  std::vector<std::string> parent_ids;
  double score = 0.0;

  bool operator==(const MemberRecord&) const = default;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<MemberRecord> population;
  double best = 0.0;
  double mean = 0.0;
  std::string best_id;
  std::size_t operator_calls = 0;
  BudgetLedger budget;

  bool operator==(const IterationRecord&) const = default;
};

void to_json(nlohmann::json& j, const IterationRecord& r);
void from_json(const nlohmann::json& j, IterationRecord& r);

/// Append-only record of a run. Record 0 is the initial population; each
/// appended record is flushed to `path` (when set) before log_iteration returns.
class RunLedger {
 public:
  explicit RunLedger(std::string path = {});

  /// Reads a ledger.jsonl; records must be contiguous from 0.
  static RunLedger load(const std::string& path);

  void log_iteration(const Population& population, std::size_t operator_calls,
                     const BudgetLedger& budget = {});

  const std::vector<IterationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  void append(IterationRecord record);

  std::string path_;
  std::vector<IterationRecord> records_;
};

struct DiversityRow {
  std::size_t iteration = 0;
  double avg_length = 0.0;
  double length_variance = 0.0;
  std::size_t new_words = 0;

  bool operator==(const DiversityRow&) const = default;
};

/// Word-count mean and population variance per iteration, and the number of
/// lowercase words not seen in any earlier iteration.
std::vector<DiversityRow> diversity_stats(const std::vector<IterationRecord>& records);

struct ConvergenceSummary {
  std::vector<double> best_curve;
  std::vector<double> mean_curve;
  /// Iteration at which the mean has improved by less than the threshold
  /// twice in a row; empty when that never happens.
  std::optional<std::size_t> converged_at;

  bool operator==(const ConvergenceSummary&) const = default;
};

/// `threshold` is in metric units: 0.003 on a [0,1] scale, 0.3 on [0,100].
ConvergenceSummary convergence_summary(const std::vector<IterationRecord>& records,
                                       double threshold = 0.003);

/// Deterministic run directory name from engine, seed and the config text.
std::string make_run_id(std::string_view engine, std::uint64_t seed,
                        const nlohmann::json& config);

void write_curves_csv(std::ostream& out, const ConvergenceSummary& summary);
void write_diversity_csv(std::ostream& out, const std::vector<DiversityRow>& rows);

/// A completed or in-progress run directory, opened read-only.
struct RunArtifacts {
  std::string directory;
  nlohmann::json config;
  nlohmann::json summary;  // null while the run is in progress
  std::vector<IterationRecord> records;
};

RunArtifacts load_run(const std::string& directory);

/// Config with per-run fields (seed, output location) removed; runs whose
/// comparable configs differ cannot be merged.
nlohmann::json comparable_config(const nlohmann::json& config);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
};

struct MergedRow {
  std::size_t iteration = 0;
  MeanStd best;
  MeanStd mean;
  MeanStd avg_length;
  MeanStd length_variance;
  MeanStd new_words;
};

/// Per-iteration mean and std over runs of one config. Throws ConfigError
/// when the runs' configs or iteration counts differ.
std::vector<MergedRow> merge_runs(const std::vector<RunArtifacts>& runs);

/// With one run the std columns are omitted.
void write_merged_curves_csv(std::ostream& out, const std::vector<MergedRow>& rows,
                             std::size_t run_count);
void write_merged_diversity_csv(std::ostream& out, const std::vector<MergedRow>& rows,
                                std::size_t run_count);

}  // namespace evoforge
