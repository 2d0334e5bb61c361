#include "evoforge/reporting.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "evoforge/text.hpp"

namespace evoforge {

using nlohmann::json;

void to_json(json& j, const IterationRecord& r) {
  json members = json::array();
  for (const auto& m : r.population) {
    members.push_back({{"id", m.id},
                       {"text", m.text},
                       {"origin", std::string(to_string(m.origin))},
                       {"parent_ids", m.parent_ids},
                       {"score", m.score}});
  }
  j = json{{"iteration", r.iteration},   {"population", std::move(members)},
           {"best", r.best},             {"mean", r.mean},
           {"best_id", r.best_id},       {"operator_calls", r.operator_calls},
           {"budget", r.budget}};
}

void from_json(const json& j, IterationRecord& r) {
  r.iteration = j.at("iteration").get<std::size_t>();
  r.population.clear();
  for (const auto& m : j.at("population")) {
    MemberRecord rec;
    rec.id = m.at("id").get<std::string>();
    rec.text = m.at("text").get<std::string>();
    rec.origin = origin_from_string(m.at("origin").get<std::string>());
    rec.parent_ids = m.at("parent_ids").get<std::vector<std::string>>();
    rec.score = m.at("score").get<double>();
    r.population.push_back(std::move(rec));
  }
  r.best = j.at("best").get<double>();
  r.mean = j.at("mean").get<double>();
  r.best_id = j.at("best_id").get<std::string>();
  r.operator_calls = j.at("operator_calls").get<std::size_t>();
  r.budget = j.at("budget").get<BudgetLedger>();
}

RunLedger::RunLedger(std::string path) : path_(std::move(path)) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw IoError("cannot create ledger " + path_);
}

RunLedger RunLedger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ledger " + path);
  RunLedger ledger;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    IterationRecord rec;
    try {
      rec = json::parse(line).get<IterationRecord>();
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (rec.iteration != ledger.records_.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected iteration " +
                    std::to_string(ledger.records_.size()));
    }
    ledger.records_.push_back(std::move(rec));
  }
  return ledger;
}

void RunLedger::log_iteration(const Population& population, std::size_t operator_calls,
                              const BudgetLedger& budget) {
  if (population.empty()) throw Error("log_iteration: empty population");
  IterationRecord rec;
  rec.iteration = records_.size();
  for (const auto& m : population.members()) {
    rec.population.push_back(
        {m.prompt.id, m.prompt.text, m.prompt.origin, m.prompt.parent_ids, m.score.value()});
  }
  const auto& best = best_of(population);
  rec.best = best.score.value();
  rec.best_id = best.prompt.id;
  rec.mean = population.mean_score();
  rec.operator_calls = operator_calls;
  rec.budget = budget;
  append(std::move(rec));
}

void RunLedger::append(IterationRecord record) {
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << json(record).dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed on ledger " + path_);
  }
  records_.push_back(std::move(record));
}

std::vector<DiversityRow> diversity_stats(const std::vector<IterationRecord>& records) {
  std::vector<DiversityRow> rows;
  std::set<std::string> seen;
  for (const auto& rec : records) {
    DiversityRow row;
    row.iteration = rec.iteration;
    std::vector<double> lengths;
    std::set<std::string> vocab;
    for (const auto& m : rec.population) {
      const auto words = split_words(to_lower(m.text));
      lengths.push_back(static_cast<double>(words.size()));
      vocab.insert(words.begin(), words.end());
    }
    if (!lengths.empty()) {
      double sum = 0.0;
      for (double l : lengths) sum += l;
      row.avg_length = sum / static_cast<double>(lengths.size());
      double sq = 0.0;
      for (double l : lengths) sq += (l - row.avg_length) * (l - row.avg_length);
      row.length_variance = sq / static_cast<double>(lengths.size());
    }
    if (!rows.empty()) {
      for (const auto& w : vocab) row.new_words += seen.contains(w) ? 0 : 1;
    }
    seen.insert(vocab.begin(), vocab.end());
    rows.push_back(row);
  }
  return rows;
}

ConvergenceSummary convergence_summary(const std::vector<IterationRecord>& records,
                                       double threshold) {
  ConvergenceSummary s;
  for (const auto& r : records) {
    s.best_curve.push_back(r.best);
    s.mean_curve.push_back(r.mean);
  }
  const auto& m = s.mean_curve;
  for (std::size_t t = 1; t + 1 < m.size(); ++t) {
    if (m[t] - m[t - 1] < threshold && m[t + 1] - m[t] < threshold) {
      s.converged_at = t + 1;
      break;
    }
  }
  return s;
}

std::string make_run_id(std::string_view engine, std::uint64_t seed, const json& config) {
  return std::string(engine) + "-s" + std::to_string(seed) + "-" +
         sha256_hex(config.dump()).substr(0, 12);
}

namespace {

void write_number(std::ostream& out, double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  out << s.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return r;
}

void write_cell(std::ostream& out, const MeanStd& v, bool with_std) {
  out << ',';
  write_number(out, v.mean);
  if (with_std) {
    out << ',';
    write_number(out, v.stddev);
  }
}

}  // namespace

void write_curves_csv(std::ostream& out, const ConvergenceSummary& summary) {
  out << "iteration,best,mean\n";
  for (std::size_t t = 0; t < summary.best_curve.size(); ++t) {
    out << t << ',';
    write_number(out, summary.best_curve[t]);
    out << ',';
    write_number(out, summary.mean_curve[t]);
    out << '\n';
  }
}

void write_diversity_csv(std::ostream& out, const std::vector<DiversityRow>& rows) {
  out << "iteration,avg_length,length_variance,new_words\n";
  for (const auto& r : rows) {
    out << r.iteration << ',';
    write_number(out, r.avg_length);
    out << ',';
    write_number(out, r.length_variance);
    out << ',' << r.new_words << '\n';
  }
}

RunArtifacts load_run(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw IoError("run directory not found: " + directory);
  RunArtifacts run;
  run.directory = directory;
  run.config = read_json_file((fs::path(directory) / "config.json").string());
  const auto summary_path = fs::path(directory) / "summary.json";
  if (fs::exists(summary_path)) run.summary = read_json_file(summary_path.string());
  run.records = RunLedger::load((fs::path(directory) / "ledger.jsonl").string()).records();
  return run;
}

json comparable_config(const json& config) {
  json c = config;
  if (c.contains("optimizer") && c["optimizer"].is_object()) c["optimizer"].erase("rng_seed");
  c.erase("run");
  return c;
}

std::vector<MergedRow> merge_runs(const std::vector<RunArtifacts>& runs) {
  if (runs.empty()) throw ConfigError("report: no runs given");
  const auto reference = comparable_config(runs.front().config);
  for (const auto& r : runs) {
    if (comparable_config(r.config) != reference) {
      throw ConfigError("report: " + r.directory + " was run with a different config than " +
                        runs.front().directory);
    }
    if (r.records.size() != runs.front().records.size()) {
      throw ConfigError("report: " + r.directory + " has " + std::to_string(r.records.size()) +
                        " ledger records, expected " +
                        std::to_string(runs.front().records.size()));
    }
  }
  std::vector<std::vector<DiversityRow>> div;
  for (const auto& r : runs) div.push_back(diversity_stats(r.records));

  std::vector<MergedRow> rows;
  for (std::size_t t = 0; t < runs.front().records.size(); ++t) {
    std::vector<double> best, mean, len, var, fresh;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      best.push_back(runs[k].records[t].best);
      mean.push_back(runs[k].records[t].mean);
      len.push_back(div[k][t].avg_length);
      var.push_back(div[k][t].length_variance);
      fresh.push_back(static_cast<double>(div[k][t].new_words));
    }
    rows.push_back({t, mean_std(best), mean_std(mean), mean_std(len), mean_std(var),
                    mean_std(fresh)});
  }
  return rows;
}

void write_merged_curves_csv(std::ostream& out, const std::vector<MergedRow>& rows,
                             std::size_t run_count) {
  const bool with_std = run_count > 1;
  out << (with_std ? "iteration,best_mean,best_std,mean_mean,mean_std\n" : "iteration,best,mean\n");
  for (const auto& r : rows) {
    out << r.iteration;
    write_cell(out, r.best, with_std);
    write_cell(out, r.mean, with_std);
    out << '\n';
  }
}

void write_merged_diversity_csv(std::ostream& out, const std::vector<MergedRow>& rows,
                                std::size_t run_count) {
  const bool with_std = run_count > 1;
  out << (with_std ? "iteration,avg_length_mean,avg_length_std,length_variance_mean,"
                     "length_variance_std,new_words_mean,new_words_std\n"
                   : "iteration,avg_length,length_variance,new_words\n");
  for (const auto& r : rows) {
    out << r.iteration;
    write_cell(out, r.avg_length, with_std);
    write_cell(out, r.length_variance, with_std);
    write_cell(out, r.new_words, with_std);
    out << '\n';
  }
}

}  // namespace evoforge
