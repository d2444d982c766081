#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipeval/evaluator.hpp"
#include "ipeval/quality_filter.hpp"

namespace ipeval {

struct ContingencyTable {
  size_t n_total = 0;
  size_t both_correct = 0;
  size_t context_only = 0;
  size_t direct_only = 0;
  size_t both_incorrect = 0;

  size_t c_context() const { return both_correct + context_only; }
  size_t c_direct() const { return both_correct + direct_only; }

  bool operator==(const ContingencyTable&) const = default;
};

// Classifies each verdict into exactly one cell. Throws on a duplicate
// mcq_id.
ContingencyTable tabulate(const std::vector<QuestionVerdict>& verdicts);

// (C_context - C_direct) / (n_total - both_incorrect): the normalized
// gain from showing the source, over the questions answerable in at
// least one condition. Throws when that denominator is zero.
double information_potential(const ContingencyTable& t);

struct LetterHistogram {
  std::array<size_t, 4> counts{};  // A..D

  size_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  double fraction(int letter_index) const;
};

struct PositionalBias {
  LetterHistogram generation;        // gen_letter over the MCQ set
  LetterHistogram asked;             // letter_of_correct over records
  LetterHistogram answered_direct;   // parsed answers, direct condition
  LetterHistogram answered_context;  // parsed answers, with_context
  size_t unparsed_direct = 0;
  size_t unparsed_context = 0;
};

PositionalBias positional_bias_stats(const std::vector<Mcq>& mcqs,
                                     const std::vector<RotationRecord>& records);

enum class SweepFamily { cosine_only, surface_only, joint };

const char* sweep_family_name(SweepFamily f);

ThresholdPolicy sweep_policy(SweepFamily family, int percentile,
                             const std::optional<double>& cosine_upper_cap);

struct SweepRow {
  SweepFamily family = SweepFamily::joint;
  int percentile = 0;
  size_t n_kept = 0;
  double fraction_remaining = 0;
  // metrics cover kept questions that hold a verdict
  size_t n_scored = 0;
  std::optional<double> direct_4x_accuracy;
  std::optional<double> context_4x_accuracy;
  std::optional<double> ip;
  std::string note;  // set when the row has no usable metrics
};

// Re-filters the already-evaluated pool at each percentile and
// recomputes the headline metrics from stored verdicts. Questions
// without a verdict (evaluation-incomplete) count toward coverage but
// not metrics.
std::vector<SweepRow> threshold_sweep(const std::vector<FilterScores>& scores,
                                      const std::map<std::string, QuestionVerdict>& verdicts,
                                      const std::vector<int>& percentiles, SweepFamily family,
                                      const std::optional<double>& cosine_upper_cap);

std::string sweep_csv(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct IpReport {
  std::string dataset_id;
  std::string model_id;
  ContingencyTable table;
  std::optional<double> ip;   // rounded to 3 decimals
  std::string ip_exact;       // reduced fraction, e.g. "124/993"
  std::optional<std::string> ip_note;  // set when IP is undefined
  ThresholdPolicy policy;
  FilterThresholds thresholds;
  size_t n_excluded_incomplete = 0;
  PositionalBias positional_bias;
  std::string generated_at;  // ISO-8601 UTC
};

IpReport make_ip_report(std::string dataset_id, std::string model_id,
                        const std::vector<QuestionVerdict>& verdicts,
                        const ThresholdPolicy& policy, const FilterThresholds& thresholds,
                        size_t n_excluded_incomplete, PositionalBias bias,
                        std::string generated_at);

nlohmann::json report_to_json(const IpReport& report);

double round3(double x);

}  // namespace ipeval
