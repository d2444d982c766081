#include "ipeval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ipeval/util.hpp"

namespace ipeval {

ContingencyTable tabulate(const std::vector<QuestionVerdict>& verdicts) {
  ContingencyTable t;
  std::set<std::string> seen;
  for (const QuestionVerdict& v : verdicts) {
    if (!seen.insert(v.mcq_id).second) {
      throw std::invalid_argument("duplicate verdict for " + v.mcq_id);
    }
    ++t.n_total;
    if (v.direct_4x && v.context_4x) {
      ++t.both_correct;
    } else if (v.context_4x) {
      ++t.context_only;
    } else if (v.direct_4x) {
      ++t.direct_only;
    } else {
      ++t.both_incorrect;
    }
  }
  return t;
}

double information_potential(const ContingencyTable& t) {
  if (t.n_total == t.both_incorrect) {
    throw std::domain_error("IP undefined: no question answered in either condition");
  }
  double numerator =
      static_cast<double>(t.context_only) - static_cast<double>(t.direct_only);
  return numerator / static_cast<double>(t.n_total - t.both_incorrect);
}

double LetterHistogram::fraction(int letter_index) const {
  size_t n = total();
  if (n == 0) return 0.0;
  return static_cast<double>(counts[static_cast<size_t>(letter_index)]) /
         static_cast<double>(n);
}

PositionalBias positional_bias_stats(const std::vector<Mcq>& mcqs,
                                     const std::vector<RotationRecord>& records) {
  PositionalBias bias;
  for (const Mcq& m : mcqs) {
    if (m.gen_letter >= 'A' && m.gen_letter <= 'D') {
      ++bias.generation.counts[static_cast<size_t>(m.gen_letter - 'A')];
    }
  }
  for (const RotationRecord& r : records) {
    ++bias.asked.counts[static_cast<size_t>(r.asked_letter_of_correct - 'A')];
    LetterHistogram& answered = r.condition == Condition::direct ? bias.answered_direct
                                                                 : bias.answered_context;
    if (r.answered_letter.has_value()) {
      ++answered.counts[static_cast<size_t>(*r.answered_letter - 'A')];
    } else if (r.condition == Condition::direct) {
      ++bias.unparsed_direct;
    } else {
      ++bias.unparsed_context;
    }
  }
  return bias;
}

const char* sweep_family_name(SweepFamily f) {
  switch (f) {
    case SweepFamily::cosine_only:
      return "cosine_only";
    case SweepFamily::surface_only:
      return "surface_only";
    case SweepFamily::joint:
      return "joint";
  }
  return "joint";
}

ThresholdPolicy sweep_policy(SweepFamily family, int percentile,
                             const std::optional<double>& cosine_upper_cap) {
  ThresholdPolicy policy;
  policy.cosine_upper_cap = cosine_upper_cap;
  switch (family) {
    case SweepFamily::cosine_only:
      policy.cosine_percentile = percentile;
      break;
    case SweepFamily::surface_only:
      policy.jaccard_percentile = percentile;
      policy.rouge_percentile = percentile;
      break;
    case SweepFamily::joint:
      policy.jaccard_percentile = percentile;
      policy.rouge_percentile = percentile;
      policy.cosine_percentile = percentile;
      break;
  }
  return policy;
}

std::vector<SweepRow> threshold_sweep(const std::vector<FilterScores>& scores,
                                      const std::map<std::string, QuestionVerdict>& verdicts,
                                      const std::vector<int>& percentiles, SweepFamily family,
                                      const std::optional<double>& cosine_upper_cap) {
  if (scores.empty()) throw std::invalid_argument("sweep over an empty pool");
  std::vector<SweepRow> rows;
  rows.reserve(percentiles.size());
  for (int p : percentiles) {
    SweepRow row;
    row.family = family;
    row.percentile = p;
    FilterOutcome outcome = apply_filter(scores, sweep_policy(family, p, cosine_upper_cap));
    row.n_kept = outcome.kept.size();
    row.fraction_remaining =
        static_cast<double>(row.n_kept) / static_cast<double>(scores.size());

    std::vector<QuestionVerdict> kept_verdicts;
    kept_verdicts.reserve(outcome.kept.size());
    for (const std::string& id : outcome.kept) {
      auto hit = verdicts.find(id);
      if (hit != verdicts.end()) kept_verdicts.push_back(hit->second);
    }
    row.n_scored = kept_verdicts.size();
    if (kept_verdicts.empty()) {
      row.note = "empty subset";
      rows.push_back(std::move(row));
      continue;
    }
    ContingencyTable t = tabulate(kept_verdicts);
    row.direct_4x_accuracy =
        static_cast<double>(t.c_direct()) / static_cast<double>(t.n_total);
    row.context_4x_accuracy =
        static_cast<double>(t.c_context()) / static_cast<double>(t.n_total);
    if (t.n_total > t.both_incorrect) {
      row.ip = information_potential(t);
    } else {
      row.note = "IP undefined: all kept questions missed in both conditions";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string format_fixed(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", x);
  return buffer;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "family,percentile,n_kept,fraction_remaining,n_scored,direct_4x,context_4x,ip,note\n";
  for (const SweepRow& row : rows) {
    out += sweep_family_name(row.family);
    out += ',' + std::to_string(row.percentile);
    out += ',' + std::to_string(row.n_kept);
    out += ',' + format_fixed(row.fraction_remaining);
    out += ',' + std::to_string(row.n_scored);
    out += ',';
    if (row.direct_4x_accuracy) out += format_fixed(*row.direct_4x_accuracy);
    out += ',';
    if (row.context_4x_accuracy) out += format_fixed(*row.context_4x_accuracy);
    out += ',';
    if (row.ip) out += format_fixed(*row.ip);
    out += ',' + row.note;
    out += '\n';
  }
  return out;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  atomic_write_file(path, sweep_csv(rows));
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

IpReport make_ip_report(std::string dataset_id, std::string model_id,
                        const std::vector<QuestionVerdict>& verdicts,
                        const ThresholdPolicy& policy, const FilterThresholds& thresholds,
                        size_t n_excluded_incomplete, PositionalBias bias,
                        std::string generated_at) {
  IpReport report;
  report.dataset_id = std::move(dataset_id);
  report.model_id = std::move(model_id);
  report.table = tabulate(verdicts);
  report.policy = policy;
  report.thresholds = thresholds;
  report.n_excluded_incomplete = n_excluded_incomplete;
  report.positional_bias = std::move(bias);
  report.generated_at = std::move(generated_at);

  const ContingencyTable& t = report.table;
  if (t.n_total > t.both_incorrect) {
    report.ip = round3(information_potential(t));
    long long numerator =
        static_cast<long long>(t.context_only) - static_cast<long long>(t.direct_only);
    long long denominator = static_cast<long long>(t.n_total - t.both_incorrect);
    long long divisor = std::gcd(std::llabs(numerator), denominator);
    if (divisor == 0) divisor = 1;
    report.ip_exact = std::to_string(numerator / divisor) + "/" +
                      std::to_string(denominator / divisor);
  } else {
    report.ip_note = t.n_total == 0 ? "no questions evaluated"
                                    : "all questions missed in both conditions";
  }
  return report;
}

namespace {

nlohmann::json histogram_json(const LetterHistogram& h) {
  nlohmann::json counts, fractions;
  for (int i = 0; i < 4; ++i) {
    std::string letter(1, static_cast<char>('A' + i));
    counts[letter] = h.counts[static_cast<size_t>(i)];
    fractions[letter] = h.fraction(i);
  }
  return {{"counts", counts}, {"fractions", fractions}};
}

}  // namespace

nlohmann::json report_to_json(const IpReport& report) {
  const ContingencyTable& t = report.table;
  nlohmann::json j;
  j["schema"] = "ip_report.v1";
  j["dataset_id"] = report.dataset_id;
  j["model_id"] = report.model_id;
  j["counts"] = {{"n_total", t.n_total},
                 {"both_correct", t.both_correct},
                 {"context_only", t.context_only},
                 {"direct_only", t.direct_only},
                 {"both_incorrect", t.both_incorrect},
                 {"c_context", t.c_context()},
                 {"c_direct", t.c_direct()}};
  nlohmann::json fractions;
  if (t.n_total > 0) {
    auto frac = [&](size_t count) {
      return static_cast<double>(count) / static_cast<double>(t.n_total);
    };
    fractions = {{"both_correct", frac(t.both_correct)},
                 {"context_only", frac(t.context_only)},
                 {"direct_only", frac(t.direct_only)},
                 {"both_incorrect", frac(t.both_incorrect)},
                 {"direct_4x_accuracy", frac(t.c_direct())},
                 {"context_4x_accuracy", frac(t.c_context())}};
  }
  j["fractions"] = fractions;
  j["ip"] = report.ip.has_value() ? nlohmann::json(*report.ip) : nlohmann::json();
  j["ip_exact"] = report.ip_exact;
  if (report.ip_note) j["ip_note"] = *report.ip_note;
  j["policy"] = {{"jaccard_percentile", report.policy.jaccard_percentile},
                 {"rouge_percentile", report.policy.rouge_percentile},
                 {"cosine_percentile", report.policy.cosine_percentile}};
  j["policy"]["cosine_upper_cap"] = report.policy.cosine_upper_cap.has_value()
                                        ? nlohmann::json(*report.policy.cosine_upper_cap)
                                        : nlohmann::json();
  j["thresholds"] = {{"jaccard", report.thresholds.jaccard},
                     {"rouge", report.thresholds.rouge},
                     {"cosine", report.thresholds.cosine}};
  j["n_excluded_incomplete"] = report.n_excluded_incomplete;
  j["positional_bias"] = {
      {"generation", histogram_json(report.positional_bias.generation)},
      {"asked", histogram_json(report.positional_bias.asked)},
      {"answered_direct", histogram_json(report.positional_bias.answered_direct)},
      {"answered_context", histogram_json(report.positional_bias.answered_context)},
      {"unparsed", {{"direct", report.positional_bias.unparsed_direct},
                    {"context", report.positional_bias.unparsed_context}}}};
  j["generated_at"] = report.generated_at;
  return j;
}

}  // namespace ipeval
