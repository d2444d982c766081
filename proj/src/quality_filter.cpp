#include "ipeval/quality_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ipeval/jsonl.hpp"
#include "ipeval/text.hpp"

namespace ipeval {

TokenSet token_set(std::string_view text) {
  auto tokens = metric_tokens(text);
  return TokenSet(tokens.begin(), tokens.end());
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  size_t intersection = 0;
  for (const std::string& t : a) {
    if (b.count(t) > 0) ++intersection;
  }
  size_t unions = a.size() + b.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(unions);
}

double rouge_l(const std::vector<std::string>& reference,
               const std::vector<std::string>& candidate) {
  if (reference.empty() && candidate.empty()) return 1.0;
  if (reference.empty() || candidate.empty()) return 0.0;

  // two-row LCS table
  std::vector<size_t> prev(candidate.size() + 1, 0), cur(candidate.size() + 1, 0);
  for (size_t i = 1; i <= reference.size(); ++i) {
    for (size_t j = 1; j <= candidate.size(); ++j) {
      if (reference[i - 1] == candidate[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  size_t lcs = prev[candidate.size()];
  if (lcs == 0) return 0.0;
  double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  double recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::pair<double, double> score_alignment(const std::string& chunk_text, const Mcq& m) {
  TokenSet chunk_set = token_set(chunk_text);
  auto chunk_seq = metric_tokens(chunk_text);

  TokenSet correct_set = token_set(m.options[m.correct_index]);
  auto correct_seq = metric_tokens(m.options[m.correct_index]);
  double j_correct = jaccard(chunk_set, correct_set);
  double r_correct = rouge_l(chunk_seq, correct_seq);

  double j_margin = 2.0, r_margin = 2.0;
  for (int i = 0; i < 4; ++i) {
    if (i == m.correct_index) continue;
    double j = j_correct - jaccard(chunk_set, token_set(m.options[i]));
    double r = r_correct - rouge_l(chunk_seq, metric_tokens(m.options[i]));
    j_margin = std::min(j_margin, j);
    r_margin = std::min(r_margin, r);
  }
  return {j_margin, r_margin};
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine of vectors with different dimensions");
  }
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw std::domain_error("cosine of zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double score_plausibility(const Mcq& m, const EmbedFn& embed) {
  std::vector<std::string> texts(m.options.begin(), m.options.end());
  auto vectors = embed(texts);
  if (vectors.size() != 4) {
    throw std::runtime_error("embedder returned " + std::to_string(vectors.size()) +
                             " vectors for 4 options");
  }
  for (int i = 0; i < 4; ++i) {
    double norm = 0;
    for (double v : vectors[i]) norm += v * v;
    if (norm == 0) {
      throw std::runtime_error("zero-norm embedding for option " +
                               std::string(1, static_cast<char>('A' + i)) + " of " + m.mcq_id);
    }
  }
  double best = -1.0;
  for (int i = 0; i < 4; ++i) {
    if (i == m.correct_index) continue;
    best = std::max(best, cosine_similarity(vectors[m.correct_index], vectors[i]));
  }
  return best;
}

double nearest_rank_percentile(std::vector<double> pool, int p) {
  if (pool.empty()) throw std::invalid_argument("percentile of an empty pool");
  if (p < 0 || p > 100) throw std::invalid_argument("percentile outside 0..100");
  std::sort(pool.begin(), pool.end());
  if (p == 0) return pool.front();
  size_t n = pool.size();
  size_t rank = (static_cast<size_t>(p) * n + 99) / 100;  // ceil(p*n/100), 1-based
  return pool[rank - 1];
}

FilterOutcome apply_filter(const std::vector<FilterScores>& scores,
                           const ThresholdPolicy& policy) {
  if (scores.empty()) throw std::invalid_argument("filter over an empty pool");
  if (policy.cosine_upper_cap.has_value() &&
      (*policy.cosine_upper_cap <= 0 || *policy.cosine_upper_cap > 1)) {
    throw std::invalid_argument("cosine_upper_cap outside (0,1]");
  }

  std::vector<double> j_pool, r_pool, c_pool;
  j_pool.reserve(scores.size());
  r_pool.reserve(scores.size());
  c_pool.reserve(scores.size());
  for (const FilterScores& s : scores) {
    j_pool.push_back(s.jaccard_margin);
    r_pool.push_back(s.rouge_margin);
    c_pool.push_back(s.cosine_plausibility);
  }

  FilterOutcome out;
  out.thresholds.jaccard = nearest_rank_percentile(j_pool, policy.jaccard_percentile);
  out.thresholds.rouge = nearest_rank_percentile(r_pool, policy.rouge_percentile);
  out.thresholds.cosine = nearest_rank_percentile(c_pool, policy.cosine_percentile);

  for (const FilterScores& s : scores) {
    FilterDecision d;
    d.mcq_id = s.mcq_id;
    if (s.jaccard_margin < out.thresholds.jaccard) d.reasons.push_back("jaccard_margin");
    if (s.rouge_margin < out.thresholds.rouge) d.reasons.push_back("rouge_margin");
    if (s.cosine_plausibility < out.thresholds.cosine) {
      d.reasons.push_back("cosine_plausibility");
    }
    if (policy.cosine_upper_cap.has_value() &&
        s.cosine_plausibility >= *policy.cosine_upper_cap) {
      d.reasons.push_back("cosine_upper_cap");
    }
    d.kept = d.reasons.empty();
    if (d.kept) out.kept.push_back(s.mcq_id);
    out.decisions.push_back(std::move(d));
  }
  return out;
}

void write_filter_scores(const std::filesystem::path& path,
                         const std::vector<FilterScores>& scores) {
  std::vector<nlohmann::json> rows;
  rows.reserve(scores.size());
  for (const FilterScores& s : scores) {
    rows.push_back({{"schema", "filter_scores.v1"},
                    {"mcq_id", s.mcq_id},
                    {"jaccard_margin", s.jaccard_margin},
                    {"rouge_margin", s.rouge_margin},
                    {"cosine_plausibility", s.cosine_plausibility}});
  }
  write_jsonl(path, rows);
}

std::vector<FilterScores> read_filter_scores(const std::filesystem::path& path) {
  std::vector<FilterScores> scores;
  for (const nlohmann::json& row : read_jsonl(path)) {
    FilterScores s;
    s.mcq_id = row.at("mcq_id").get<std::string>();
    s.jaccard_margin = row.at("jaccard_margin").get<double>();
    s.rouge_margin = row.at("rouge_margin").get<double>();
    s.cosine_plausibility = row.at("cosine_plausibility").get<double>();
    scores.push_back(std::move(s));
  }
  return scores;
}

void write_filter_decisions(const std::filesystem::path& path, const FilterOutcome& outcome) {
  std::vector<nlohmann::json> rows;
  rows.reserve(outcome.decisions.size());
  for (const FilterDecision& d : outcome.decisions) {
    rows.push_back({{"schema", "filter_decision.v1"},
                    {"mcq_id", d.mcq_id},
                    {"kept", d.kept},
                    {"reasons", d.reasons}});
  }
  write_jsonl(path, rows);
}

}  // namespace ipeval
