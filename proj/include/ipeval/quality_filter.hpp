#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipeval/mcq.hpp"

namespace ipeval {

// Unique lowercase word tokens, for Jaccard.
using TokenSet = std::set<std::string>;

TokenSet token_set(std::string_view text);

// |a ∩ b| / |a ∪ b|. Both empty → 1, exactly one empty → 0.
double jaccard(const TokenSet& a, const TokenSet& b);

// LCS-based F1. With L the longest-common-subsequence length,
// P = L/|candidate|, R = L/|reference|, F1 = 2PR/(P+R); 0 when L = 0,
// 1 when both sequences are empty.
double rouge_l(const std::vector<std::string>& reference,
               const std::vector<std::string>& candidate);

struct FilterScores {
  std::string mcq_id;
  double jaccard_margin = 0;      // min_i J(c,g) - J(c,d_i)
  double rouge_margin = 0;        // min_i R(c,g) - R(c,d_i)
  double cosine_plausibility = 0; // max_i cos(g, d_i)
};

struct ThresholdPolicy {
  int jaccard_percentile = 0;
  int rouge_percentile = 0;
  int cosine_percentile = 0;
  // excludes near-paraphrase distractors when set; in (0,1]
  std::optional<double> cosine_upper_cap;
};

// Alignment margins of the correct option over the distractors against
// the source chunk, one per surface metric.
std::pair<double, double> score_alignment(const std::string& chunk_text, const Mcq& m);

// Embeds the four options and returns the max cosine between the
// correct option and each distractor. The embed function receives all
// texts at once and returns one vector per text, in order.
using EmbedFn =
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;
double score_plausibility(const Mcq& m, const EmbedFn& embed);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Nearest-rank: sort ascending, take the value at rank ceil(p/100 * n)
// (1-based); p=0 returns the minimum. Throws on an empty pool.
double nearest_rank_percentile(std::vector<double> pool, int p);

struct FilterThresholds {
  double jaccard = 0;
  double rouge = 0;
  double cosine = 0;
};

struct FilterDecision {
  std::string mcq_id;
  bool kept = false;
  std::vector<std::string> reasons;  // empty when kept
};

struct FilterOutcome {
  std::vector<std::string> kept;  // mcq_ids, input order
  std::vector<FilterDecision> decisions;
  FilterThresholds thresholds;
};

/// Two-phase: thresholds are pool percentiles over all scored items,
// then an item is kept iff every metric clears its threshold (and the
// cosine stays under the cap when one is set).
FilterOutcome apply_filter(const std::vector<FilterScores>& scores,
                           const ThresholdPolicy& policy);

void write_filter_scores(const std::filesystem::path& path,
                         const std::vector<FilterScores>& scores);
std::vector<FilterScores> read_filter_scores(const std::filesystem::path& path);

void write_filter_decisions(const std::filesystem::path& path, const FilterOutcome& outcome);

}  // namespace ipeval
