#include "segdst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace segdst {

namespace {

void check_alignment(const std::vector<ScoredTurn>& preds,
                     const std::vector<ScoredTurn>& golds) {
  if (preds.size() != golds.size()) {
    throw Error("metric: pred/gold turn counts differ (" +
                std::to_string(preds.size()) + " vs " +
                std::to_string(golds.size()) + ")");
  }
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].conversation_id != golds[i].conversation_id ||
        preds[i].turn_index != golds[i].turn_index) {
      throw Error("metric: pred/gold misaligned at position " +
                  std::to_string(i) + " (" + preds[i].conversation_id + "#" +
                  std::to_string(preds[i].turn_index) + " vs " +
                  golds[i].conversation_id + "#" +
                  std::to_string(golds[i].turn_index) + ")");
    }
  }
}

void check_window_args(const BoundarySet& ref, const BoundarySet& hyp, int k) {
  if (ref.length != hyp.length) {
    throw Error("segmentation metric: length mismatch");
  }
  if (ref.length < 2) {
    throw Error("segmentation metric: need at least 2 units");
  }
  if (k < 1 || k >= ref.length) {
    throw Error("segmentation metric: invalid window size " +
                std::to_string(k));
  }
}

/// True when units i and i+k lie in the same segment, i.e. no boundary index
/// in [i, i+k-1].
bool same_segment(const BoundarySet& b, int i, int k) {
  auto it = b.indices.lower_bound(i);
  return it == b.indices.end() || *it > i + k - 1;
}

int boundaries_in_window(const BoundarySet& b, int i, int k) {
  auto lo = b.indices.lower_bound(i);
  auto hi = b.indices.upper_bound(i + k - 1);
  return static_cast<int>(std::distance(lo, hi));
}

}  // namespace

double joint_goal_accuracy(const std::vector<ScoredTurn>& preds,
                           const std::vector<ScoredTurn>& golds) {
  check_alignment(preds, golds);
  if (preds.empty()) throw Error("metric: no turns to score");
  int matched = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i].parse_failed && preds[i].values == golds[i].values) {
      ++matched;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(preds.size());
}

double per_label_accuracy(const std::vector<ScoredTurn>& preds,
                          const std::vector<ScoredTurn>& golds,
                          const std::string& kind) {
  check_alignment(preds, golds);
  if (preds.empty()) throw Error("metric: no turns to score");
  int matched = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].parse_failed) continue;
    auto p = preds[i].values.find(kind);
    auto g = golds[i].values.find(kind);
    if (p != preds[i].values.end() && g != golds[i].values.end() &&
        p->second == g->second) {
      ++matched;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(preds.size());
}

int default_window_size(const BoundarySet& ref) {
  if (ref.length < 2) {
    throw Error("default_window_size: need at least 2 units");
  }
  // Segment count is boundary count + 1; mean length = N / segments.
  double segments = static_cast<double>(ref.indices.size()) + 1.0;
  double mean_len = static_cast<double>(ref.length) / segments;
  int k = static_cast<int>(std::floor(mean_len / 2.0 + 0.5));  // half-up
  return std::max(1, std::min(k, ref.length - 1));
}

double pk(const BoundarySet& ref, const BoundarySet& hyp,
          std::optional<int> k_opt) {
  int k = k_opt.value_or(default_window_size(ref));
  check_window_args(ref, hyp, k);
  int disagreements = 0;
  int windows = ref.length - k;
  for (int i = 1; i <= windows; ++i) {
    if (same_segment(ref, i, k) != same_segment(hyp, i, k)) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(windows);
}

double window_diff(const BoundarySet& ref, const BoundarySet& hyp,
                   std::optional<int> k_opt) {
  int k = k_opt.value_or(default_window_size(ref));
  check_window_args(ref, hyp, k);
  int disagreements = 0;
  int windows = ref.length - k;
  for (int i = 1; i <= windows; ++i) {
    if (boundaries_in_window(ref, i, k) != boundaries_in_window(hyp, i, k)) {
      ++disagreements;
    }
  }
  return static_cast<double>(disagreements) / static_cast<double>(windows);
}

double fleiss_kappa(const std::vector<std::vector<int>>& ratings,
                    int n_raters) {
  if (ratings.empty()) throw Error("fleiss_kappa: no items");
  if (n_raters < 2) throw Error("fleiss_kappa: need at least 2 raters");
  size_t categories = ratings.front().size();
  if (categories == 0) throw Error("fleiss_kappa: no categories");

  const double n_items = static_cast<double>(ratings.size());
  std::vector<double> category_totals(categories, 0.0);
  double mean_agreement = 0.0;

  for (const auto& row : ratings) {
    if (row.size() != categories) {
      throw Error("fleiss_kappa: ragged rating matrix");
    }
    int row_sum = std::accumulate(row.begin(), row.end(), 0);
    if (row_sum != n_raters) {
      throw Error("fleiss_kappa: row sum " + std::to_string(row_sum) +
                  " != n_raters " + std::to_string(n_raters));
    }
    double agreement = 0.0;
    for (size_t c = 0; c < categories; ++c) {
      agreement += static_cast<double>(row[c]) * (row[c] - 1);
      category_totals[c] += row[c];
    }
    mean_agreement += agreement / (static_cast<double>(n_raters) * (n_raters - 1));
  }
  mean_agreement /= n_items;

  double chance = 0.0;
  for (double total : category_totals) {
    double p = total / (n_items * n_raters);
    chance += p * p;
  }

  if (chance >= 1.0) return 1.0;  // degenerate: a single category everywhere
  return (mean_agreement - chance) / (1.0 - chance);
}

}  // namespace segdst
