#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segdst/types.hpp"

namespace segdst {

/// Aggregate metric results for one run. Fractions are in [0, 1]; absent
/// optionals mean the metric was not applicable to the run.
struct MetricReport {
  std::map<std::string, double> jga;                 // variant name -> fraction
  std::map<std::string, double> per_label_accuracy;  // label kind -> fraction
  std::optional<double> pk;
  std::optional<double> window_diff;
  int turns = 0;
  int conversations = 0;
  int parse_failures = 0;
};

/// A turn's state selected for joint comparison: any subset of normalized
/// slot-value pairs, keyed by (conversation id, turn index) for alignment.
struct ScoredTurn {
  std::string conversation_id;
  int turn_index = 0;
  bool parse_failed = false;  // scored as non-matching
  std::map<std::string, std::string> values;
};

/// Fraction of aligned turns whose entire selected state matches. Pred turns
/// flagged parse_failed count as non-matching. Throws Error when the pred and
/// gold turn sets are misaligned.
double joint_goal_accuracy(const std::vector<ScoredTurn>& preds,
                           const std::vector<ScoredTurn>& golds);

/// Fraction of aligned turns whose single label under `kind` matches.
double per_label_accuracy(const std::vector<ScoredTurn>& preds,
                          const std::vector<ScoredTurn>& golds,
                          const std::string& kind);

/// k = max(1, round-half-up(mean reference segment length / 2)). Requires at
/// least 2 units.
int default_window_size(const BoundarySet& ref);

/// Sliding-window segmentation error: fraction of windows where ref and hyp
/// disagree on whether units i and i+k lie in the same segment.
double pk(const BoundarySet& ref, const BoundarySet& hyp,
          std::optional<int> k = std::nullopt);

/// Sliding-window error comparing boundary counts inside each window
/// [i, i+k-1].
double window_diff(const BoundarySet& ref, const BoundarySet& hyp,
                   std::optional<int> k = std::nullopt);

/// Fleiss' kappa over an item x category count matrix; each row must sum to
/// n_raters >= 2. Returns 1.0 when chance agreement is exactly 1 (all ratings
/// in a single category).
double fleiss_kappa(const std::vector<std::vector<int>>& ratings, int n_raters);

}  // namespace segdst
