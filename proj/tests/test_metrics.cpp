#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "segdst/metrics.hpp"

using namespace segdst;

namespace {

// Independent exhaustive-window oracles, deliberately written in a different
// style from the library (explicit segment-id arrays and boolean boundary
// vectors).
std::vector<int> segment_ids(const BoundarySet& b) {
  std::vector<int> ids(static_cast<size_t>(b.length) + 1, 0);
  int current = 0;
  for (int i = 1; i <= b.length; ++i) {
    ids[static_cast<size_t>(i)] = current;
    if (b.indices.count(i)) ++current;
  }
  return ids;
}

double oracle_pk(const BoundarySet& ref, const BoundarySet& hyp, int k) {
  auto ref_ids = segment_ids(ref);
  auto hyp_ids = segment_ids(hyp);
  int windows = 0;
  int errors = 0;
  for (int i = 1; i + k <= ref.length; ++i) {
    ++windows;
    bool ref_same = ref_ids[static_cast<size_t>(i)] ==
                    ref_ids[static_cast<size_t>(i + k)];
    bool hyp_same = hyp_ids[static_cast<size_t>(i)] ==
                    hyp_ids[static_cast<size_t>(i + k)];
    if (ref_same != hyp_same) ++errors;
  }
  return windows == 0 ? 0.0 : static_cast<double>(errors) / windows;
}

double oracle_window_diff(const BoundarySet& ref, const BoundarySet& hyp,
                          int k) {
  int windows = 0;
  int errors = 0;
  for (int i = 1; i + k <= ref.length; ++i) {
    ++windows;
    int ref_count = 0;
    int hyp_count = 0;
    for (int j = i; j <= i + k - 1; ++j) {
      if (ref.indices.count(j)) ++ref_count;
      if (hyp.indices.count(j)) ++hyp_count;
    }
    if (ref_count != hyp_count) ++errors;
  }
  return windows == 0 ? 0.0 : static_cast<double>(errors) / windows;
}

BoundarySet random_boundaries(int length, std::mt19937_64& rng) {
  BoundarySet b;
  b.length = length;
  for (int i = 1; i < length; ++i) {
    if (rng() % 3 == 0) b.indices.insert(i);
  }
  return b;
}

}  // namespace

TEST_CASE("worked segmentation examples reproduce exactly") {
  BoundarySet ref{6, {2, 4}};
  BoundarySet hyp{6, {3}};
  CHECK(pk(ref, hyp, 1) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(window_diff(ref, hyp, 1) == doctest::Approx(0.6).epsilon(1e-9));

  BoundarySet ref2{4, {2}};
  BoundarySet hyp2{4, {}};
  CHECK(pk(ref2, hyp2, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("identical segmentations score zero error") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    auto b = random_boundaries(2 + static_cast<int>(rng() % 20), rng);
    for (int k = 1; k < b.length; ++k) {
      CHECK(pk(b, b, k) == 0.0);
      CHECK(window_diff(b, b, k) == 0.0);
    }
  }
}

TEST_CASE("pk and window_diff match the exhaustive oracle") {
  std::mt19937_64 rng(20230901);
  for (int round = 0; round < 200; ++round) {
    int n = 2 + static_cast<int>(rng() % 29);
    auto ref = random_boundaries(n, rng);
    auto hyp = random_boundaries(n, rng);
    for (int k = 1; k < n; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(pk(ref, hyp, k) == oracle_pk(ref, hyp, k));
      CHECK(window_diff(ref, hyp, k) == oracle_window_diff(ref, hyp, k));
    }
  }
}

TEST_CASE("default window size is half the mean reference segment length") {
  // lengths {2, 4} -> mean 3 -> k = round(1.5) = 2
  CHECK(default_window_size(BoundarySet{6, {2}}) == 2);
  // lengths {3, 5} -> mean 4 -> k = 2
  CHECK(default_window_size(BoundarySet{8, {3}}) == 2);
  // single 2-unit segment -> k = max(1, round(1)) = 1
  CHECK(default_window_size(BoundarySet{2, {}}) == 1);
  // one long segment: k = round(10/2) = 5
  CHECK(default_window_size(BoundarySet{10, {}}) == 5);
  // k never reaches the unit count
  CHECK(default_window_size(BoundarySet{3, {}}) == 2);
  CHECK_THROWS_AS(default_window_size(BoundarySet{1, {}}), Error);
}

TEST_CASE("window size defaults apply when k is omitted") {
  BoundarySet ref{6, {2, 4}};
  BoundarySet hyp{6, {3}};
  int k = default_window_size(ref);
  CHECK(pk(ref, hyp) == pk(ref, hyp, k));
  CHECK(window_diff(ref, hyp) == window_diff(ref, hyp, k));
}

TEST_CASE("metrics validate their inputs") {
  BoundarySet ref{6, {2}};
  BoundarySet hyp{5, {2}};
  CHECK_THROWS_AS(pk(ref, hyp, 1), Error);
  CHECK_THROWS_AS(window_diff(ref, hyp, 1), Error);
  BoundarySet ok{6, {3}};
  CHECK_THROWS_AS(pk(ref, ok, 0), Error);
  CHECK_THROWS_AS(pk(ref, ok, 6), Error);
}

TEST_CASE("fleiss kappa matches the hand-computed fixture") {
  // 2 items, 3 raters; counts per category: (2,1) and (3,0).
  double kappa = fleiss_kappa({{2, 1}, {3, 0}}, 3);
  CHECK(kappa == doctest::Approx(-0.2).epsilon(1e-9));
}

TEST_CASE("fleiss kappa is 1 for unanimous raters") {
  CHECK(fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}, 3) == doctest::Approx(1.0));
  // All ratings in one category: chance agreement is 1, defined as kappa 1.
  CHECK(fleiss_kappa({{3, 0}, {3, 0}}, 3) == 1.0);
}

TEST_CASE("fleiss kappa rejects malformed count matrices") {
  CHECK_THROWS_AS(fleiss_kappa({{2, 2}}, 3), Error);
  CHECK_THROWS_AS(fleiss_kappa({}, 3), Error);
  CHECK_THROWS_AS(fleiss_kappa({{1, 0}}, 1), Error);
}

TEST_CASE("joint goal accuracy counts exact full-state matches") {
  std::vector<ScoredTurn> golds = {
      {"c1", 1, false, {{"intent", "A"}, {"domain", "X"}}},
      {"c1", 2, false, {{"intent", "B"}, {"domain", "Y"}}},
      {"c2", 1, false, {{"intent", "A"}, {"domain", "X"}}},
  };
  std::vector<ScoredTurn> preds = golds;
  preds[1].values["domain"] = "Z";
  CHECK(joint_goal_accuracy(preds, golds) == doctest::Approx(2.0 / 3.0));

  preds = golds;
  preds[2].parse_failed = true;
  CHECK(joint_goal_accuracy(preds, golds) == doctest::Approx(2.0 / 3.0));
  CHECK(joint_goal_accuracy(golds, golds) == 1.0);
}

TEST_CASE("joint goal accuracy requires aligned turn sets") {
  std::vector<ScoredTurn> golds = {{"c1", 1, false, {}}};
  std::vector<ScoredTurn> preds = {{"c1", 2, false, {}}};
  CHECK_THROWS_AS(joint_goal_accuracy(preds, golds), Error);
}

TEST_CASE("jga never increases when more slots must match") {
  // Adding a slot to the comparison can only break matches, never make them.
  std::mt19937_64 rng(77);
  const std::vector<std::string> labels = {"p", "q", "r"};
  for (int round = 0; round < 50; ++round) {
    int n = 1 + static_cast<int>(rng() % 10);
    std::vector<ScoredTurn> golds, narrow, wide;
    for (int i = 0; i < n; ++i) {
      ScoredTurn gold{"c", i + 1, false, {}};
      ScoredTurn pred = gold;
      gold.values["a"] = labels[rng() % 3];
      pred.values["a"] = labels[rng() % 3];
      golds.push_back(gold);
      narrow.push_back(pred);
      gold.values["b"] = labels[rng() % 3];
      pred.values["b"] = labels[rng() % 3];
      wide.push_back(pred);
    }
    std::vector<ScoredTurn> wide_golds = golds;
    // narrow comparison: only slot "a" in golds
    std::vector<ScoredTurn> narrow_golds;
    for (auto g : golds) {
      g.values.erase("b");
      narrow_golds.push_back(g);
    }
    double narrow_jga = joint_goal_accuracy(narrow, narrow_golds);
    double wide_jga = joint_goal_accuracy(wide, wide_golds);
    CHECK(wide_jga <= narrow_jga + 1e-12);
  }
}

TEST_CASE("per-label accuracy looks at one label kind") {
  std::vector<ScoredTurn> golds = {
      {"c1", 1, false, {{"segment", "NO"}, {"intent", "A"}}},
      {"c1", 2, false, {{"segment", "YES"}, {"intent", "A"}}},
      {"c1", 3, false, {{"segment", "YES"}, {"intent", "B"}}},
      {"c1", 4, false, {{"segment", "NO"}, {"intent", "B"}}},
  };
  auto preds = golds;
  preds[2].values["segment"] = "NO";
  CHECK(per_label_accuracy(preds, golds, "segment") == doctest::Approx(0.75));
  CHECK(per_label_accuracy(preds, golds, "intent") == 1.0);
}
