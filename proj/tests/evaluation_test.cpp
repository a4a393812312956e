#include <algorithm>
#include <random>

#include "crowdpaste/error.hpp"
#include "crowdpaste/evaluation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crowdpaste;

namespace {

std::vector<BoundingBox> random_boxes(std::mt19937& gen, int max_count) {
  std::uniform_int_distribution<int> count(0, max_count);
  std::uniform_int_distribution<int> pos(0, 40);
  std::uniform_int_distribution<int> side(4, 20);
  std::vector<BoundingBox> out(count(gen));
  for (auto& b : out) b = {pos(gen), pos(gen), side(gen), side(gen)};
  return out;
}

// Truth boxes plus jittered copies, so matches are common.
std::pair<std::vector<BoundingBox>, std::vector<BoundingBox>> clustered_case(
    std::mt19937& gen) {
  auto truths = random_boxes(gen, 6);
  std::vector<BoundingBox> preds;
  std::uniform_int_distribution<int> shift(-4, 4);
  std::bernoulli_distribution keep(0.8);
  for (const auto& t : truths) {
    if (keep(gen)) {
      preds.push_back({t.x_min + shift(gen), t.y_min + shift(gen),
                       std::max(1, t.width + shift(gen)),
                       std::max(1, t.height + shift(gen))});
    }
  }
  for (const auto& b : random_boxes(gen, 2)) {
    if (preds.size() < 6) preds.push_back(b);
  }
  std::shuffle(preds.begin(), preds.end(), gen);
  return {preds, truths};
}

std::vector<double> matched_ious(const MatchReport& r) {
  std::vector<double> v;
  for (const auto& m : r.matches) v.push_back(m.iou);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("identical boxes match with iou 1") {
  const std::vector<BoundingBox> b{{10, 10, 5, 5}};
  const MatchReport r = match_boxes(b, b);
  REQUIRE(r.matches.size() == 1);
  CHECK(r.matches[0].iou == 1.0);
  CHECK(r.unmatched_predictions.empty());
  CHECK(r.unmatched_truths.empty());
}

TEST_CASE("empty predictions leave every truth unmatched") {
  const std::vector<BoundingBox> truths{{0, 0, 5, 5}, {10, 10, 5, 5}};
  const MatchReport r = match_boxes({}, truths);
  CHECK(r.matches.empty());
  CHECK(r.unmatched_truths == std::vector<int>{0, 1});
  CHECK(r.truth_count == 2);
  CHECK(r.prediction_count == 0);
}

TEST_CASE("greedy takes the highest iou first") {
  // pred 0 overlaps truth 0 weakly and truth 1 strongly.
  const std::vector<BoundingBox> preds{{0, 0, 10, 10}, {1, 0, 10, 10}};
  const std::vector<BoundingBox> truths{{0, 0, 10, 10}, {1, 0, 10, 10}};
  const MatchReport r = match_boxes(preds, truths);
  REQUIRE(r.matches.size() == 2);
  for (const auto& m : r.matches) CHECK(m.prediction == m.truth);
}

TEST_CASE("ties resolve by lower prediction then lower truth index") {
  const std::vector<BoundingBox> same{{0, 0, 4, 4}, {0, 0, 4, 4}};
  const MatchReport r = match_boxes(same, same);
  REQUIRE(r.matches.size() == 2);
  CHECK(r.matches[0] == Match{0, 0, 1.0});
  CHECK(r.matches[1] == Match{1, 1, 1.0});
}

TEST_CASE("threshold validation") {
  const std::vector<BoundingBox> b{{0, 0, 1, 1}};
  CHECK_THROWS_AS(match_boxes(b, b, 0.0), ConfigError);
  CHECK_THROWS_AS(match_boxes(b, b, 1.5), ConfigError);
  CHECK_NOTHROW(match_boxes(b, b, 1.0));
}

TEST_CASE("greedy matching against the exhaustive oracle") {
  std::mt19937 gen(2024);
  int equal = 0;
  const int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    auto [preds, truths] = clustered_case(gen);
    const MatchReport r = match_boxes(preds, truths, 0.5);
    const int best = testing::max_matching(preds, truths, 0.5);
    const int got = static_cast<int>(r.matches.size());
    CHECK(got <= best);
    equal += got == best;
    for (const auto& m : r.matches) CHECK(m.iou >= 0.5);
    CHECK(r.matches.size() + r.unmatched_predictions.size() == preds.size());
    CHECK(r.matches.size() + r.unmatched_truths.size() == truths.size());
  }
  CHECK(equal >= kCases * 95 / 100);
}

TEST_CASE("matched iou multiset is invariant under permutation") {
  std::mt19937 gen(7);
  for (int i = 0; i < 300; ++i) {
    auto [preds, truths] = clustered_case(gen);
    const auto base = matched_ious(match_boxes(preds, truths));
    std::shuffle(preds.begin(), preds.end(), gen);
    std::shuffle(truths.begin(), truths.end(), gen);
    const auto permuted = matched_ious(match_boxes(preds, truths));
    REQUIRE(base.size() == permuted.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(base[k] == doctest::Approx(permuted[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("histogram puts iou 1.0 in the last bin") {
  const std::vector<BoundingBox> b{{0, 0, 4, 4}, {10, 10, 4, 4}};
  const std::vector<MatchReport> reports{match_boxes(b, b)};
  const auto h = iou_histogram(reports, 0.1);
  REQUIRE(h.size() == 10);
  CHECK(h.back().count == 2);
  CHECK(h.back().lower == doctest::Approx(0.9));
  for (std::size_t i = 0; i + 1 < h.size(); ++i) CHECK(h[i].count == 0);
}

TEST_CASE("histogram counts partition the matches") {
  std::mt19937 gen(11);
  std::vector<MatchReport> reports;
  std::size_t total = 0;
  for (int i = 0; i < 200; ++i) {
    auto [preds, truths] = clustered_case(gen);
    reports.push_back(match_boxes(preds, truths, 0.3));
    total += reports.back().matches.size();
  }
  for (double width : {0.1, 0.25, 0.05, 0.3}) {
    const auto h = iou_histogram(reports, width);
    std::size_t sum = 0;
    for (const auto& bin : h) sum += bin.count;
    CHECK(sum == total);
    // Edge check: a value exactly on an interior edge goes to the upper bin.
    for (const auto& r : reports) {
      for (const auto& m : r.matches) {
        bool found = false;
        for (std::size_t k = 0; k < h.size(); ++k) {
          const double hi = k + 1 < h.size() ? h[k + 1].lower : 1.0 + 1e-9;
          found |= m.iou >= h[k].lower - 1e-9 && m.iou < hi + 1e-9;
        }
        CHECK(found);
      }
    }
  }
  CHECK_THROWS_AS(iou_histogram(reports, 0.0), ConfigError);
}

TEST_CASE("count summary means and ratio") {
  std::vector<ImageCount> preds, truths;
  for (int i = 0; i < 4; ++i) {
    const std::string id = "img" + std::to_string(i);
    preds.push_back({id, 5});
    truths.push_back({id, 10});
  }
  const CountSummary s = count_summary(preds, truths);
  CHECK(s.mean_predicted == doctest::Approx(5.0));
  CHECK(s.mean_truth == doctest::Approx(10.0));
  REQUIRE(s.ratio.has_value());
  CHECK(*s.ratio == doctest::Approx(0.5));

  const std::vector<ImageCount> p2{{"b", 4}, {"a", 2}};
  const std::vector<ImageCount> t2{{"a", 4}, {"b", 4}};
  const CountSummary s2 = count_summary(p2, t2);
  CHECK(s2.mean_predicted == doctest::Approx(3.0));
  CHECK(s2.mean_truth == doctest::Approx(4.0));
  CHECK(*s2.ratio == doctest::Approx(0.75));
  CHECK(s2.per_image.front().image_id == "a");
}

TEST_CASE("count summary with zero truths leaves the ratio unset") {
  const std::vector<ImageCount> p{{"a", 3}};
  const std::vector<ImageCount> t{{"a", 0}};
  CHECK_FALSE(count_summary(p, t).ratio.has_value());
}

TEST_CASE("count summary names mismatched ids") {
  const std::vector<ImageCount> p{{"a", 1}, {"shared", 1}};
  const std::vector<ImageCount> t{{"b", 1}, {"shared", 1}};
  try {
    count_summary(p, t);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
    CHECK(msg.find("shared") == std::string::npos);
  }
  const std::vector<ImageCount> dup{{"a", 1}, {"a", 2}};
  CHECK_THROWS_AS(count_summary(dup, dup), DataError);
}
