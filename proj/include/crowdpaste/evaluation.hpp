#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdpaste/annotations.hpp"

namespace crowdpaste {

struct Match {
  int prediction = 0;
  int truth = 0;
  double iou = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct MatchReport {
  std::string image_id;
  std::vector<Match> matches;
  std::vector<int> unmatched_predictions;
  std::vector<int> unmatched_truths;
  double iou_threshold = 0.5;
  int prediction_count = 0;
  int truth_count = 0;
};

// Greedy one-to-one matching: candidate pairs with iou >= threshold are taken
// in descending iou order (ties: lower prediction index, then lower truth
// index) whenever both endpoints are still free.
MatchReport match_boxes(std::span<const BoundingBox> predictions,
                        std::span<const BoundingBox> truths,
                        double iou_threshold = 0.5,
                        std::string image_id = {});

struct HistogramBin {
  double lower = 0.0;
  int count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

// Histogram of matched IoUs over [0, 1]. Bins are right-exclusive except the
// last, which also holds 1.0.
std::vector<HistogramBin> iou_histogram(std::span<const MatchReport> reports,
                                        double bin_width);

struct ImageCount {
  std::string image_id;
  int count = 0;
};

struct CountRow {
  std::string image_id;
  int predicted = 0;
  int truth = 0;
};

struct CountSummary {
  std::vector<CountRow> per_image;  // sorted by image_id
  double mean_predicted = 0.0;
  double mean_truth = 0.0;
  // mean_predicted / mean_truth; unset when mean_truth is 0.
  std::optional<double> ratio;
};

// Throws DataError listing ids present on only one side.
CountSummary count_summary(std::span<const ImageCount> predictions,
                           std::span<const ImageCount> truths);

}  // namespace crowdpaste
