#include "crowdpaste/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crowdpaste/error.hpp"

namespace crowdpaste {

MatchReport match_boxes(std::span<const BoundingBox> predictions,
                        std::span<const BoundingBox> truths,
                        double iou_threshold, std::string image_id) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("iou_threshold must be in (0, 1]");
  }
  MatchReport report;
  report.image_id = std::move(image_id);
  report.iou_threshold = iou_threshold;
  report.prediction_count = static_cast<int>(predictions.size());
  report.truth_count = static_cast<int>(truths.size());

  std::vector<Match> candidates;
  for (int p = 0; p < static_cast<int>(predictions.size()); ++p) {
    for (int t = 0; t < static_cast<int>(truths.size()); ++t) {
      const double v = iou(predictions[p], truths[t]);
      if (v >= iou_threshold) candidates.push_back({p, t, v});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Match& a, const Match& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              if (a.prediction != b.prediction) {
                return a.prediction < b.prediction;
              }
              return a.truth < b.truth;
            });

  std::vector<bool> pred_used(predictions.size(), false);
  std::vector<bool> truth_used(truths.size(), false);
  for (const Match& m : candidates) {
    if (pred_used[m.prediction] || truth_used[m.truth]) continue;
    pred_used[m.prediction] = true;
    truth_used[m.truth] = true;
    report.matches.push_back(m);
  }
  for (int p = 0; p < static_cast<int>(predictions.size()); ++p) {
    if (!pred_used[p]) report.unmatched_predictions.push_back(p);
  }
  for (int t = 0; t < static_cast<int>(truths.size()); ++t) {
    if (!truth_used[t]) report.unmatched_truths.push_back(t);
  }
  return report;
}

std::vector<HistogramBin> iou_histogram(std::span<const MatchReport> reports,
                                        double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw ConfigError("bin_width must be in (0, 1]");
  }
  // Tolerance absorbs representation error such as 0.3 / 0.1 = 2.9999...
  constexpr double kEdgeTolerance = 1e-9;
  const int bins =
      std::max(1, static_cast<int>(std::ceil(1.0 / bin_width - kEdgeTolerance)));
  std::vector<HistogramBin> out(bins);
  for (int i = 0; i < bins; ++i) out[i].lower = i * bin_width;
  for (const MatchReport& r : reports) {
    for (const Match& m : r.matches) {
      int index =
          static_cast<int>(std::floor(m.iou / bin_width + kEdgeTolerance));
      out[std::clamp(index, 0, bins - 1)].count++;
    }
  }
  return out;
}

CountSummary count_summary(std::span<const ImageCount> predictions,
                           std::span<const ImageCount> truths) {
  std::map<std::string, int> predicted;
  std::map<std::string, int> truth;
  for (const ImageCount& c : predictions) {
    if (!predicted.emplace(c.image_id, c.count).second) {
      throw DataError("duplicate prediction image id " + c.image_id);
    }
  }
  for (const ImageCount& c : truths) {
    if (!truth.emplace(c.image_id, c.count).second) {
      throw DataError("duplicate truth image id " + c.image_id);
    }
  }
  std::vector<std::string> only_predicted;
  std::vector<std::string> only_truth;
  for (const auto& [id, n] : predicted) {
    if (!truth.contains(id)) only_predicted.push_back(id);
  }
  for (const auto& [id, n] : truth) {
    if (!predicted.contains(id)) only_truth.push_back(id);
  }
  if (!only_predicted.empty() || !only_truth.empty()) {
    std::string msg = "image ids differ between predictions and truths;";
    auto list = [&msg](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      if (msg.back() != ';') msg += ';';
      msg += std::string(" ") + label + ":";
      for (const std::string& id : ids) msg += " " + id;
    };
    list("only in predictions", only_predicted);
    list("only in truths", only_truth);
    throw DataError(msg);
  }

  CountSummary summary;
  double total_predicted = 0.0;
  double total_truth = 0.0;
  for (const auto& [id, n] : predicted) {
    summary.per_image.push_back({id, n, truth[id]});
    total_predicted += n;
    total_truth += truth[id];
  }
  if (!summary.per_image.empty()) {
    const double images = static_cast<double>(summary.per_image.size());
    summary.mean_predicted = total_predicted / images;
    summary.mean_truth = total_truth / images;
  }
  if (summary.mean_truth > 0.0) {
    summary.ratio = summary.mean_predicted / summary.mean_truth;
  }
  return summary;
}

}  // namespace crowdpaste
