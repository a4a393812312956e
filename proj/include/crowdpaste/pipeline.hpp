#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdpaste/annotations.hpp"
#include "crowdpaste/compositor.hpp"
#include "crowdpaste/evaluation.hpp"
#include "crowdpaste/placement.hpp"
#include "crowdpaste/sampling.hpp"
#include "json.hpp"

namespace crowdpaste {

struct EvaluationSettings {
  double iou_threshold = 0.5;
  double bin_width = 0.1;
};

struct PipelineConfig {
  std::filesystem::path dataset_root;
  std::string masks_subdir = "masks";
  std::string images_subdir = "images";
  std::filesystem::path output_root;
  Engine engine = Engine::kPsada;
  PsadaParams psada;
  DengParams deng;
  ColorJitter jitter;
  ComponentOptions components;
  double visibility_threshold = kDefaultVisibilityThreshold;
  int class_id = 0;
  std::uint64_t master_seed = 0;
  int samples_per_base_image = 1;
  int worker_count = 1;
  EvaluationSettings evaluation;

  std::filesystem::path masks_dir() const { return dataset_root / masks_subdir; }
  std::filesystem::path images_dir() const {
    return dataset_root / images_subdir;
  }
  std::filesystem::path labels_dir() const { return output_root / "labels"; }
  std::filesystem::path bank_dir() const { return output_root / "bank"; }
  std::filesystem::path augmented_dir() const {
    return output_root / "augmented";
  }

  // Parameter checks only; directories are checked by each command.
  void validate() const;
};

// Relative paths in the file are resolved against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& config);

inline constexpr const char* kImageDimsName = "image_dims.json";

struct ImageDims {
  int width = 0;
  int height = 0;
};
using DimsTable = std::map<std::string, ImageDims>;

void write_dims(const DimsTable& dims, const std::filesystem::path& path);
DimsTable read_dims(const std::filesystem::path& path);

// Runs fn(0..count-1) on up to `workers` threads. If any call throws, the
// exception from the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

struct ExtractEntry {
  std::string stem;
  int boxes = 0;
  int dropped = 0;
  bool image_found = true;
  std::string error;
};

struct ExtractReport {
  std::vector<ExtractEntry> entries;
  std::vector<std::string> images_without_mask;
  bool ok() const;
};

// Writes <output_root>/labels/<stem>.txt per mask, image_dims.json and
// extract_report.json.
ExtractReport run_extract_bboxes(const PipelineConfig& config);

struct BankReport {
  int sprites = 0;
  int images = 0;
  std::vector<std::string> skipped;  // stems missing an image or a mask
};

BankReport run_build_bank(const PipelineConfig& config);

struct AugmentRecord {
  std::string image_id;
  std::string source_image;
  std::string plan;
  std::string image;
  std::string labels;
  std::uint64_t stream_index = 0;
  int pasted = 0;
  int label_count = 0;
};

struct AugmentReport {
  std::vector<AugmentRecord> records;
};

// For every base image and sample index: plan, composite and write
// augmented/{images,labels,plans}/<stem>_s<k>.* plus manifest.json.
AugmentReport run_augment(const PipelineConfig& config);

// Re-composites a saved plan into `out_dir`. Output equals the augment run
// that produced the plan.
AugmentRecord run_replay(const PipelineConfig& config,
                         const std::filesystem::path& plan_path,
                         const std::filesystem::path& out_dir);

struct EvaluateReport {
  std::vector<MatchReport> matches;
  CountSummary counts;
  std::vector<HistogramBin> histogram;
  double mean_matched = 0.0;
};

// Matches label files with equal stems in the two directories and writes
// matches.json, summary.json and iou_histogram.csv to `out_dir`.
EvaluateReport run_evaluate(const PipelineConfig& config,
                            const std::filesystem::path& predictions_dir,
                            const std::filesystem::path& truths_dir,
                            const std::filesystem::path& dims_path,
                            const std::filesystem::path& out_dir);

}  // namespace crowdpaste
