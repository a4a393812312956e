// Command-line front end: extract-bboxes, build-bank, augment, evaluate,
// replay-plan. Exit codes: 0 success, 1 data errors, 2 config errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "crowdpaste/error.hpp"
#include "crowdpaste/pipeline.hpp"

namespace fs = std::filesystem;
using namespace crowdpaste;

namespace {

constexpr int kDataError = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "pipeline config (JSON)")
      ->required();
  cmd->add_option("--seed", o.seed, "override master_seed");
  cmd->add_option("--engine", o.engine, "override engine (psada|deng)");
  cmd->add_option("--workers", o.workers, "override worker_count");
  cmd->add_option("--out", o.out, "override output_root");
}

PipelineConfig load(const Overrides& o) {
  PipelineConfig config = load_config(o.config_path);
  if (o.seed) config.master_seed = *o.seed;
  if (o.engine) config.engine = parse_engine(*o.engine);
  if (o.workers) config.worker_count = *o.workers;
  if (o.out) config.output_root = fs::absolute(*o.out);
  config.validate();
  return config;
}

int extract(const Overrides& o) {
  const PipelineConfig config = load(o);
  const ExtractReport report = run_extract_bboxes(config);
  int boxes = 0, dropped = 0;
  for (const ExtractEntry& e : report.entries) {
    boxes += e.boxes;
    dropped += e.dropped;
    if (!e.error.empty()) {
      std::cerr << "error: " << e.stem << ": " << e.error << "\n";
    }
  }
  for (const std::string& stem : report.images_without_mask) {
    std::cerr << "error: " << stem << ": no mask for image\n";
  }
  std::cout << report.entries.size() << " masks, " << boxes << " boxes, "
            << dropped << " components below min_area\n";
  return report.ok() ? 0 : kDataError;
}

int build_bank(const Overrides& o) {
  const PipelineConfig config = load(o);
  const BankReport report = run_build_bank(config);
  for (const std::string& stem : report.skipped) {
    std::cerr << "warning: " << stem << ": missing image or mask, skipped\n";
  }
  if (report.sprites == 0) {
    std::cerr << "warning: no sprites extracted; bank is empty\n";
  }
  std::cout << report.sprites << " sprites from " << report.images
            << " images -> " << config.bank_dir().string() << "\n";
  return 0;
}

int augment(const Overrides& o) {
  const PipelineConfig config = load(o);
  const AugmentReport report = run_augment(config);
  int pasted = 0;
  for (const AugmentRecord& r : report.records) pasted += r.pasted;
  std::cout << report.records.size() << " samples, " << pasted
            << " pasted objects -> " << config.augmented_dir().string()
            << "\n";
  return 0;
}

int evaluate(const Overrides& o, const std::string& predictions,
             const std::string& truths, std::optional<std::string> dims) {
  const PipelineConfig config = load(o);
  const fs::path dims_path =
      dims ? fs::path(*dims) : config.augmented_dir() / kImageDimsName;
  const fs::path out_dir = config.output_root / "evaluation";
  const EvaluateReport report =
      run_evaluate(config, predictions, truths, dims_path, out_dir);
  std::printf("images %zu  mean predicted %.4f  mean truth %.4f  "
              "mean matched %.4f  ratio ",
              report.counts.per_image.size(), report.counts.mean_predicted,
              report.counts.mean_truth, report.mean_matched);
  if (report.counts.ratio) {
    std::printf("%.4f\n", *report.counts.ratio);
  } else {
    std::printf("n/a\n");
  }
  std::printf("bin_lower,count\n");
  for (const HistogramBin& b : report.histogram) {
    std::printf("%.6f,%d\n", b.lower, b.count);
  }
  return 0;
}

int replay(const Overrides& o, const std::string& plan,
           std::optional<std::string> out_dir) {
  const PipelineConfig config = load(o);
  const fs::path dir = out_dir ? fs::path(*out_dir)
                               : config.output_root / "replay";
  const AugmentRecord record = run_replay(config, plan, dir);
  std::cout << record.image << "\n" << record.labels << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copy-paste augmentation pipeline for crowded-scene detection"};
  app.require_subcommand(1);

  Overrides o;
  auto* cmd_extract = app.add_subcommand(
      "extract-bboxes", "write YOLO labels from segmentation masks");
  add_common_flags(cmd_extract, o);
  auto* cmd_bank =
      app.add_subcommand("build-bank", "cut mask components into a sprite bank");
  add_common_flags(cmd_bank, o);
  auto* cmd_augment = app.add_subcommand(
      "augment", "synthesize augmented images, labels and plans");
  add_common_flags(cmd_augment, o);

  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "match predicted labels to ground truth");
  add_common_flags(cmd_evaluate, o);
  std::string predictions, truths;
  std::optional<std::string> dims;
  cmd_evaluate->add_option("--predictions", predictions, "predicted labels")
      ->required();
  cmd_evaluate->add_option("--truths", truths, "ground-truth labels")
      ->required();
  cmd_evaluate->add_option("--dims", dims,
                           "image dimensions JSON (default: "
                           "<output_root>/augmented/image_dims.json)");

  auto* cmd_replay =
      app.add_subcommand("replay-plan", "re-composite a saved plan");
  add_common_flags(cmd_replay, o);
  std::string plan;
  std::optional<std::string> replay_out;
  cmd_replay->add_option("--plan", plan, "plan JSON file")->required();
  cmd_replay->add_option("--replay-out", replay_out,
                         "directory for the replayed sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*cmd_extract) return extract(o);
    if (*cmd_bank) return build_bank(o);
    if (*cmd_augment) return augment(o);
    if (*cmd_evaluate) return evaluate(o, predictions, truths, dims);
    if (*cmd_replay) return replay(o, plan, replay_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
