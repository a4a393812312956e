#include "crowdpaste/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "crowdpaste/error.hpp"
#include "crowdpaste/object_bank.hpp"
#include "crowdpaste/serialization.hpp"

namespace crowdpaste {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Salt of the stream that drives compositing, separate from planning so a
// saved plan can be replayed without re-running the planner.
constexpr std::uint64_t kCompositeSalt = 1;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_dir(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) {
    throw ConfigError(std::string(what) + " directory not found: " +
                      dir.string());
  }
}

// stem -> path for supported image files, sorted by stem.
std::map<std::string, fs::path> list_images(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_supported_image(entry.path())) {
      continue;
    }
    const std::string stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.path()).second) {
      throw DataError("two images share the stem '" + stem + "' in " +
                      dir.string());
    }
  }
  return out;
}

std::map<std::string, fs::path> list_label_files(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

void PipelineConfig::validate() const {
  psada.validate();
  deng.validate();
  jitter.validate();
  if (output_root.empty()) throw ConfigError("output_root is required");
  if (components.min_area < 1) {
    throw ConfigError("components.min_area must be >= 1");
  }
  if (!(visibility_threshold >= 0.0 && visibility_threshold <= 1.0)) {
    throw ConfigError("visibility_threshold must be in [0, 1]");
  }
  if (class_id < 0) throw ConfigError("class_id must be >= 0");
  if (samples_per_base_image < 1) {
    throw ConfigError("samples_per_base_image must be >= 1");
  }
  if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
  if (!(evaluation.iou_threshold > 0.0 && evaluation.iou_threshold <= 1.0)) {
    throw ConfigError("evaluation.iou_threshold must be in (0, 1]");
  }
  if (!(evaluation.bin_width > 0.0 && evaluation.bin_width <= 1.0)) {
    throw ConfigError("evaluation.bin_width must be in (0, 1]");
  }
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown_keys(
      j,
      {"dataset_root", "masks_subdir", "images_subdir", "output_root",
       "engine", "psada", "deng", "jitter", "components",
       "visibility_threshold", "class_id", "master_seed",
       "samples_per_base_image", "worker_count", "evaluation"},
      "config");
  PipelineConfig c;
  try {
    if (j.contains("dataset_root")) {
      c.dataset_root =
          resolve(j["dataset_root"].get<std::string>(), base_dir);
    }
    if (j.contains("output_root")) {
      c.output_root = resolve(j["output_root"].get<std::string>(), base_dir);
    }
    c.masks_subdir = j.value("masks_subdir", c.masks_subdir);
    c.images_subdir = j.value("images_subdir", c.images_subdir);
    if (j.contains("engine")) {
      c.engine = parse_engine(j["engine"].get<std::string>());
    }
    if (j.contains("psada")) c.psada = j["psada"].get<PsadaParams>();
    if (j.contains("deng")) c.deng = j["deng"].get<DengParams>();
    if (j.contains("jitter")) c.jitter = j["jitter"].get<ColorJitter>();
    if (j.contains("components")) {
      const json& comp = j["components"];
      reject_unknown_keys(comp, {"connectivity", "min_area"}, "components");
      const int conn = comp.value("connectivity", 8);
      if (conn != 4 && conn != 8) {
        throw ConfigError("components.connectivity must be 4 or 8");
      }
      c.components.connectivity =
          conn == 4 ? Connectivity::kFour : Connectivity::kEight;
      c.components.min_area = comp.value("min_area", c.components.min_area);
    }
    c.visibility_threshold =
        j.value("visibility_threshold", c.visibility_threshold);
    c.class_id = j.value("class_id", c.class_id);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.samples_per_base_image =
        j.value("samples_per_base_image", c.samples_per_base_image);
    c.worker_count = j.value("worker_count", c.worker_count);
    if (j.contains("evaluation")) {
      const json& ev = j["evaluation"];
      reject_unknown_keys(ev, {"iou_threshold", "bin_width"}, "evaluation");
      c.evaluation.iou_threshold =
          ev.value("iou_threshold", c.evaluation.iou_threshold);
      c.evaluation.bin_width = ev.value("bin_width", c.evaluation.bin_width);
    }
  } catch (const json::exception& err) {
    throw ConfigError(std::string("invalid config value: ") + err.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& err) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " +
                      err.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

json config_to_json(const PipelineConfig& c) {
  return {{"dataset_root", c.dataset_root.generic_string()},
          {"masks_subdir", c.masks_subdir},
          {"images_subdir", c.images_subdir},
          {"output_root", c.output_root.generic_string()},
          {"engine", engine_name(c.engine)},
          {"psada", c.psada},
          {"deng", c.deng},
          {"jitter", c.jitter},
          {"components",
           {{"connectivity", static_cast<int>(c.components.connectivity)},
            {"min_area", c.components.min_area}}},
          {"visibility_threshold", c.visibility_threshold},
          {"class_id", c.class_id},
          {"master_seed", c.master_seed},
          {"samples_per_base_image", c.samples_per_base_image},
          {"worker_count", c.worker_count},
          {"evaluation",
           {{"iou_threshold", c.evaluation.iou_threshold},
            {"bin_width", c.evaluation.bin_width}}}};
}

void write_dims(const DimsTable& dims, const fs::path& path) {
  json doc = json::object();
  for (const auto& [stem, d] : dims) {
    doc[stem] = {{"width", d.width}, {"height", d.height}};
  }
  write_json(path, doc);
}

DimsTable read_dims(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read image dimensions " + path.string());
  DimsTable dims;
  try {
    const json doc = json::parse(in);
    for (const auto& item : doc.items()) {
      dims[item.key()] = {item.value().at("width").get<int>(),
                          item.value().at("height").get<int>()};
    }
  } catch (const json::exception& err) {
    throw DataError("malformed image dimensions " + path.string() + ": " +
                    err.what());
  }
  return dims;
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool ExtractReport::ok() const {
  if (!images_without_mask.empty()) return false;
  return std::all_of(entries.begin(), entries.end(), [](const ExtractEntry& e) {
    return e.image_found && e.error.empty();
  });
}

ExtractReport run_extract_bboxes(const PipelineConfig& config) {
  require_dir(config.masks_dir(), "masks");
  require_dir(config.images_dir(), "images");
  const auto masks = list_images(config.masks_dir());
  const auto images = list_images(config.images_dir());
  ensure_dir(config.labels_dir());

  std::vector<std::pair<std::string, fs::path>> work(masks.begin(),
                                                     masks.end());
  ExtractReport report;
  report.entries.resize(work.size());
  std::vector<ImageDims> dims(work.size());
  parallel_for(work.size(), config.worker_count, [&](std::size_t i) {
    const auto& [stem, mask_path] = work[i];
    ExtractEntry& entry = report.entries[i];
    entry.stem = stem;
    const BinaryMask mask = read_mask(mask_path);
    dims[i] = {mask.width(), mask.height()};
    const ComponentLabeling labeling =
        label_components(mask, config.components);
    std::vector<NormalizedLabel> labels;
    for (const Component& c : labeling.components) {
      labels.push_back(
          to_normalized(c.box, mask.width(), mask.height(), config.class_id));
    }
    entry.boxes = static_cast<int>(labeling.components.size());
    entry.dropped = labeling.dropped;
    write_labels(labels, config.labels_dir() / (stem + ".txt"));

    auto image = images.find(stem);
    if (image == images.end()) {
      entry.image_found = false;
      entry.error = "no image for mask";
      return;
    }
    const RasterImage raster = read_raster(image->second);
    if (raster.width != mask.width() || raster.height != mask.height()) {
      entry.error = "image is " + std::to_string(raster.width) + "x" +
                    std::to_string(raster.height) + ", mask is " +
                    std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height());
    }
  });
  for (const auto& [stem, path] : images) {
    if (!masks.contains(stem)) report.images_without_mask.push_back(stem);
  }

  DimsTable table;
  json entries = json::array();
  for (std::size_t i = 0; i < work.size(); ++i) {
    table[work[i].first] = dims[i];
    const ExtractEntry& e = report.entries[i];
    json row = {{"stem", e.stem},
                {"boxes", e.boxes},
                {"dropped_below_min_area", e.dropped},
                {"image_found", e.image_found}};
    if (!e.error.empty()) row["error"] = e.error;
    entries.push_back(std::move(row));
  }
  write_dims(table, config.output_root / kImageDimsName);
  write_json(config.output_root / "extract_report.json",
             {{"images", entries},
              {"images_without_mask", report.images_without_mask},
              {"ok", report.ok()}});
  return report;
}

BankReport run_build_bank(const PipelineConfig& config) {
  require_dir(config.masks_dir(), "masks");
  require_dir(config.images_dir(), "images");
  const auto masks = list_images(config.masks_dir());
  const auto images = list_images(config.images_dir());

  BankReport report;
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> work;
  for (const auto& [stem, mask_path] : masks) {
    auto image = images.find(stem);
    if (image == images.end()) {
      report.skipped.push_back(stem);
    } else {
      work.push_back({stem, {image->second, mask_path}});
    }
  }
  for (const auto& [stem, path] : images) {
    if (!masks.contains(stem)) report.skipped.push_back(stem);
  }
  std::sort(report.skipped.begin(), report.skipped.end());

  std::vector<std::vector<SpriteObject>> per_image(work.size());
  parallel_for(work.size(), config.worker_count, [&](std::size_t i) {
    const auto& [stem, paths] = work[i];
    per_image[i] = cut_sprites(read_rgb(paths.first), read_mask(paths.second),
                               stem, config.components);
  });
  std::vector<SpriteObject> sprites;
  for (auto& batch : per_image) {
    for (SpriteObject& s : batch) sprites.push_back(std::move(s));
  }
  ensure_dir(config.bank_dir());
  save_bank(sprites, config.bank_dir());
  report.sprites = static_cast<int>(sprites.size());
  report.images = static_cast<int>(work.size());
  return report;
}

namespace {

struct SampleInputs {
  fs::path base_image;
  fs::path base_labels;
};

// Composites `plan` and writes image + labels. Empty plans copy the base
// files unchanged when the base is already a PNG.
AugmentRecord emit_sample(const PipelineConfig& config,
                          std::span<const SpriteObject> bank,
                          const PastePlan& plan, const SampleInputs& in,
                          const fs::path& image_out,
                          const fs::path& labels_out) {
  AugmentRecord record;
  record.image_id = plan.image_id;
  record.stream_index = plan.seed.stream_index;
  record.pasted = static_cast<int>(plan.object_count());
  const std::vector<NormalizedLabel> base_labels =
      read_normalized_labels(in.base_labels);
  std::string ext = in.base_image.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (plan.empty() && ext == ".png") {
    fs::copy_file(in.base_image, image_out,
                  fs::copy_options::overwrite_existing);
    fs::copy_file(in.base_labels, labels_out,
                  fs::copy_options::overwrite_existing);
    record.label_count = static_cast<int>(base_labels.size());
    return record;
  }
  const RgbImage base = read_rgb(in.base_image);
  RngStream rng(plan.seed.master_seed, plan.seed.stream_index, kCompositeSalt);
  const CompositeOptions options{config.jitter, config.visibility_threshold,
                                 config.class_id};
  const AugmentedSample sample =
      composite(base, base_labels, plan, bank, options, rng);
  write_rgb_png(image_out, sample.image);
  write_labels(sample.labels, labels_out);
  record.label_count = static_cast<int>(sample.labels.size());
  return record;
}

json record_to_json(const AugmentRecord& r) {
  return {{"image_id", r.image_id},     {"source_image", r.source_image},
          {"plan", r.plan},             {"image", r.image},
          {"labels", r.labels},         {"stream_index", r.stream_index},
          {"pasted", r.pasted},         {"label_count", r.label_count}};
}

}  // namespace

AugmentReport run_augment(const PipelineConfig& config) {
  require_dir(config.images_dir(), "images");
  require_dir(config.labels_dir(), "labels (run extract-bboxes first)");
  const std::vector<SpriteObject> bank = load_bank(config.bank_dir());
  if (bank.empty()) {
    throw DataError("object bank " + config.bank_dir().string() +
                    " is empty");
  }
  const auto images = list_images(config.images_dir());
  std::vector<std::string> missing;
  for (const auto& [stem, path] : images) {
    if (!fs::exists(config.labels_dir() / (stem + ".txt"))) {
      missing.push_back(stem);
    }
  }
  if (!missing.empty()) {
    std::string msg = "base images without labels:";
    for (const std::string& s : missing) msg += " " + s;
    throw DataError(msg);
  }

  const fs::path out = config.augmented_dir();
  std::error_code ec;
  fs::remove_all(out, ec);
  for (const char* sub : {"images", "labels", "plans"}) ensure_dir(out / sub);

  struct Task {
    std::string stem;
    fs::path image;
    int sample;
  };
  std::vector<Task> tasks;
  for (const auto& [stem, path] : images) {
    for (int k = 0; k < config.samples_per_base_image; ++k) {
      tasks.push_back({stem, path, k});
    }
  }

  AugmentReport report;
  report.records.resize(tasks.size());
  std::vector<ImageDims> dims(tasks.size());
  parallel_for(tasks.size(), config.worker_count, [&](std::size_t i) {
    const Task& task = tasks[i];
    const std::string id = task.stem + "_s" + std::to_string(task.sample);
    const std::uint64_t stream =
        stable_stream_index(task.stem, static_cast<std::uint64_t>(task.sample));
    const SampleInputs in{task.image,
                          config.labels_dir() / (task.stem + ".txt")};
    const RasterImage raster = read_raster(task.image);
    dims[i] = {raster.width, raster.height};

    RngStream rng(config.master_seed, stream);
    PastePlan plan;
    if (config.engine == Engine::kPsada) {
      plan = plan_psada(raster.width, raster.height,
                        static_cast<int>(bank.size()), config.psada, rng);
    } else {
      std::vector<BoundingBox> existing;
      for (const NormalizedLabel& l : read_normalized_labels(in.base_labels)) {
        existing.push_back(denormalize(l, raster.width, raster.height));
      }
      plan = plan_deng(raster.width, raster.height, existing,
                       static_cast<int>(bank.size()), config.deng, rng);
    }
    plan.image_id = id;
    plan.source_id = task.stem;

    const std::string plan_rel = "plans/" + id + ".json";
    const std::string image_rel = "images/" + id + ".png";
    const std::string labels_rel = "labels/" + id + ".txt";
    save_plan(plan, out / plan_rel);
    AugmentRecord record = emit_sample(config, bank, plan, in,
                                       out / image_rel, out / labels_rel);
    record.source_image =
        task.image.lexically_relative(config.dataset_root).generic_string();
    record.plan = plan_rel;
    record.image = image_rel;
    record.labels = labels_rel;
    report.records[i] = std::move(record);
  });

  DimsTable table;
  json records = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    table[report.records[i].image_id] = dims[i];
    records.push_back(record_to_json(report.records[i]));
  }
  write_dims(table, out / kImageDimsName);
  write_json(out / "manifest.json",
             {{"engine", engine_name(config.engine)},
              {"master_seed", config.master_seed},
              {"samples_per_base_image", config.samples_per_base_image},
              {"jitter", config.jitter},
              {"visibility_threshold", config.visibility_threshold},
              {"bank", fs::relative(config.bank_dir(), config.output_root)
                           .generic_string()},
              {"records", std::move(records)}});
  return report;
}

AugmentRecord run_replay(const PipelineConfig& config,
                         const fs::path& plan_path, const fs::path& out_dir) {
  const PastePlan plan = load_plan(plan_path);
  const std::vector<SpriteObject> bank = load_bank(config.bank_dir());
  const auto images = list_images(config.images_dir());
  auto image = images.find(plan.source_id);
  if (image == images.end()) {
    throw DataError("base image for plan source '" + plan.source_id +
                    "' not found in " + config.images_dir().string());
  }
  ensure_dir(out_dir);
  const SampleInputs in{image->second,
                        config.labels_dir() / (plan.source_id + ".txt")};
  AugmentRecord record =
      emit_sample(config, bank, plan, in, out_dir / (plan.image_id + ".png"),
                  out_dir / (plan.image_id + ".txt"));
  record.source_image = image->second.generic_string();
  record.plan = plan_path.generic_string();
  record.image = (out_dir / (plan.image_id + ".png")).generic_string();
  record.labels = (out_dir / (plan.image_id + ".txt")).generic_string();
  return record;
}

EvaluateReport run_evaluate(const PipelineConfig& config,
                            const fs::path& predictions_dir,
                            const fs::path& truths_dir,
                            const fs::path& dims_path,
                            const fs::path& out_dir) {
  require_dir(predictions_dir, "predictions");
  require_dir(truths_dir, "truths");
  const auto predicted_files = list_label_files(predictions_dir);
  const auto truth_files = list_label_files(truths_dir);
  const DimsTable dims = read_dims(dims_path);

  struct Loaded {
    std::string stem;
    std::vector<NormalizedLabel> predicted;
    std::vector<NormalizedLabel> truth;
  };
  std::vector<ImageCount> predicted_counts;
  std::vector<ImageCount> truth_counts;
  std::vector<Loaded> loaded;
  for (const auto& [stem, path] : predicted_files) {
    Loaded l{stem, read_normalized_labels(path), {}};
    predicted_counts.push_back({stem, static_cast<int>(l.predicted.size())});
    loaded.push_back(std::move(l));
  }
  std::map<std::string, std::vector<NormalizedLabel>> truths;
  for (const auto& [stem, path] : truth_files) {
    truths[stem] = read_normalized_labels(path);
    truth_counts.push_back({stem, static_cast<int>(truths[stem].size())});
  }

  EvaluateReport report;
  report.counts = count_summary(predicted_counts, truth_counts);

  json per_image = json::array();
  double matched_total = 0.0;
  for (Loaded& l : loaded) {
    l.truth = truths[l.stem];
    auto d = dims.find(l.stem);
    if (d == dims.end()) {
      throw DataError("no image dimensions for " + l.stem + " in " +
                      dims_path.string());
    }
    auto to_boxes = [&d](const std::vector<NormalizedLabel>& labels) {
      std::vector<BoundingBox> boxes;
      for (const NormalizedLabel& n : labels) {
        boxes.push_back(denormalize(n, d->second.width, d->second.height));
      }
      return boxes;
    };
    MatchReport m =
        match_boxes(to_boxes(l.predicted), to_boxes(l.truth),
                    config.evaluation.iou_threshold, l.stem);
    matched_total += static_cast<double>(m.matches.size());
    json matches = json::array();
    for (const Match& mm : m.matches) {
      matches.push_back(
          {{"prediction", mm.prediction}, {"truth", mm.truth}, {"iou", mm.iou}});
    }
    per_image.push_back({{"image_id", m.image_id},
                         {"predicted", m.prediction_count},
                         {"truth", m.truth_count},
                         {"matched", m.matches.size()},
                         {"matches", std::move(matches)},
                         {"unmatched_predictions", m.unmatched_predictions},
                         {"unmatched_truths", m.unmatched_truths}});
    report.matches.push_back(std::move(m));
  }
  if (!loaded.empty()) {
    report.mean_matched = matched_total / static_cast<double>(loaded.size());
  }
  report.histogram =
      iou_histogram(report.matches, config.evaluation.bin_width);

  ensure_dir(out_dir);
  write_json(out_dir / "matches.json", per_image);
  json summary = {{"images", report.counts.per_image.size()},
                  {"mean_predicted", report.counts.mean_predicted},
                  {"mean_truth", report.counts.mean_truth},
                  {"mean_matched", report.mean_matched},
                  {"iou_threshold", config.evaluation.iou_threshold}};
  summary["ratio"] = report.counts.ratio ? json(*report.counts.ratio)
                                         : json(nullptr);
  write_json(out_dir / "summary.json", summary);
  std::string csv = "bin_lower,count\n";
  char row[64];
  for (const HistogramBin& b : report.histogram) {
    std::snprintf(row, sizeof(row), "%.6f,%d\n", b.lower, b.count);
    csv += row;
  }
  write_text(out_dir / "iou_histogram.csv", csv);
  return report;
}

}  // namespace crowdpaste
