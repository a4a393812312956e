#include <map>

#include "crowdpaste/error.hpp"
#include "crowdpaste/pipeline.hpp"
#include "crowdpaste/serialization.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace crowdpaste;
namespace fs = std::filesystem;

namespace {

using Tree = std::map<std::string, std::string>;

Tree snapshot(const fs::path& dir) {
  Tree t;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      t[e.path().lexically_relative(dir).generic_string()] =
          testing::read_file(e.path());
    }
  }
  return t;
}

PipelineConfig make_config(const fs::path& root, nlohmann::json extra = {}) {
  nlohmann::json j{{"dataset_root", "data"}, {"output_root", "out"},
                   {"master_seed", 42}};
  if (extra.is_object()) j.update(extra);
  return config_from_json(j, root);
}

PipelineConfig fish_setup(const std::string& name, int count,
                          nlohmann::json extra = {}) {
  const fs::path root = testing::fresh_dir(name);
  testing::write_fish_dataset(root / "data", count);
  return make_config(root, extra);
}

int line_count(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("extract-bboxes writes one label file per mask") {
  const PipelineConfig c = fish_setup("extract", 4);
  const ExtractReport r = run_extract_bboxes(c);
  CHECK(r.ok());
  REQUIRE(r.entries.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const std::string text =
        testing::read_file(c.labels_dir() / ("img00" + std::to_string(i) + ".txt"));
    CHECK(line_count(text) == i);
    CHECK(r.entries[i].boxes == i);
  }
  CHECK(fs::exists(c.labels_dir() / "img000.txt"));
  const DimsTable dims = read_dims(c.output_root / kImageDimsName);
  CHECK(dims.at("img002").width == 160);
  CHECK(dims.at("img002").height == 128);
  CHECK(fs::exists(c.output_root / "extract_report.json"));

  // Boxes match the mask components exactly.
  const BinaryMask mask = read_mask(c.masks_dir() / "img003.png");
  const auto boxes = read_labels(c.labels_dir() / "img003.txt", 160, 128);
  const auto comps = extract_components(mask, c.components);
  REQUIRE(boxes.size() == comps.size());
  for (std::size_t k = 0; k < boxes.size(); ++k) CHECK(boxes[k] == comps[k]);
}

TEST_CASE("extract-bboxes reports masks without images") {
  const PipelineConfig c = fish_setup("extract_missing", 3);
  fs::remove(c.images_dir() / "img001.png");
  const ExtractReport r = run_extract_bboxes(c);
  CHECK_FALSE(r.ok());
}

TEST_CASE("build-bank collects every component and is reproducible") {
  const PipelineConfig c = fish_setup("bank", 6);
  run_extract_bboxes(c);
  const BankReport r = run_build_bank(c);
  CHECK(r.sprites == 0 + 1 + 2 + 3 + 0 + 1);
  CHECK(r.skipped.empty());
  CHECK(load_bank(c.bank_dir()).size() == 7);
  const Tree first = snapshot(c.bank_dir());
  run_build_bank(c);
  CHECK(snapshot(c.bank_dir()) == first);
}

TEST_CASE("build-bank on a dataset without objects yields an empty bank") {
  const PipelineConfig c = fish_setup("bank_empty", 1);
  CHECK(run_build_bank(c).sprites == 0);
  CHECK(load_bank(c.bank_dir()).empty());
}

TEST_CASE("augment requires a non-empty bank and base labels") {
  const PipelineConfig c = fish_setup("augment_empty", 2);
  run_extract_bboxes(c);
  run_build_bank(c);  // only img001 has a fish
  fs::remove(c.labels_dir() / "img000.txt");
  CHECK_THROWS_AS(run_augment(c), DataError);

  const PipelineConfig e = fish_setup("augment_nobank", 1);
  run_extract_bboxes(e);
  run_build_bank(e);
  CHECK_THROWS_AS(run_augment(e), DataError);
}

TEST_CASE("augment with a vanishing rate copies the base images") {
  const PipelineConfig c =
      fish_setup("augment_copy", 4, {{"psada", {{"lambda", 1e-9}}}});
  run_extract_bboxes(c);
  run_build_bank(c);
  const AugmentReport r = run_augment(c);
  REQUIRE(r.records.size() == 4);
  for (const AugmentRecord& rec : r.records) {
    CHECK(rec.pasted == 0);
    const std::string stem = rec.image_id.substr(0, rec.image_id.size() - 3);
    CHECK(testing::read_file(c.augmented_dir() / rec.image) ==
          testing::read_file(c.images_dir() / (stem + ".png")));
    CHECK(testing::read_file(c.augmented_dir() / rec.labels) ==
          testing::read_file(c.labels_dir() / (stem + ".txt")));
  }
}

TEST_CASE("augment is deterministic across runs and worker counts") {
  const PipelineConfig c =
      fish_setup("augment_det", 8, {{"samples_per_base_image", 2}});
  run_extract_bboxes(c);
  run_build_bank(c);
  run_augment(c);
  const Tree first = snapshot(c.augmented_dir());
  CHECK(first.size() == 16 * 3 + 2);
  run_augment(c);
  CHECK(snapshot(c.augmented_dir()) == first);
  PipelineConfig parallel = c;
  parallel.worker_count = 4;
  run_augment(parallel);
  CHECK(snapshot(c.augmented_dir()) == first);

  PipelineConfig reseeded = c;
  reseeded.master_seed = 43;
  run_augment(reseeded);
  CHECK(snapshot(c.augmented_dir()) != first);
}

TEST_CASE("augmented labels contain base labels plus pasted objects") {
  const PipelineConfig c = fish_setup("augment_labels", 4);
  run_extract_bboxes(c);
  run_build_bank(c);
  const AugmentReport r = run_augment(c);
  int pasted = 0;
  for (const AugmentRecord& rec : r.records) {
    const std::string stem = rec.image_id.substr(0, rec.image_id.size() - 3);
    const std::string base = testing::read_file(c.labels_dir() / (stem + ".txt"));
    const std::string aug = testing::read_file(c.augmented_dir() / rec.labels);
    CHECK(aug.substr(0, base.size()) == base);
    CHECK(line_count(aug) == rec.label_count);
    CHECK(rec.label_count <= line_count(base) + rec.pasted);
    pasted += rec.pasted;
  }
  CHECK(pasted > 0);
}

TEST_CASE("deng engine runs end to end") {
  const PipelineConfig c = fish_setup("augment_deng", 4, {{"engine", "deng"}});
  run_extract_bboxes(c);
  run_build_bank(c);
  const AugmentReport r = run_augment(c);
  // img000 has no objects, so its plan is empty.
  CHECK(r.records[0].pasted == 0);
  for (const AugmentRecord& rec : r.records) {
    const PastePlan plan = load_plan(c.augmented_dir() / rec.plan);
    CHECK(plan.engine() == Engine::kDeng);
  }
}

TEST_CASE("replay reproduces the augment output") {
  const PipelineConfig c = fish_setup("replay", 4);
  run_extract_bboxes(c);
  run_build_bank(c);
  const AugmentReport r = run_augment(c);
  const fs::path replay = c.output_root / "replay";
  for (const AugmentRecord& rec : r.records) {
    const AugmentRecord again =
        run_replay(c, c.augmented_dir() / rec.plan, replay);
    CHECK(testing::read_file(replay / (rec.image_id + ".png")) ==
          testing::read_file(c.augmented_dir() / rec.image));
    CHECK(testing::read_file(replay / (rec.image_id + ".txt")) ==
          testing::read_file(c.augmented_dir() / rec.labels));
    CHECK(again.pasted == rec.pasted);
  }
}

TEST_CASE("evaluate against itself and against degraded predictions") {
  const PipelineConfig c = fish_setup("evaluate", 8);
  run_extract_bboxes(c);
  run_build_bank(c);
  run_augment(c);
  const fs::path labels = c.augmented_dir() / "labels";
  const fs::path dims = c.augmented_dir() / kImageDimsName;

  const EvaluateReport self =
      run_evaluate(c, labels, labels, dims, c.output_root / "eval_self");
  REQUIRE(self.counts.ratio.has_value());
  CHECK(*self.counts.ratio == doctest::Approx(1.0));
  int total = 0;
  for (const auto& m : self.matches) {
    CHECK(m.matches.size() == static_cast<std::size_t>(m.truth_count));
    total += m.truth_count;
  }
  CHECK(self.histogram.back().count == total);
  for (const char* f : {"matches.json", "summary.json", "iou_histogram.csv"}) {
    CHECK(fs::exists(c.output_root / "eval_self" / f));
  }

  const fs::path empty = c.output_root / "empty_preds";
  fs::create_directories(empty);
  for (const auto& e : fs::directory_iterator(labels)) {
    std::ofstream(empty / e.path().filename());
  }
  const EvaluateReport none =
      run_evaluate(c, empty, labels, dims, c.output_root / "eval_none");
  CHECK(*none.counts.ratio == doctest::Approx(0.0));

  fs::remove(empty / "img000_s0.txt");
  CHECK_THROWS_AS(run_evaluate(c, empty, labels, dims, c.output_root / "x"),
                  DataError);
}

TEST_CASE("config parsing") {
  const fs::path root = testing::fresh_dir("config");
  const PipelineConfig c = make_config(root);
  CHECK(c.dataset_root == root / "data");
  CHECK(c.labels_dir() == root / "out" / "labels");
  CHECK(c.master_seed == 42);

  CHECK_THROWS_AS(make_config(root, {{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(make_config(root, {{"psada", {{"lamda", 2}}}}), ConfigError);
  CHECK_THROWS_AS(make_config(root, {{"components", {{"connectivity", 6}}}}),
                  ConfigError);
  CHECK_THROWS_AS(make_config(root, {{"engine", "other"}}), ConfigError);
  CHECK_THROWS_AS(make_config(root, {{"psada", {{"gamma", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(make_config(root, {{"worker_count", 0}}), ConfigError);
  CHECK_THROWS_AS(load_config(root / "missing.json"), ConfigError);

  const PipelineConfig back =
      config_from_json(config_to_json(make_config(root, {{"engine", "deng"}})), root);
  CHECK(back.engine == Engine::kDeng);
  CHECK(back.dataset_root == c.dataset_root);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 50);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw DataError("fail " + std::to_string(i));
    });
    FAIL("expected throw");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
}
