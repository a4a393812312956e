#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdpaste/annotations.hpp"
#include "crowdpaste/sampling.hpp"

namespace crowdpaste {

struct SpriteObject;

enum class Engine { kPsada, kDeng };

const char* engine_name(Engine engine);
Engine parse_engine(std::string_view name);  // throws ConfigError

// A group center (x, y, s). The footprint is the region pasted objects must
// overlap: an s-by-s square for PSADA, the source object's box for Deng.
struct GroupCenter {
  int x = 0;
  int y = 0;
  int size = 0;
  int footprint_w = 0;
  int footprint_h = 0;

  BoundingBox footprint() const {
    return {x - footprint_w / 2, y - footprint_h / 2, footprint_w,
            footprint_h};
  }

  friend bool operator==(const GroupCenter&, const GroupCenter&) = default;
};

// How a position proposal was accepted.
enum class Acceptance {
  kOverlap,    // anchor fell inside the center footprint
  kAnnealing,  // accepted by exp(-d/T)
  kFallback,   // proposal budget exhausted, clamped into the footprint
};

const char* acceptance_name(Acceptance a);
Acceptance parse_acceptance(std::string_view name);

// One object to paste. (x, y) is the anchor pixel; the scaled sprite is drawn
// with its top-left corner at (x - w/2, y - h/2).
struct PlacedObject {
  int sprite_ref = 0;
  int x = 0;
  int y = 0;
  int size = 0;  // target larger dimension of the scaled sprite
  int group_index = 0;
  int paste_order = 0;
  // Annealing temperature in effect for this object; 0 for Deng plans.
  double temperature = 0.0;
  Acceptance accepted_by = Acceptance::kOverlap;
  int proposals = 0;

  friend bool operator==(const PlacedObject&, const PlacedObject&) = default;
};

struct PlacementGroup {
  GroupCenter center;
  std::vector<PlacedObject> objects;

  friend bool operator==(const PlacementGroup&,
                         const PlacementGroup&) = default;
};

struct SeedInfo {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const SeedInfo&, const SeedInfo&) = default;
};

// Geometry-only description of one augmented image.
struct PastePlan {
  std::string image_id;
  std::string source_id;
  int image_w = 0;
  int image_h = 0;
  std::variant<PsadaParams, DengParams> params;
  SeedInfo seed;
  std::vector<PlacementGroup> groups;

  Engine engine() const {
    return std::holds_alternative<PsadaParams>(params) ? Engine::kPsada
                                                       : Engine::kDeng;
  }
  std::size_t object_count() const;
  bool empty() const { return object_count() == 0; }
  // All objects sorted by paste_order.
  std::vector<const PlacedObject*> in_paste_order() const;

  friend bool operator==(const PastePlan&, const PastePlan&) = default;
};

// Pseudo-simulated-annealing placement: Poisson group count, uniformly
// sampled centers, per-group counts in [1, ceil(M/|C|)], Gaussian sizes in
// pixels and annealed positions with a global geometric cooling schedule.
// Requires image >= 64x64 and bank_size >= 1.
PastePlan plan_psada(int image_w, int image_h, int bank_size,
                     const PsadaParams& params, RngStream& rng);

// Baseline copy-paste placement around existing objects. Empty when the
// image has no objects.
PastePlan plan_deng(int image_w, int image_h,
                    std::span<const BoundingBox> existing, int bank_size,
                    const DengParams& params, RngStream& rng);

inline constexpr double kDefaultVisibilityThreshold = 0.25;

// Tight box around the alpha pixels of a sprite drawn at (origin_x, origin_y)
// that land inside the image. Nullopt when nothing is visible or the visible
// box area is below `visibility_threshold` times the unclipped box area.
std::optional<BoundingBox> visible_alpha_box(const BinaryMask& alpha,
                                             int origin_x, int origin_y,
                                             int image_w, int image_h,
                                             double visibility_threshold);

struct RealizedObject {
  const PlacedObject* object = nullptr;
  BoundingBox box;
};

// Label geometry of each surviving pasted object, in paste order.
std::vector<RealizedObject> realize_plan(
    const PastePlan& plan, std::span<const SpriteObject> bank,
    double visibility_threshold = kDefaultVisibilityThreshold);

std::vector<BoundingBox> realized_boxes(
    const PastePlan& plan, std::span<const SpriteObject> bank, int image_w,
    int image_h, double visibility_threshold = kDefaultVisibilityThreshold);

}  // namespace crowdpaste
