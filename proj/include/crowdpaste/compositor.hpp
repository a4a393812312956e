#pragma once

#include <span>
#include <vector>

#include "crowdpaste/annotations.hpp"
#include "crowdpaste/image.hpp"
#include "crowdpaste/object_bank.hpp"
#include "crowdpaste/placement.hpp"
#include "crowdpaste/sampling.hpp"

namespace crowdpaste {

struct ColorJitter {
  double hue_shift_deg = 60.0;
  double saturation_scale = 1.0;
  double apply_probability = 1.0;

  void validate() const;  // throws ConfigError
  friend bool operator==(const ColorJitter&, const ColorJitter&) = default;
};

struct CompositeOptions {
  ColorJitter jitter;
  double visibility_threshold = kDefaultVisibilityThreshold;
  int pasted_class_id = 0;
};

struct AugmentedSample {
  RgbImage image;
  std::vector<NormalizedLabel> labels;
  PastePlan provenance;
};

// Width and height after scaling so the larger side equals target_size.
struct Extent {
  int width = 1;
  int height = 1;
};
Extent scaled_extent(int width, int height, int target_size);

// Nearest-neighbor resize to scaled_extent; alpha follows the same mapping.
SpriteObject scale_sprite(const SpriteObject& sprite, int target_size);

// Rotates hue and scales saturation of alpha-true pixels with probability
// apply_probability. Always consumes exactly one draw from `rng`.
SpriteObject jitter_colors(const SpriteObject& sprite,
                           const ColorJitter& jitter, RngStream& rng);

// Top-left corner of a sprite of the given extent anchored at (x, y).
inline std::pair<int, int> paste_origin(int x, int y, const Extent& extent) {
  return {x - extent.width / 2, y - extent.height / 2};
}

// Pastes the plan's objects in paste order onto `base`. Labels are the base
// labels followed by one label per visible pasted object.
AugmentedSample composite(const RgbImage& base,
                          std::span<const NormalizedLabel> base_labels,
                          const PastePlan& plan,
                          std::span<const SpriteObject> bank,
                          const CompositeOptions& options, RngStream& rng);

}  // namespace crowdpaste
