#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdpaste/image.hpp"

namespace crowdpaste {

// Axis-aligned pixel rectangle covering columns [x_min, x_min + width) and
// rows [y_min, y_min + height). Boxes bound to an image have non-negative
// origin and lie inside it; unclipped placement rectangles may not.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int width = 1;
  int height = 1;

  int x_end() const { return x_min + width; }
  int y_end() const { return y_min + height; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(width) * height;
  }
  bool contains(int x, int y) const {
    return x >= x_min && x < x_end() && y >= y_min && y < y_end();
  }
  bool fits(int image_w, int image_h) const {
    return width >= 1 && height >= 1 && x_min >= 0 && y_min >= 0 &&
           x_end() <= image_w && y_end() <= image_h;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

bool intersects(const BoundingBox& a, const BoundingBox& b);

// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

// Clips `box` to the image. Returns nullopt when nothing remains or when the
// visible area is below `visibility_threshold` times the original area.
std::optional<BoundingBox> clip_to_image(const BoundingBox& box, int image_w,
                                         int image_h,
                                         double visibility_threshold);

struct NormalizedLabel {
  int class_id = 0;
  double x_center = 0.0;
  double y_center = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const NormalizedLabel&,
                         const NormalizedLabel&) = default;
};

// Row-major foreground grid.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width),
        height_(height),
        bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  std::int64_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Foreground = any sample > 127. Color rasters are reduced to luma first.
BinaryMask mask_from_raster(const RasterImage& raster);
BinaryMask read_mask(const std::filesystem::path& path);

enum class Connectivity { kFour = 4, kEight = 8 };

struct ComponentOptions {
  Connectivity connectivity = Connectivity::kEight;
  std::int64_t min_area = 9;
};

struct Component {
  BoundingBox box;
  std::int64_t area = 0;
  // Label value of this component's cells in ComponentLabeling::labels.
  int label = 0;
};

struct ComponentLabeling {
  int width = 0;
  int height = 0;
  // Per-cell label, 0 for background, otherwise 1-based component label.
  std::vector<int> labels;
  // Kept components sorted by (y_min, x_min); see extract_components.
  std::vector<Component> components;
  // Number of components dropped by the min_area filter.
  int dropped = 0;

  int label_at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

ComponentLabeling label_components(const BinaryMask& mask,
                                   const ComponentOptions& options = {});

// Tight boxes of connected foreground components, sorted by (y_min, x_min).
std::vector<BoundingBox> extract_components(
    const BinaryMask& mask, const ComponentOptions& options = {});

// Throws DataError if the box does not fit the image.
NormalizedLabel to_normalized(const BoundingBox& box, int image_w, int image_h,
                              int class_id = 0);

// Inverse of to_normalized, rounding edges to the nearest pixel and clamping
// to the image.
BoundingBox denormalize(const NormalizedLabel& label, int image_w,
                        int image_h);

// "class x y w h\n" per label with six fractional digits.
std::string format_labels(std::span<const NormalizedLabel> labels);
std::vector<NormalizedLabel> parse_labels(const std::string& text,
                                          const std::string& source_name);

void write_labels(std::span<const NormalizedLabel> labels,
                  const std::filesystem::path& destination);
std::vector<NormalizedLabel> read_normalized_labels(
    const std::filesystem::path& source);
std::vector<BoundingBox> read_labels(const std::filesystem::path& source,
                                     int image_w, int image_h);

}  // namespace crowdpaste
