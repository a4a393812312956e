#include "crowdpaste/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "crowdpaste/error.hpp"

namespace crowdpaste {

bool intersects(const BoundingBox& a, const BoundingBox& b) {
  return a.x_min < b.x_end() && b.x_min < a.x_end() && a.y_min < b.y_end() &&
         b.y_min < a.y_end();
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t iw =
      std::max(0, std::min(a.x_end(), b.x_end()) - std::max(a.x_min, b.x_min));
  const std::int64_t ih =
      std::max(0, std::min(a.y_end(), b.y_end()) - std::max(a.y_min, b.y_min));
  const std::int64_t inter = iw * ih;
  if (inter == 0) return 0.0;
  return static_cast<double>(inter) /
         static_cast<double>(a.area() + b.area() - inter);
}

std::optional<BoundingBox> clip_to_image(const BoundingBox& box, int image_w,
                                         int image_h,
                                         double visibility_threshold) {
  const int x0 = std::max(box.x_min, 0);
  const int y0 = std::max(box.y_min, 0);
  const int x1 = std::min(box.x_end(), image_w);
  const int y1 = std::min(box.y_end(), image_h);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  BoundingBox clipped{x0, y0, x1 - x0, y1 - y0};
  if (static_cast<double>(clipped.area()) <
      visibility_threshold * static_cast<double>(box.area())) {
    return std::nullopt;
  }
  return clipped;
}

std::int64_t BinaryMask::count() const {
  return std::count(bits_.begin(), bits_.end(), std::uint8_t{1});
}

BinaryMask mask_from_raster(const RasterImage& raster) {
  BinaryMask mask(raster.width, raster.height);
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      int value = raster.sample(x, y, 0);
      if (raster.channels >= 3) {
        value = (299 * raster.sample(x, y, 0) + 587 * raster.sample(x, y, 1) +
                 114 * raster.sample(x, y, 2)) /
                1000;
      }
      mask.set(x, y, value > 127);
    }
  }
  return mask;
}

BinaryMask read_mask(const std::filesystem::path& path) {
  return mask_from_raster(read_raster(path));
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) {
    parent[b] = a;
  } else {
    parent[a] = b;
  }
}

}  // namespace

// Two-pass labeling with union-find over provisional labels.
ComponentLabeling label_components(const BinaryMask& mask,
                                   const ComponentOptions& options) {
  const int w = mask.width();
  const int h = mask.height();
  ComponentLabeling out;
  out.width = w;
  out.height = h;
  out.labels.assign(static_cast<std::size_t>(w) * h, 0);
  const bool eight = options.connectivity == Connectivity::kEight;

  std::vector<int> parent{0};
  auto label = [&](int x, int y) -> int& {
    return out.labels[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      int neighbors[4];
      int n = 0;
      if (x > 0 && label(x - 1, y)) neighbors[n++] = label(x - 1, y);
      if (y > 0) {
        if (label(x, y - 1)) neighbors[n++] = label(x, y - 1);
        if (eight && x > 0 && label(x - 1, y - 1)) {
          neighbors[n++] = label(x - 1, y - 1);
        }
        if (eight && x + 1 < w && label(x + 1, y - 1)) {
          neighbors[n++] = label(x + 1, y - 1);
        }
      }
      if (n == 0) {
        const int fresh = static_cast<int>(parent.size());
        parent.push_back(fresh);
        label(x, y) = fresh;
        continue;
      }
      const int first = *std::min_element(neighbors, neighbors + n);
      label(x, y) = first;
      for (int i = 0; i < n; ++i) unite(parent, first, neighbors[i]);
    }
  }

  struct Extent {
    int x0, y0, x1, y1;
    std::int64_t area = 0;
  };
  std::vector<Extent> extents(parent.size(), Extent{w, h, -1, -1});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int& l = label(x, y);
      if (!l) continue;
      l = find_root(parent, l);
      Extent& e = extents[l];
      e.x0 = std::min(e.x0, x);
      e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x);
      e.y1 = std::max(e.y1, y);
      ++e.area;
    }
  }

  for (int root = 1; root < static_cast<int>(parent.size()); ++root) {
    if (parent[root] != root) continue;
    const Extent& e = extents[root];
    if (e.area < options.min_area) {
      ++out.dropped;
      continue;
    }
    out.components.push_back(
        {BoundingBox{e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1}, e.area,
         root});
  }
  // Roots are discovered in raster order, so a stable sort keeps ties
  // deterministic.
  std::stable_sort(out.components.begin(), out.components.end(),
                   [](const Component& a, const Component& b) {
                     if (a.box.y_min != b.box.y_min) {
                       return a.box.y_min < b.box.y_min;
                     }
                     return a.box.x_min < b.box.x_min;
                   });

  std::vector<int> remap(parent.size(), 0);
  for (std::size_t i = 0; i < out.components.size(); ++i) {
    remap[out.components[i].label] = static_cast<int>(i) + 1;
    out.components[i].label = static_cast<int>(i) + 1;
  }
  for (int& l : out.labels) l = remap[l];
  return out;
}

std::vector<BoundingBox> extract_components(const BinaryMask& mask,
                                            const ComponentOptions& options) {
  std::vector<BoundingBox> boxes;
  for (const Component& c : label_components(mask, options).components) {
    boxes.push_back(c.box);
  }
  return boxes;
}

NormalizedLabel to_normalized(const BoundingBox& box, int image_w, int image_h,
                              int class_id) {
  if (!box.fits(image_w, image_h)) {
    std::ostringstream msg;
    msg << "box (" << box.x_min << "," << box.y_min << "," << box.width << ","
        << box.height << ") is out of bounds for " << image_w << "x"
        << image_h << " image";
    throw DataError(msg.str());
  }
  const double w = image_w;
  const double h = image_h;
  return {class_id, (box.x_min + box.width / 2.0) / w,
          (box.y_min + box.height / 2.0) / h, box.width / w, box.height / h};
}

BoundingBox denormalize(const NormalizedLabel& label, int image_w,
                        int image_h) {
  auto edges = [](double center, double extent, int size) {
    const double lo = (center - extent / 2.0) * size;
    const double hi = (center + extent / 2.0) * size;
    const int begin = std::clamp(static_cast<int>(std::lround(lo)), 0,
                                 std::max(size - 1, 0));
    const int end =
        std::clamp(static_cast<int>(std::lround(hi)), begin + 1, size);
    return std::pair{begin, end - begin};
  };
  const auto [x, w] = edges(label.x_center, label.w, image_w);
  const auto [y, h] = edges(label.y_center, label.h, image_h);
  return {x, y, w, h};
}

std::string format_labels(std::span<const NormalizedLabel> labels) {
  std::string out;
  char line[128];
  for (const NormalizedLabel& l : labels) {
    const int n = std::snprintf(line, sizeof(line), "%d %.6f %.6f %.6f %.6f\n",
                                l.class_id, l.x_center, l.y_center, l.w, l.h);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

namespace {

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<NormalizedLabel> parse_labels(const std::string& text,
                                          const std::string& source_name) {
  std::vector<NormalizedLabel> labels;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::istringstream tokens(line);
    for (std::string t; tokens >> t;) fields.push_back(t);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      throw ParseError(source_name, line_no,
                       "expected 5 fields, got " +
                           std::to_string(fields.size()));
    }
    NormalizedLabel label;
    double* values[] = {&label.x_center, &label.y_center, &label.w, &label.h};
    if (!parse_number(fields[0], label.class_id) || label.class_id < 0) {
      throw ParseError(source_name, line_no,
                       "invalid class id '" + fields[0] + "'");
    }
    for (int i = 0; i < 4; ++i) {
      if (!parse_number(fields[i + 1], *values[i]) ||
          !std::isfinite(*values[i])) {
        throw ParseError(source_name, line_no,
                         "invalid number '" + fields[i + 1] + "'");
      }
    }
    if (label.w <= 0.0 || label.h <= 0.0) {
      throw ParseError(source_name, line_no, "non-positive box extent");
    }
    labels.push_back(label);
  }
  return labels;
}

void write_labels(std::span<const NormalizedLabel> labels,
                  const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + destination.string());
  const std::string text = format_labels(labels);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + destination.string());
}

std::vector<NormalizedLabel> read_normalized_labels(
    const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw IoError("cannot read " + source.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_labels(buffer.str(), source.string());
}

std::vector<BoundingBox> read_labels(const std::filesystem::path& source,
                                     int image_w, int image_h) {
  std::vector<BoundingBox> boxes;
  for (const NormalizedLabel& l : read_normalized_labels(source)) {
    boxes.push_back(denormalize(l, image_w, image_h));
  }
  return boxes;
}

}  // namespace crowdpaste
