#pragma once

// Synthetic sprites and datasets shared by tests.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crowdpaste/annotations.hpp"
#include "crowdpaste/image.hpp"
#include "crowdpaste/object_bank.hpp"

namespace crowdpaste::testing {

inline SpriteObject solid_sprite(int w, int h, Rgb color) {
  return {RgbImage(w, h, color), BinaryMask(w, h, true), "solid"};
}

// Filled ellipse inscribed in a w x h box; tight by construction.
inline SpriteObject ellipse_sprite(int w, int h, Rgb color) {
  SpriteObject s{RgbImage(w, h), BinaryMask(w, h), "ellipse"};
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double rx = std::max(w / 2.0, 0.5), ry = std::max(h / 2.0, 0.5);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (x - cx) / rx, dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) {
        s.alpha.set(x, y, true);
        s.pixels.set(x, y, color);
      }
    }
  }
  return s;
}

inline std::vector<SpriteObject> ellipse_bank() {
  return {ellipse_sprite(60, 30, {250, 120, 20}),
          ellipse_sprite(40, 40, {20, 60, 240}),
          ellipse_sprite(25, 70, {200, 30, 200}),
          ellipse_sprite(90, 50, {240, 240, 10})};
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "crowdpaste_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Writes a dataset of `count` images with elliptical "fish" masks under
// root/images and root/masks. Image i holds i % 4 fish (so some images are
// empty) on a dark blue background.
inline void write_fish_dataset(const std::filesystem::path& root, int count,
                               int width = 160, int height = 128,
                               unsigned seed = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  std::mt19937 gen(seed);
  for (int i = 0; i < count; ++i) {
    RgbImage img(width, height, {10, 30, 60});
    RasterImage mask{width, height, 1,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
    // Deterministic texture so pixels differ across the frame.
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        img.set(x, y, {static_cast<std::uint8_t>(10 + (x * 7 + y * 3) % 20),
                       static_cast<std::uint8_t>(30 + (x + 2 * y) % 25), 60});
      }
    }
    const int fish = i % 4;
    for (int f = 0; f < fish; ++f) {
      const int fw = std::uniform_int_distribution<int>(14, 30)(gen);
      const int fh = std::uniform_int_distribution<int>(8, 16)(gen);
      // Fish live in separate horizontal bands so they never touch.
      const int band = height / 3;
      const int x0 = std::uniform_int_distribution<int>(0, width - fw)(gen);
      const int y0 = f * band + std::uniform_int_distribution<int>(0, band - fh)(gen);
      const Rgb color{static_cast<std::uint8_t>(180 + f * 20),
                      static_cast<std::uint8_t>(150 - f * 30), 40};
      const SpriteObject shape = ellipse_sprite(fw, fh, color);
      for (int y = 0; y < fh; ++y) {
        for (int x = 0; x < fw; ++x) {
          if (!shape.alpha.at(x, y)) continue;
          img.set(x0 + x, y0 + y, color);
          mask.data[static_cast<std::size_t>(y0 + y) * width + x0 + x] = 255;
        }
      }
    }
    char stem[32];
    std::snprintf(stem, sizeof(stem), "img%03d", i);
    write_rgb_png(root / "images" / (std::string(stem) + ".png"), img);
    write_png(root / "masks" / (std::string(stem) + ".png"), mask);
  }
}

}  // namespace crowdpaste::testing
