#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crowdpaste/annotations.hpp"
#include "crowdpaste/image.hpp"

namespace crowdpaste {

// A cut-out object: tight RGB crop plus binary alpha of the same size.
struct SpriteObject {
  RgbImage pixels;
  BinaryMask alpha;
  std::string source_id;

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
  // Object size used as the sampling scale: the larger dimension.
  int base_size() const { return std::max(width(), height()); }

  friend bool operator==(const SpriteObject&, const SpriteObject&) = default;
};

// Tight box around the true cells of `alpha`; nullopt if none.
std::optional<BoundingBox> alpha_hull(const BinaryMask& alpha);

// One sprite per connected mask component, in (y_min, x_min) order.
std::vector<SpriteObject> cut_sprites(const RgbImage& image,
                                      const BinaryMask& mask,
                                      const std::string& source_id,
                                      const ComponentOptions& options = {});

struct BankEntry {
  std::string path;  // relative to the bank directory
  std::string source_id;
  int width = 0;
  int height = 0;

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

struct BankManifest {
  static constexpr int kVersion = 1;

  int bank_version = kVersion;
  std::vector<BankEntry> entries;
};

inline constexpr const char* kBankManifestName = "manifest.json";
inline constexpr const char* kBankSpriteDir = "sprites";

// Writes sprites/<source_id>_<k>.png (RGBA, alpha 0 or 255) and
// manifest.json. Replaces any sprites left by a previous save.
BankManifest save_bank(std::span<const SpriteObject> sprites,
                       const std::filesystem::path& directory);

BankManifest read_bank_manifest(const std::filesystem::path& directory);

std::vector<SpriteObject> load_bank(const std::filesystem::path& directory);

}  // namespace crowdpaste
