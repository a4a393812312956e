#include "crowdpaste/object_bank.hpp"

#include <fstream>
#include <map>
#include <system_error>

#include "crowdpaste/error.hpp"
#include "json.hpp"

namespace crowdpaste {

std::optional<BoundingBox> alpha_hull(const BinaryMask& alpha) {
  int x0 = alpha.width(), y0 = alpha.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < alpha.height(); ++y) {
    for (int x = 0; x < alpha.width(); ++x) {
      if (!alpha.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::vector<SpriteObject> cut_sprites(const RgbImage& image,
                                      const BinaryMask& mask,
                                      const std::string& source_id,
                                      const ComponentOptions& options) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw DataError("image " + source_id + " is " +
                    std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " but its mask is " +
                    std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()));
  }
  const ComponentLabeling labeling = label_components(mask, options);
  std::vector<SpriteObject> sprites;
  sprites.reserve(labeling.components.size());
  for (const Component& c : labeling.components) {
    SpriteObject sprite{RgbImage(c.box.width, c.box.height),
                        BinaryMask(c.box.width, c.box.height), source_id};
    for (int y = 0; y < c.box.height; ++y) {
      for (int x = 0; x < c.box.width; ++x) {
        const int sx = c.box.x_min + x;
        const int sy = c.box.y_min + y;
        if (labeling.label_at(sx, sy) != c.label) continue;
        sprite.pixels.set(x, y, image.at(sx, sy));
        sprite.alpha.set(x, y, true);
      }
    }
    sprites.push_back(std::move(sprite));
  }
  return sprites;
}

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

BankManifest save_bank(std::span<const SpriteObject> sprites,
                       const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path sprite_dir = directory / kBankSpriteDir;
  fs::remove_all(sprite_dir, ec);
  fs::create_directories(sprite_dir, ec);
  if (ec) throw IoError("cannot create " + sprite_dir.string());

  BankManifest manifest;
  std::map<std::string, int> next_index;
  for (const SpriteObject& sprite : sprites) {
    const int index = next_index[sprite.source_id]++;
    const std::string relative = std::string(kBankSpriteDir) + "/" +
                                 sprite.source_id + "_" +
                                 std::to_string(index) + ".png";
    RasterImage rgba{sprite.width(), sprite.height(), 4, {}};
    rgba.data.reserve(static_cast<std::size_t>(rgba.width) * rgba.height * 4);
    for (int y = 0; y < sprite.height(); ++y) {
      for (int x = 0; x < sprite.width(); ++x) {
        const Rgb c = sprite.pixels.at(x, y);
        rgba.data.insert(rgba.data.end(),
                         {c.r, c.g, c.b,
                          static_cast<std::uint8_t>(
                              sprite.alpha.at(x, y) ? 255 : 0)});
      }
    }
    write_png(directory / relative, rgba);
    manifest.entries.push_back(
        {relative, sprite.source_id, sprite.width(), sprite.height()});
  }

  json doc;
  doc["bank_version"] = manifest.bank_version;
  doc["entries"] = json::array();
  for (const BankEntry& e : manifest.entries) {
    doc["entries"].push_back({{"path", e.path},
                              {"source_id", e.source_id},
                              {"width", e.width},
                              {"height", e.height}});
  }
  write_text(directory / kBankManifestName, doc.dump(2) + "\n");
  return manifest;
}

BankManifest read_bank_manifest(const std::filesystem::path& directory) {
  const std::filesystem::path path = directory / kBankManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("missing bank manifest " + path.string());
  BankManifest manifest;
  try {
    const json doc = json::parse(in);
    manifest.bank_version = doc.at("bank_version").get<int>();
    for (const json& e : doc.at("entries")) {
      manifest.entries.push_back(
          {e.at("path").get<std::string>(),
           e.at("source_id").get<std::string>(), e.at("width").get<int>(),
           e.at("height").get<int>()});
    }
  } catch (const json::exception& err) {
    throw DataError("corrupt bank manifest " + path.string() + ": " +
                    err.what());
  }
  if (manifest.bank_version != BankManifest::kVersion) {
    throw DataError("unsupported bank version " +
                    std::to_string(manifest.bank_version) + " in " +
                    path.string());
  }
  return manifest;
}

std::vector<SpriteObject> load_bank(const std::filesystem::path& directory) {
  const BankManifest manifest = read_bank_manifest(directory);
  std::vector<SpriteObject> sprites;
  sprites.reserve(manifest.entries.size());
  for (const BankEntry& entry : manifest.entries) {
    RasterImage raster;
    try {
      raster = read_raster(directory / entry.path);
    } catch (const IoError& err) {
      throw DataError("bank entry " + entry.path + ": " + err.what());
    }
    if (raster.width != entry.width || raster.height != entry.height) {
      throw DataError("bank entry " + entry.path +
                      ": dimensions differ from manifest");
    }
    if (raster.channels != 4 && raster.channels != 2) {
      throw DataError("bank entry " + entry.path + ": no alpha channel");
    }
    SpriteObject sprite{to_rgb(raster), BinaryMask(raster.width, raster.height),
                        entry.source_id};
    const int alpha_channel = raster.channels - 1;
    for (int y = 0; y < raster.height; ++y) {
      for (int x = 0; x < raster.width; ++x) {
        sprite.alpha.set(x, y, raster.sample(x, y, alpha_channel) > 127);
      }
    }
    if (sprite.alpha.count() == 0) {
      throw DataError("bank entry " + entry.path + ": empty alpha");
    }
    sprites.push_back(std::move(sprite));
  }
  return sprites;
}

}  // namespace crowdpaste
