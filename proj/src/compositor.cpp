#include "crowdpaste/compositor.hpp"

#include <algorithm>
#include <cmath>

#include "crowdpaste/error.hpp"

namespace crowdpaste {

void ColorJitter::validate() const {
  if (!(hue_shift_deg >= -360.0 && hue_shift_deg <= 360.0)) {
    throw ConfigError("jitter.hue_shift_deg must be in [-360, 360]");
  }
  if (!(saturation_scale > 0.0)) {
    throw ConfigError("jitter.saturation_scale must be > 0");
  }
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    throw ConfigError("jitter.apply_probability must be in [0, 1]");
  }
}

Extent scaled_extent(int width, int height, int target_size) {
  target_size = std::max(target_size, 1);
  auto minor = [target_size](int small, int large) {
    const double scaled = static_cast<double>(small) * target_size / large;
    return std::max(1, static_cast<int>(std::lround(scaled)));
  };
  if (width >= height) return {target_size, minor(height, width)};
  return {minor(width, height), target_size};
}

SpriteObject scale_sprite(const SpriteObject& sprite, int target_size) {
  const Extent e = scaled_extent(sprite.width(), sprite.height(), target_size);
  if (e.width == sprite.width() && e.height == sprite.height()) return sprite;
  SpriteObject out{RgbImage(e.width, e.height), BinaryMask(e.width, e.height),
                   sprite.source_id};
  const std::int64_t sw = sprite.width();
  const std::int64_t sh = sprite.height();
  for (int y = 0; y < e.height; ++y) {
    const int sy = static_cast<int>(
        std::min<std::int64_t>(sh - 1, (2 * y + 1) * sh / (2 * e.height)));
    for (int x = 0; x < e.width; ++x) {
      const int sx = static_cast<int>(
          std::min<std::int64_t>(sw - 1, (2 * x + 1) * sw / (2 * e.width)));
      out.pixels.set(x, y, sprite.pixels.at(sx, sy));
      out.alpha.set(x, y, sprite.alpha.at(sx, sy));
    }
  }
  return out;
}

namespace {

struct Hsv {
  double h;  // degrees [0, 360)
  double s;
  double v;
};

Hsv to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double delta = hi - lo;
  double h = 0.0;
  if (delta > 0.0) {
    if (hi == r) {
      h = 60.0 * std::fmod((g - b) / delta, 6.0);
    } else if (hi == g) {
      h = 60.0 * ((b - r) / delta + 2.0);
    } else {
      h = 60.0 * ((r - g) / delta + 4.0);
    }
  }
  if (h < 0.0) h += 360.0;
  return {h, hi > 0.0 ? delta / hi : 0.0, hi};
}

Rgb to_rgb(const Hsv& hsv) {
  const double c = hsv.v * hsv.s;
  const double hp = hsv.h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = hsv.v - c;
  auto to_byte = [m](double v) {
    return static_cast<std::uint8_t>(
        std::clamp(std::lround((v + m) * 255.0), 0L, 255L));
  };
  return {to_byte(r), to_byte(g), to_byte(b)};
}

}  // namespace

SpriteObject jitter_colors(const SpriteObject& sprite,
                           const ColorJitter& jitter, RngStream& rng) {
  const bool apply = rng.bernoulli(jitter.apply_probability);
  if (!apply) return sprite;
  SpriteObject out = sprite;
  double shift = std::fmod(jitter.hue_shift_deg, 360.0);
  if (shift < 0.0) shift += 360.0;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!out.alpha.at(x, y)) continue;
      Hsv hsv = to_hsv(out.pixels.at(x, y));
      hsv.h = std::fmod(hsv.h + shift, 360.0);
      hsv.s = std::min(1.0, hsv.s * jitter.saturation_scale);
      out.pixels.set(x, y, to_rgb(hsv));
    }
  }
  return out;
}

AugmentedSample composite(const RgbImage& base,
                          std::span<const NormalizedLabel> base_labels,
                          const PastePlan& plan,
                          std::span<const SpriteObject> bank,
                          const CompositeOptions& options, RngStream& rng) {
  if (plan.image_w != base.width() || plan.image_h != base.height()) {
    throw DataError("plan " + plan.image_id + " is for a " +
                    std::to_string(plan.image_w) + "x" +
                    std::to_string(plan.image_h) + " image but the base is " +
                    std::to_string(base.width()) + "x" +
                    std::to_string(base.height()));
  }
  AugmentedSample sample{base,
                         {base_labels.begin(), base_labels.end()},
                         plan};
  const int w = base.width();
  const int h = base.height();
  for (const PlacedObject* obj : plan.in_paste_order()) {
    if (obj->sprite_ref < 0 ||
        obj->sprite_ref >= static_cast<int>(bank.size())) {
      throw DataError("plan " + plan.image_id + " references sprite " +
                      std::to_string(obj->sprite_ref) + " but the bank has " +
                      std::to_string(bank.size()));
    }
    const SpriteObject sprite = jitter_colors(
        scale_sprite(bank[obj->sprite_ref], obj->size), options.jitter, rng);
    const auto [ox, oy] =
        paste_origin(obj->x, obj->y, {sprite.width(), sprite.height()});
    for (int y = 0; y < sprite.height(); ++y) {
      const int iy = oy + y;
      if (iy < 0 || iy >= h) continue;
      for (int x = 0; x < sprite.width(); ++x) {
        const int ix = ox + x;
        if (ix < 0 || ix >= w || !sprite.alpha.at(x, y)) continue;
        sample.image.set(ix, iy, sprite.pixels.at(x, y));
      }
    }
    if (auto box = visible_alpha_box(sprite.alpha, ox, oy, w, h,
                                     options.visibility_threshold)) {
      sample.labels.push_back(
          to_normalized(*box, w, h, options.pasted_class_id));
    }
  }
  return sample;
}

}  // namespace crowdpaste
