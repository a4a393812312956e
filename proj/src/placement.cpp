#include "crowdpaste/placement.hpp"

#include <algorithm>
#include <cmath>

#include "crowdpaste/compositor.hpp"
#include "crowdpaste/error.hpp"
#include "crowdpaste/object_bank.hpp"

namespace crowdpaste {

const char* engine_name(Engine engine) {
  return engine == Engine::kPsada ? "psada" : "deng";
}

Engine parse_engine(std::string_view name) {
  if (name == "psada") return Engine::kPsada;
  if (name == "deng") return Engine::kDeng;
  throw ConfigError("unknown engine '" + std::string(name) +
                    "' (expected psada or deng)");
}

const char* acceptance_name(Acceptance a) {
  switch (a) {
    case Acceptance::kOverlap: return "overlap";
    case Acceptance::kAnnealing: return "annealing";
    case Acceptance::kFallback: return "fallback";
  }
  return "?";
}

Acceptance parse_acceptance(std::string_view name) {
  if (name == "overlap") return Acceptance::kOverlap;
  if (name == "annealing") return Acceptance::kAnnealing;
  if (name == "fallback") return Acceptance::kFallback;
  throw DataError("unknown acceptance kind '" + std::string(name) + "'");
}

std::size_t PastePlan::object_count() const {
  std::size_t n = 0;
  for (const PlacementGroup& g : groups) n += g.objects.size();
  return n;
}

std::vector<const PlacedObject*> PastePlan::in_paste_order() const {
  std::vector<const PlacedObject*> out;
  for (const PlacementGroup& g : groups) {
    for (const PlacedObject& o : g.objects) out.push_back(&o);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PlacedObject* a, const PlacedObject* b) {
                     return a->paste_order < b->paste_order;
                   });
  return out;
}

namespace {

struct Anchor {
  int x = 0;
  int y = 0;
};

Anchor clamp_to_image(Point p, int image_w, int image_h) {
  return {std::clamp(static_cast<int>(std::lround(p.x)), 0, image_w - 1),
          std::clamp(static_cast<int>(std::lround(p.y)), 0, image_h - 1)};
}

// Nearest pixel inside footprint ∩ image. The center lies in the image and in
// its footprint, so the intersection is never empty.
Anchor clamp_into_footprint(Anchor a, const GroupCenter& center, int image_w,
                            int image_h) {
  const BoundingBox fp = center.footprint();
  const int x_lo = std::max(fp.x_min, 0);
  const int x_hi = std::min(fp.x_end(), image_w) - 1;
  const int y_lo = std::max(fp.y_min, 0);
  const int y_hi = std::min(fp.y_end(), image_h) - 1;
  return {std::clamp(a.x, x_lo, x_hi), std::clamp(a.y, y_lo, y_hi)};
}

void check_bank(int bank_size) {
  if (bank_size < 1) throw DataError("object bank is empty");
}

}  // namespace

PastePlan plan_psada(int image_w, int image_h, int bank_size,
                     const PsadaParams& params, RngStream& rng) {
  params.validate();
  check_bank(bank_size);
  if (image_w < 64 || image_h < 64) {
    throw DataError("PSADA needs an image of at least 64x64, got " +
                    std::to_string(image_w) + "x" + std::to_string(image_h));
  }
  PastePlan plan;
  plan.image_w = image_w;
  plan.image_h = image_h;
  plan.params = params;
  plan.seed = {rng.master_seed(), rng.stream_index()};

  // Every group holds at least one object, so |C| cannot exceed the budget.
  const int group_count =
      std::min(sample_group_count(rng, params.lambda), params.max_objects);
  if (group_count == 0) return plan;

  const int min_size = params.min_size_px;
  const int size_cap = std::max(min_size, std::min(image_w, image_h) / 4);
  const int margin = min_size / 2;
  for (int i = 0; i < group_count; ++i) {
    GroupCenter c;
    c.x = static_cast<int>(rng.uniform_int(margin, image_w - 1 - margin));
    c.y = static_cast<int>(rng.uniform_int(margin, image_h - 1 - margin));
    c.size = static_cast<int>(rng.uniform_int(min_size, size_cap));
    c.footprint_w = c.size;
    c.footprint_h = c.size;
    plan.groups.push_back({c, {}});
  }

  const int per_group_cap =
      (params.max_objects + group_count - 1) / group_count;
  int remaining = params.max_objects;
  double temperature = params.initial_temperature;
  int paste_order = 0;
  for (int gi = 0; gi < group_count; ++gi) {
    PlacementGroup& group = plan.groups[gi];
    const GroupCenter& c = group.center;
    const int groups_after = group_count - gi - 1;
    int count = static_cast<int>(rng.uniform_int(1, per_group_cap));
    count = std::min(count, remaining - groups_after);
    remaining -= count;

    const BoundingBox footprint = c.footprint();
    const double reach = params.tau * c.size;
    for (int j = 0; j < count; ++j) {
      PlacedObject obj;
      obj.sprite_ref = static_cast<int>(rng.uniform_int(0, bank_size - 1));
      obj.size = sample_size(rng, c.size, params.sigma_px, min_size);
      obj.group_index = gi;
      obj.paste_order = paste_order++;
      obj.temperature = temperature;

      Anchor anchor;
      bool placed = false;
      for (int p = 1; p <= params.max_proposals && !placed; ++p) {
        obj.proposals = p;
        anchor = clamp_to_image(sample_window(rng, c.x, c.y, c.size, c.size,
                                              params.tau, params.epsilon),
                                image_w, image_h);
        if (footprint.contains(anchor.x, anchor.y)) {
          obj.accepted_by = Acceptance::kOverlap;
          placed = true;
          break;
        }
        const double distance =
            std::hypot(anchor.x - c.x, anchor.y - c.y) / reach;
        if (rng.bernoulli(acceptance_probability(distance, temperature))) {
          obj.accepted_by = Acceptance::kAnnealing;
          placed = true;
        }
      }
      if (!placed) {
        anchor = clamp_into_footprint(anchor, c, image_w, image_h);
        obj.accepted_by = Acceptance::kFallback;
      }
      obj.x = anchor.x;
      obj.y = anchor.y;
      group.objects.push_back(obj);
      temperature = next_temperature(temperature, params.gamma);
    }
  }
  return plan;
}

PastePlan plan_deng(int image_w, int image_h,
                    std::span<const BoundingBox> existing, int bank_size,
                    const DengParams& params, RngStream& rng) {
  params.validate();
  check_bank(bank_size);
  PastePlan plan;
  plan.image_w = image_w;
  plan.image_h = image_h;
  plan.params = params;
  plan.seed = {rng.master_seed(), rng.stream_index()};

  std::vector<BoundingBox> sources;
  for (const BoundingBox& box : existing) {
    if (auto clipped = clip_to_image(box, image_w, image_h, 0.0)) {
      sources.push_back(*clipped);
    }
  }
  if (sources.empty()) return plan;

  const int group_count =
      static_cast<int>(rng.uniform_int(0, params.max_groups));
  for (int i = 0; i < group_count; ++i) {
    const BoundingBox& box = sources[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(sources.size()) - 1))];
    GroupCenter c;
    c.x = box.x_min + box.width / 2;
    c.y = box.y_min + box.height / 2;
    c.size = std::max(box.width, box.height);
    c.footprint_w = box.width;
    c.footprint_h = box.height;
    plan.groups.push_back({c, {}});
  }

  int paste_order = 0;
  for (int gi = 0; gi < group_count; ++gi) {
    PlacementGroup& group = plan.groups[gi];
    const GroupCenter& c = group.center;
    const BoundingBox footprint = c.footprint();
    const int count =
        static_cast<int>(rng.uniform_int(0, params.max_objects_per_group));
    for (int j = 0; j < count; ++j) {
      PlacedObject obj;
      obj.sprite_ref = static_cast<int>(rng.uniform_int(0, bank_size - 1));
      const double relative = 1.0 + params.sigma_norm * rng.normal();
      obj.size = std::max(static_cast<int>(std::lround(c.size * relative)),
                          params.min_size_px);
      obj.group_index = gi;
      obj.paste_order = paste_order++;

      Anchor anchor;
      bool placed = false;
      for (int p = 1; p <= params.max_proposals; ++p) {
        obj.proposals = p;
        anchor = clamp_to_image(sample_window(rng, c.x, c.y, c.size, c.size,
                                              params.tau, params.epsilon),
                                image_w, image_h);
        if (footprint.contains(anchor.x, anchor.y)) {
          placed = true;
          break;
        }
      }
      obj.accepted_by = Acceptance::kOverlap;
      if (!placed) {
        anchor = clamp_into_footprint(anchor, c, image_w, image_h);
        obj.accepted_by = Acceptance::kFallback;
      }
      obj.x = anchor.x;
      obj.y = anchor.y;
      group.objects.push_back(obj);
    }
  }
  return plan;
}

std::optional<BoundingBox> visible_alpha_box(const BinaryMask& alpha,
                                             int origin_x, int origin_y,
                                             int image_w, int image_h,
                                             double visibility_threshold) {
  const std::optional<BoundingBox> hull = alpha_hull(alpha);
  if (!hull) return std::nullopt;
  int x0 = image_w, y0 = image_h, x1 = -1, y1 = -1;
  for (int y = hull->y_min; y < hull->y_end(); ++y) {
    const int iy = origin_y + y;
    if (iy < 0 || iy >= image_h) continue;
    for (int x = hull->x_min; x < hull->x_end(); ++x) {
      const int ix = origin_x + x;
      if (ix < 0 || ix >= image_w || !alpha.at(x, y)) continue;
      x0 = std::min(x0, ix);
      y0 = std::min(y0, iy);
      x1 = std::max(x1, ix);
      y1 = std::max(y1, iy);
    }
  }
  if (x1 < 0) return std::nullopt;
  const BoundingBox visible{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  if (static_cast<double>(visible.area()) <
      visibility_threshold * static_cast<double>(hull->area())) {
    return std::nullopt;
  }
  return visible;
}

namespace {

std::vector<RealizedObject> realize(const PastePlan& plan,
                                    std::span<const SpriteObject> bank,
                                    int image_w, int image_h,
                                    double visibility_threshold) {
  std::vector<RealizedObject> out;
  for (const PlacedObject* obj : plan.in_paste_order()) {
    if (obj->sprite_ref < 0 ||
        obj->sprite_ref >= static_cast<int>(bank.size())) {
      throw DataError("plan " + plan.image_id + " references sprite " +
                      std::to_string(obj->sprite_ref) + " but the bank has " +
                      std::to_string(bank.size()));
    }
    const SpriteObject scaled = scale_sprite(bank[obj->sprite_ref], obj->size);
    const auto [ox, oy] = paste_origin(
        obj->x, obj->y, {scaled.width(), scaled.height()});
    if (auto box = visible_alpha_box(scaled.alpha, ox, oy, image_w, image_h,
                                     visibility_threshold)) {
      out.push_back({obj, *box});
    }
  }
  return out;
}

}  // namespace

std::vector<RealizedObject> realize_plan(const PastePlan& plan,
                                         std::span<const SpriteObject> bank,
                                         double visibility_threshold) {
  return realize(plan, bank, plan.image_w, plan.image_h, visibility_threshold);
}

std::vector<BoundingBox> realized_boxes(const PastePlan& plan,
                                        std::span<const SpriteObject> bank,
                                        int image_w, int image_h,
                                        double visibility_threshold) {
  std::vector<BoundingBox> boxes;
  for (const RealizedObject& r :
       realize(plan, bank, image_w, image_h, visibility_threshold)) {
    boxes.push_back(r.box);
  }
  return boxes;
}

}  // namespace crowdpaste
