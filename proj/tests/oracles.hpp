#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "crowdpaste/annotations.hpp"

namespace crowdpaste::testing {

struct OracleComponent {
  BoundingBox box;
  std::int64_t area = 0;
  std::vector<std::pair<int, int>> cells;  // (x, y)
};

// Breadth-first flood fill from every unvisited foreground cell in raster
// order. Components come back sorted by (y_min, x_min), then discovery order.
inline std::vector<OracleComponent> flood_fill_components(
    const BinaryMask& mask, bool eight_connected, std::int64_t min_area) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<OracleComponent> out;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!mask.at(sx, sy) || seen[sy * w + sx]) continue;
      OracleComponent comp;
      std::vector<std::pair<int, int>> queue{{sx, sy}};
      seen[sy * w + sx] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto [x, y] = queue[head];
        comp.cells.push_back({x, y});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight_connected && dx != 0 && dy != 0) continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!mask.at(nx, ny) || seen[ny * w + nx]) continue;
            seen[ny * w + nx] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      int x0 = w, y0 = h, x1 = -1, y1 = -1;
      for (const auto& [x, y] : comp.cells) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
      comp.box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
      comp.area = static_cast<std::int64_t>(comp.cells.size());
      if (comp.area >= min_area) out.push_back(std::move(comp));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const OracleComponent& a, const OracleComponent& b) {
                     if (a.box.y_min != b.box.y_min) {
                       return a.box.y_min < b.box.y_min;
                     }
                     return a.box.x_min < b.box.x_min;
                   });
  return out;
}

inline BinaryMask random_mask(std::mt19937& gen, int max_side = 32) {
  std::uniform_int_distribution<int> side(1, max_side);
  std::uniform_real_distribution<double> density(0.05, 0.7);
  const int w = side(gen), h = side(gen);
  const double p = density(gen);
  std::bernoulli_distribution fg(p);
  BinaryMask mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mask.set(x, y, fg(gen));
  }
  return mask;
}

// Maximum-cardinality matching over pairs with iou >= threshold by
// exhaustive search. Instances must be small (<= ~8 per side).
inline int max_matching(const std::vector<BoundingBox>& predictions,
                        const std::vector<BoundingBox>& truths,
                        double threshold) {
  const int np = static_cast<int>(predictions.size());
  const int nt = static_cast<int>(truths.size());
  std::vector<std::vector<bool>> ok(np, std::vector<bool>(nt));
  for (int p = 0; p < np; ++p) {
    for (int t = 0; t < nt; ++t) {
      const double a = static_cast<double>(predictions[p].area());
      const double b = static_cast<double>(truths[t].area());
      const int iw = std::max(0, std::min(predictions[p].x_end(), truths[t].x_end()) -
                                     std::max(predictions[p].x_min, truths[t].x_min));
      const int ih = std::max(0, std::min(predictions[p].y_end(), truths[t].y_end()) -
                                     std::max(predictions[p].y_min, truths[t].y_min));
      const double inter = static_cast<double>(iw) * ih;
      ok[p][t] = inter > 0 && inter / (a + b - inter) >= threshold;
    }
  }
  std::function<int(int, unsigned)> best = [&](int p, unsigned used) -> int {
    if (p == np) return 0;
    int result = best(p + 1, used);
    for (int t = 0; t < nt; ++t) {
      if (ok[p][t] && !(used & (1u << t))) {
        result = std::max(result, 1 + best(p + 1, used | (1u << t)));
      }
    }
    return result;
  };
  return best(0, 0);
}

}  // namespace crowdpaste::testing
