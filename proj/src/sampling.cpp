#include "crowdpaste/sampling.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "crowdpaste/error.hpp"

namespace crowdpaste {

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
                     std::uint64_t salt)
    : master_seed_(master_seed), stream_index_(stream_index), salt_(salt) {
  const std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(master_seed),
      static_cast<std::uint32_t>(master_seed >> 32),
      static_cast<std::uint32_t>(stream_index),
      static_cast<std::uint32_t>(stream_index >> 32),
      static_cast<std::uint32_t>(salt),
      static_cast<std::uint32_t>(salt >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ConfigError("uniform_int: empty range");
  const std::uint64_t span =
      static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::int64_t>(engine_());
  }
  const std::uint64_t range = span + 1;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % range);
}

double RngStream::normal() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t stable_stream_index(std::string_view key, std::uint64_t sample) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](unsigned char byte) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  };
  for (char c : key) feed(static_cast<unsigned char>(c));
  feed(0);
  for (char c : std::to_string(sample)) feed(static_cast<unsigned char>(c));
  return hash;
}

void PsadaParams::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("psada.lambda must be > 0");
  if (max_objects < 1) throw ConfigError("psada.max_objects must be >= 1");
  if (!(sigma_px > 0.0)) throw ConfigError("psada.sigma_px must be > 0");
  if (!(tau > 1.0)) throw ConfigError("psada.tau must be > 1");
  if (!(epsilon > 1.0)) throw ConfigError("psada.epsilon must be > 1");
  if (!(initial_temperature > 0.0)) {
    throw ConfigError("psada.initial_temperature must be > 0");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("psada.gamma must be in (0, 1)");
  }
  if (min_size_px < 1) throw ConfigError("psada.min_size_px must be >= 1");
  if (max_proposals < 1) throw ConfigError("psada.max_proposals must be >= 1");
}

void DengParams::validate() const {
  if (max_groups < 0) throw ConfigError("deng.max_groups must be >= 0");
  if (max_objects_per_group < 0) {
    throw ConfigError("deng.max_objects_per_group must be >= 0");
  }
  if (!(sigma_norm > 0.0)) throw ConfigError("deng.sigma_norm must be > 0");
  if (!(tau > 1.0)) throw ConfigError("deng.tau must be > 1");
  if (!(epsilon > 1.0)) throw ConfigError("deng.epsilon must be > 1");
  if (min_size_px < 1) throw ConfigError("deng.min_size_px must be >= 1");
  if (max_proposals < 1) throw ConfigError("deng.max_proposals must be >= 1");
}

namespace {

int poisson_inversion(RngStream& rng, double lambda) {
  const double u = rng.uniform01();
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= lambda / k;
    cdf += p;
  }
  return k;
}

}  // namespace

int sample_group_count(RngStream& rng, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("Poisson rate must be > 0");
  constexpr double kChunk = 30.0;
  int total = 0;
  double remaining = lambda;
  while (remaining > kChunk) {
    total += poisson_inversion(rng, kChunk);
    remaining -= kChunk;
  }
  return total + poisson_inversion(rng, remaining);
}

int sample_size(RngStream& rng, int center_size, double sigma_px,
                int min_size_px) {
  if (center_size < min_size_px) {
    throw ConfigError("center size below minimum size");
  }
  const double draw = center_size + sigma_px * rng.normal();
  const long rounded = std::lround(draw);
  return static_cast<int>(std::max<long>(rounded, min_size_px));
}

double gaussian_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

Point sample_window(RngStream& rng, double center_x, double center_y,
                    double d_w, double d_h, double tau, double epsilon) {
  const double half_w = tau * d_w;
  const double half_h = epsilon * d_h;
  const double x = rng.uniform(center_x - half_w, center_x + half_w);
  const double y = rng.uniform(center_y - half_h, center_y + half_h);
  return {x, y};
}

double next_temperature(double temperature, double gamma) {
  return temperature * gamma;
}

double acceptance_probability(double distance, double temperature) {
  return std::exp(-distance / temperature);
}

}  // namespace crowdpaste
