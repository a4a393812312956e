#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crowdpaste {

// Deterministic random stream keyed by (master_seed, stream_index). Streams
// with different keys are statistically independent, so per-image work can
// run in any order or on any thread. Only the standard-specified mt19937_64
// and seed_seq are used; all distributions are implemented here so draws are
// identical across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint64_t salt = 0);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t salt() const { return salt_; }

  // A fresh stream with the same key and a different salt.
  RngStream derive(std::uint64_t salt) const {
    return RngStream(master_seed_, stream_index_, salt);
  }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform on [lo, hi); returns lo when hi == lo.
  double uniform(double lo, double hi);
  // Uniform integer on [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller.
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t salt_;
  std::mt19937_64 engine_;
};

// FNV-1a over (key, sample index). Stable across runs and platforms.
std::uint64_t stable_stream_index(std::string_view key, std::uint64_t sample);

struct PsadaParams {
  double lambda = 3.0;        // mean number of groups
  int max_objects = 12;       // total object budget M
  double sigma_px = 30.0;     // size std-dev in pixels
  double tau = 1.5;           // horizontal crowdedness factor
  double epsilon = 1.5;       // vertical crowdedness factor
  double initial_temperature = 1.0;
  double gamma = 0.95;        // temperature decay per pasted object
  int min_size_px = 8;
  int max_proposals = 20;

  // Throws ConfigError.
  void validate() const;
  friend bool operator==(const PsadaParams&, const PsadaParams&) = default;
};

struct DengParams {
  int max_groups = 5;               // N
  int max_objects_per_group = 6;    // M
  double sigma_norm = 0.2;          // relative size std-dev
  double tau = 1.5;
  double epsilon = 1.5;
  int min_size_px = 8;
  int max_proposals = 20;

  void validate() const;
  friend bool operator==(const DengParams&, const DengParams&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Poisson(lambda) by sequential-search inversion. Large lambda is split into
// chunks of at most 30 and summed, which is exact by additivity.
int sample_group_count(RngStream& rng, double lambda);

// Normal(center_size, sigma_px) rounded to whole pixels, clamped below at
// min_size_px.
int sample_size(RngStream& rng, int center_size, double sigma_px,
                int min_size_px);

double gaussian_pdf(double x, double mean, double sigma);

// x ~ U(cx - tau*d_w, cx + tau*d_w), y ~ U(cy - epsilon*d_h, cy + epsilon*d_h).
Point sample_window(RngStream& rng, double center_x, double center_y,
                    double d_w, double d_h, double tau, double epsilon);

double next_temperature(double temperature, double gamma);

// exp(-distance / temperature).
double acceptance_probability(double distance, double temperature);

}  // namespace crowdpaste
