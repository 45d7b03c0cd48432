#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace samaqm {

/// Named, seeded random stream.
///
/// Every stochastic consumer, such as a flow or a controller, draws from its
/// own stream derived from the run seed and a stream name. The same seed,
/// name and draw index always yield the same
/// value on every platform: the engine is std::mt19937_64 and all variate
/// transforms below are written out explicitly instead of going through the
/// implementation-defined <random> distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);

  std::uint64_t seed() const { return seed_; }

  /// Raw 64-bit draw.
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double exponential(double mean);

  /// Number of trials up to and including the first success; support {1, 2, ...}.
  std::uint64_t geometric(double mean);

  double normal(double mean, double stddev);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// splitmix64 finalizer; used to derive sub-stream seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace samaqm
