#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gamma_glm {

/// Seeded random stream with platform-independent variates.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq, both of which
/// are fully specified by the standard. The distributions are implemented
/// here rather than taken from <random>, whose algorithms are left to the
/// library vendor.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Gamma(shape, scale = 1). Marsaglia-Tsang squeeze/rejection for
  /// shape >= 1; for shape < 1 the draw for shape + 1 is boosted by U^(1/shape).
  double gamma(double shape);

private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

} // namespace gamma_glm
