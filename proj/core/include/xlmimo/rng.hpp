// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_RNG_HPP
#define XLMIMO_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace xlmimo {

/// Deterministic random source with splittable sub-streams.
///
/// Every distribution is generated from raw 64-bit engine output with a
/// fixed algorithm (no implementation-defined std:: distributions), so a
/// given seed and call sequence produces bit-identical values on any
/// platform. Sub-streams derived via split() depend only on the parent
/// key and the split labels, never on how much the parent has been
/// consumed, which makes per-(trial, sub-array) streams reproducible
/// under parallel execution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Derive an independent stream identified by (stream, substream).
  Rng split(std::uint64_t stream, std::uint64_t substream = 0) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi);

  /// Standard normal via Box-Muller (second value of each pair cached).
  double gaussian();
  double gaussian(double mean, double stddev);
  double lognormal(double log_mean, double log_sigma);

  /// Circularly symmetric complex Gaussian with the given total variance.
  std::complex<double> cgaussian(double variance);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace xlmimo

#endif  // XLMIMO_RNG_HPP
