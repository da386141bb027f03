// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_CONSTELLATION_HPP
#define XLMIMO_CONSTELLATION_HPP

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace xlmimo {

/// Finite symbol alphabet with unit average energy.
struct Constellation {
  std::vector<std::complex<double>> points;

  static Constellation qpsk();
  static Constellation psk(int order);
  static Constellation qam16();
  static Constellation from_name(std::string_view name);

  int size() const { return static_cast<int>(points.size()); }

  /// Index of the closest point; exact ties resolve to the lowest index.
  int nearest(std::complex<double> value) const;

  /// Enforces distinct points and (1/|A|) sum |a|^2 == 1.
  void validate() const;
};

/// Discrete belief over the constellation, indexed in point order.
struct SymbolPmf {
  std::vector<double> w;

  static SymbolPmf uniform(int size);
  static SymbolPmf delta(int size, int index);

  int size() const { return static_cast<int>(w.size()); }
  double operator[](int i) const { return w[i]; }

  void normalize();
  bool is_delta() const;
};

struct PmfMoments {
  std::complex<double> mean;
  double variance = 0.0;
};

/// Mean and variance of the symbol under the given belief.
PmfMoments pmf_moments(const SymbolPmf& q, const Constellation& a);

/// Belief proportional to exp(-|a - mu|^2 / var) over the alphabet,
/// computed in the log domain with max-exponent subtraction.
SymbolPmf gaussian_to_pmf(std::complex<double> mu, double var, const Constellation& a);

}  // namespace xlmimo

#endif  // XLMIMO_CONSTELLATION_HPP
