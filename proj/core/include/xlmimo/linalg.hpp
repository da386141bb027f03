// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_LINALG_HPP
#define XLMIMO_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "xlmimo/rng.hpp"

namespace xlmimo {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when a channel (sub)matrix is too close to rank deficiency for
/// the requested projection or inversion.
class SingularChannelError : public std::runtime_error {
 public:
  SingularChannelError(const std::string& what, double condition_number)
      : std::runtime_error(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

/// Matrix with i.i.d. circularly symmetric complex Gaussian entries of the
/// given per-entry variance (real and imaginary parts carry half each).
/// Entries are drawn row by row so the layout is reproducible.
CMatrix sample_cgauss(Rng& rng, int rows, int cols, double variance);

/// Hermitian square root of a Hermitian PSD matrix via eigendecomposition.
/// Eigenvalues within -1e-10 * max of zero are clamped to zero; anything
/// more negative raises, as does a non-Hermitian input.
CMatrix hermitian_sqrt(const CMatrix& a);

struct ZfFilter {
  Eigen::RowVectorXcd filter;  // h_k^H Pperp / (h_k^H Pperp h_k)
  double gain = 0.0;           // h_k^H Pperp h_k
};

/// Zero-forcing filter row for one column of H: project the column onto the
/// orthogonal complement of the remaining columns and normalize to unit
/// response. The projection is a least-squares solve, never an explicit
/// Gram inverse. Rank deficiency of the interferer block raises
/// SingularChannelError with its condition number.
ZfFilter solve_projected_zf(const CMatrix& h, int column);

}  // namespace xlmimo

#endif  // XLMIMO_LINALG_HPP
