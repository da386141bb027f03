// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/linalg.hpp"

#include <cmath>
#include <limits>

namespace xlmimo {

CMatrix sample_cgauss(Rng& rng, int rows, int cols, double variance) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("sample_cgauss: empty shape");
  if (variance < 0.0) throw std::invalid_argument("sample_cgauss: negative variance");
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.cgaussian(variance);
  return m;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_sqrt: not square");
  const double scale = a.norm();
  if ((a - a.adjoint()).norm() > 1e-8 * std::max(scale, 1e-300))
    throw std::invalid_argument("hermitian_sqrt: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");

  Eigen::VectorXd values = eig.eigenvalues();
  const double vmax = std::max(values.maxCoeff(), 0.0);
  if (values.minCoeff() < -1e-10 * std::max(vmax, 1e-300))
    throw std::invalid_argument("hermitian_sqrt: input is not positive semidefinite");

  for (int i = 0; i < values.size(); ++i)
    values(i) = std::sqrt(std::max(values(i), 0.0));
  CMatrix b = eig.eigenvectors() * values.asDiagonal() *
              eig.eigenvectors().adjoint();
  // Symmetrize away the last few ulps of the triple product.
  return 0.5 * (b + CMatrix(b.adjoint()));
}

ZfFilter solve_projected_zf(const CMatrix& h, int column) {
  const int users = static_cast<int>(h.cols());
  if (column < 0 || column >= users)
    throw std::invalid_argument("solve_projected_zf: column out of range");

  const CVector target = h.col(column);
  ZfFilter out;
  if (users == 1) {
    const double energy = target.squaredNorm();
    if (energy <= 0.0) throw SingularChannelError("solve_projected_zf: zero channel column", 0.0);
    out.filter = target.adjoint() / energy;
    out.gain = energy;
    return out;
  }

  CMatrix others(h.rows(), users - 1);
  for (int k = 0, j = 0; k < users; ++k)
    if (k != column) others.col(j++) = h.col(k);

  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(others);
  cod.setThreshold(1e-10);
  if (cod.rank() < others.cols()) {
    Eigen::JacobiSVD<CMatrix> svd(others);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                : std::numeric_limits<double>::infinity();
    throw SingularChannelError("solve_projected_zf: interferer block is rank deficient", cond);
  }

  const CVector projected = target - others * cod.solve(target);
  const double gain = projected.squaredNorm();
  if (gain <= 1e-20 * target.squaredNorm()) {
    Eigen::JacobiSVD<CMatrix> svd(h);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                : std::numeric_limits<double>::infinity();
    throw SingularChannelError("solve_projected_zf: column lies in the interferer span", cond);
  }
  out.filter = projected.adjoint() / gain;
  out.gain = gain;
  return out;
}

}  // namespace xlmimo
