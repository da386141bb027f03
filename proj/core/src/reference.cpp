// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/reference.hpp"

#include <numeric>
#include <stdexcept>

namespace xlmimo {

namespace {

DetectionResult identity_order_result(int users, const Constellation& a) {
  DetectionResult r;
  r.symbols.resize(users);
  r.order.resize(users);
  std::iota(r.order.begin(), r.order.end(), 0);
  r.marginals.assign(users, SymbolPmf::uniform(a.size()));
  r.certainty.assign(users, 0.0);
  return r;
}

}  // namespace

DetectionResult central_mrc(const CVector& y, const CMatrix& h, const Constellation& a) {
  const int users = static_cast<int>(h.cols());
  DetectionResult r = identity_order_result(users, a);
  for (int k = 0; k < users; ++k) {
    const double energy = h.col(k).squaredNorm();
    if (energy <= 0.0) throw std::invalid_argument("central_mrc: zero channel column");
    const std::complex<double> estimate = h.col(k).dot(y) / energy;
    r.symbols[k] = a.nearest(estimate);
    r.marginals[k] = SymbolPmf::delta(a.size(), r.symbols[k]);
  }
  return r;
}

DetectionResult central_zf(const CVector& y, const CMatrix& h, const Constellation& a) {
  const int users = static_cast<int>(h.cols());
  DetectionResult r = identity_order_result(users, a);
  for (int k = 0; k < users; ++k) {
    const ZfFilter zf = solve_projected_zf(h, k);
    const std::complex<double> estimate = (zf.filter * y)(0);
    r.symbols[k] = a.nearest(estimate);
    r.marginals[k] = SymbolPmf::delta(a.size(), r.symbols[k]);
  }
  return r;
}

DetectionResult matched_filter_bound(const CMatrix& h, const std::vector<int>& sent,
                                     const CVector& noise, const Constellation& a) {
  const int users = static_cast<int>(h.cols());
  if (static_cast<int>(sent.size()) != users)
    throw std::invalid_argument("matched_filter_bound: sent size mismatch");
  if (noise.size() != h.rows())
    throw std::invalid_argument("matched_filter_bound: noise length mismatch");
  DetectionResult r = identity_order_result(users, a);
  for (int k = 0; k < users; ++k) {
    const double energy = h.col(k).squaredNorm();
    if (energy <= 0.0) throw std::invalid_argument("matched_filter_bound: zero channel column");
    const CVector genie = a.points[sent[k]] * h.col(k) + noise;
    const std::complex<double> estimate = h.col(k).dot(genie) / energy;
    r.symbols[k] = a.nearest(estimate);
    r.marginals[k] = SymbolPmf::delta(a.size(), r.symbols[k]);
  }
  return r;
}

DetectionResult ep_detect(const CVector&, const CMatrix&, double, const Constellation&) {
  throw std::runtime_error("ep_detect: expectation-propagation baseline is not implemented");
}

std::string to_string(ComplexityMethod m) {
  switch (m) {
    case ComplexityMethod::CentralMrc: return "mrc";
    case ComplexityMethod::CentralZf: return "zf";
    case ComplexityMethod::LpuVmp: return "lpu-vmp";
    case ComplexityMethod::SicVmpFull: return "sic-vmp-all";
    case ComplexityMethod::SicVmpBudget: return "sic-vmp-bmax";
    case ComplexityMethod::SicVmpBudgetApprox: return "sic-vmp-bmax-approx";
    case ComplexityMethod::SicVmpPower: return "sic-vmp-pwr";
    case ComplexityMethod::SicVmpPowerApprox: return "sic-vmp-pwr-approx";
  }
  return "?";
}

ComplexityReport complexity(ComplexityMethod method, int antennas, int users,
                            int subarrays, int alphabet, int budget, int iterations,
                            double power_ratio) {
  if (antennas < 1 || users < 1 || subarrays < 1 || alphabet < 2)
    throw std::invalid_argument("complexity: bad dimensions");
  if (antennas % subarrays != 0)
    throw std::invalid_argument("complexity: antennas must split evenly");
  const double m = antennas, k = users, b = subarrays, al = alphabet;
  const double mb = m / b;
  const double i = iterations;

  ComplexityReport r;
  r.method = to_string(method);
  r.antennas = antennas;
  r.users = users;
  r.subarrays = subarrays;
  r.subarray_antennas = static_cast<int>(mb);
  r.alphabet = alphabet;
  r.budget = budget;

  // SIC pipeline: per-LPU share plus the fusion/init remainder.
  const double lpu_share = (k * k / 2.0) * b * (5.0 * mb + al + 2.0);
  const double cpu_share = k * k / 2.0 + m * k;
  const double budget_scale = static_cast<double>(budget) / b;

  switch (method) {
    case ComplexityMethod::CentralMrc:
      r.multiplications = 3.0 * m * k;
      break;
    case ComplexityMethod::CentralZf:
      r.multiplications = k * k * k / 3.0 + m * k * k + m * k;
      break;
    case ComplexityMethod::LpuVmp:
      r.multiplications = i * (k * (2.0 + 2.0 * mb + al) + 2.0 * mb) + 3.0 * mb * k;
      break;
    case ComplexityMethod::SicVmpFull:
      r.multiplications = lpu_share + cpu_share;
      break;
    case ComplexityMethod::SicVmpBudget:
      r.multiplications = budget_scale * lpu_share + cpu_share;
      break;
    case ComplexityMethod::SicVmpBudgetApprox:
      r.multiplications = budget_scale * (lpu_share + cpu_share);
      break;
    case ComplexityMethod::SicVmpPower:
      r.multiplications = power_ratio * lpu_share + cpu_share;
      break;
    case ComplexityMethod::SicVmpPowerApprox:
      r.multiplications = power_ratio * (lpu_share + cpu_share);
      break;
  }
  return r;
}

std::vector<ComplexityReport> complexity_suite(int antennas, int users, int subarrays,
                                               int alphabet, int budget, int iterations,
                                               double power_ratio) {
  std::vector<ComplexityReport> rows;
  for (auto m : {ComplexityMethod::CentralMrc, ComplexityMethod::CentralZf,
                 ComplexityMethod::LpuVmp, ComplexityMethod::SicVmpFull,
                 ComplexityMethod::SicVmpBudget, ComplexityMethod::SicVmpBudgetApprox,
                 ComplexityMethod::SicVmpPower, ComplexityMethod::SicVmpPowerApprox})
    rows.push_back(complexity(m, antennas, users, subarrays, alphabet, budget,
                              iterations, power_ratio));
  return rows;
}

}  // namespace xlmimo
