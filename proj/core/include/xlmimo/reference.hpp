// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_REFERENCE_HPP
#define XLMIMO_REFERENCE_HPP

#include <string>
#include <vector>

#include "xlmimo/fusion.hpp"

namespace xlmimo {

/// Centralized maximum-ratio combining: per-user matched filter, nearest
/// constellation point.
DetectionResult central_mrc(const CVector& y, const CMatrix& h, const Constellation& a);

/// Centralized zero forcing: per-user interference-nulling filter, nearest
/// constellation point. Raises SingularChannelError on rank deficiency.
DetectionResult central_zf(const CVector& y, const CMatrix& h, const Constellation& a);

/// Genie-aided lower bound: all interference removed exactly using the
/// true symbols and the trial's stored noise vector, then per-user MRC.
DetectionResult matched_filter_bound(const CMatrix& h, const std::vector<int>& sent,
                                     const CVector& noise, const Constellation& a);

/// Placeholder for the expectation-propagation baseline; always throws.
DetectionResult ep_detect(const CVector& y, const CMatrix& h, double noise_var,
                          const Constellation& a);

enum class ComplexityMethod {
  CentralMrc,
  CentralZf,
  LpuVmp,           // one LPU pass, MRC-initialized
  SicVmpFull,       // SIC pipeline fusing all sub-arrays
  SicVmpBudget,     // budget-limited fusion, LPU share scaled by budget/B
  SicVmpBudgetApprox,  // coarse variant: whole count scaled by budget/B
  SicVmpPower,         // power-ratio fusion, LPU share scaled by p0
  SicVmpPowerApprox,
};

std::string to_string(ComplexityMethod m);

/// Closed-form multiplication count; never measured.
struct ComplexityReport {
  std::string method;
  int antennas = 0;           // M
  int users = 0;              // K
  int subarrays = 0;          // B
  int subarray_antennas = 0;  // M_b
  int alphabet = 0;           // |A|
  int budget = 0;             // B_max
  double multiplications = 0.0;
};

ComplexityReport complexity(ComplexityMethod method, int antennas, int users,
                            int subarrays, int alphabet, int budget, int iterations,
                            double power_ratio = 0.75);

/// The standard set of rows printed by the CLI.
std::vector<ComplexityReport> complexity_suite(int antennas, int users, int subarrays,
                                               int alphabet, int budget, int iterations,
                                               double power_ratio = 0.75);

}  // namespace xlmimo

#endif  // XLMIMO_REFERENCE_HPP
