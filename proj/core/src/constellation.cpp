// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace xlmimo {

Constellation Constellation::qpsk() {
  const double s = 1.0 / std::sqrt(2.0);
  Constellation c;
  c.points = {{s, s}, {s, -s}, {-s, s}, {-s, -s}};
  return c;
}

Constellation Constellation::psk(int order) {
  if (order < 2) throw std::invalid_argument("psk: order must be >= 2");
  Constellation c;
  c.points.reserve(order);
  for (int i = 0; i < order; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / order;
    c.points.emplace_back(std::cos(phi), std::sin(phi));
  }
  return c;
}

Constellation Constellation::qam16() {
  const double s = 1.0 / std::sqrt(10.0);  // unit average energy
  Constellation c;
  for (double re : {-3.0, -1.0, 1.0, 3.0})
    for (double im : {-3.0, -1.0, 1.0, 3.0}) c.points.emplace_back(s * re, s * im);
  return c;
}

Constellation Constellation::from_name(std::string_view name) {
  if (name == "qpsk") return qpsk();
  if (name == "bpsk") return psk(2);
  if (name == "8psk") return psk(8);
  if (name == "16qam") return qam16();
  throw std::invalid_argument("unknown constellation: " + std::string(name));
}

int Constellation::nearest(std::complex<double> value) const {
  int best = 0;
  double best_d = std::norm(value - points[0]);
  for (int i = 1; i < size(); ++i) {
    const double d = std::norm(value - points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void Constellation::validate() const {
  if (points.size() < 2) throw std::invalid_argument("constellation: needs >= 2 points");
  double energy = 0.0;
  for (const auto& p : points) energy += std::norm(p);
  energy /= static_cast<double>(points.size());
  if (std::abs(energy - 1.0) > 1e-12)
    throw std::invalid_argument("constellation: average energy must be 1");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < 1e-12)
        throw std::invalid_argument("constellation: duplicate points");
}

SymbolPmf SymbolPmf::uniform(int size) {
  SymbolPmf q;
  q.w.assign(size, 1.0 / size);
  return q;
}

SymbolPmf SymbolPmf::delta(int size, int index) {
  if (index < 0 || index >= size) throw std::invalid_argument("delta: index out of range");
  SymbolPmf q;
  q.w.assign(size, 0.0);
  q.w[index] = 1.0;
  return q;
}

void SymbolPmf::normalize() {
  double total = 0.0;
  for (double x : w) {
    if (x < 0.0) throw std::invalid_argument("pmf: negative weight");
    total += x;
  }
  if (total <= 0.0) throw std::runtime_error("pmf: all weights vanished");
  for (double& x : w) x /= total;
}

bool SymbolPmf::is_delta() const {
  return std::count_if(w.begin(), w.end(), [](double x) { return x > 0.0; }) == 1;
}

PmfMoments pmf_moments(const SymbolPmf& q, const Constellation& a) {
  PmfMoments m;
  double second = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    m.mean += a.points[i] * q.w[i];
    second += std::norm(a.points[i]) * q.w[i];
  }
  m.variance = std::max(second - std::norm(m.mean), 0.0);
  return m;
}

SymbolPmf gaussian_to_pmf(std::complex<double> mu, double var, const Constellation& a) {
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_to_pmf: variance must be positive");
  SymbolPmf q;
  q.w.resize(a.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.size(); ++i) {
    q.w[i] = -std::norm(a.points[i] - mu) / var;
    max_log = std::max(max_log, q.w[i]);
  }
  double total = 0.0;
  for (double& x : q.w) {
    x = std::exp(x - max_log);
    total += x;
  }
  for (double& x : q.w) x /= total;
  return q;
}

}  // namespace xlmimo
