// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include <doctest.h>

#include <cmath>

#include "xlmimo/linalg.hpp"
#include "xlmimo/rng.hpp"

using namespace xlmimo;

TEST_CASE("same seed reproduces the exact sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42), d(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.gaussian() == d.gaussian());
    CHECK(c.uniform() == d.uniform());
    CHECK(c.cgaussian(2.0) == d.cgaussian(2.0));
  }
}

TEST_CASE("split streams are independent of parent consumption") {
  Rng parent(7);
  Rng child_before = parent.split(3, 9);
  for (int i = 0; i < 50; ++i) parent.next_u64();
  Rng child_after = parent.split(3, 9);
  for (int i = 0; i < 100; ++i) CHECK(child_before.next_u64() == child_after.next_u64());

  Rng other = parent.split(3, 10);
  CHECK(other.next_u64() != parent.split(3, 9).next_u64());
}

TEST_CASE("uniform_int covers its range uniformly enough") {
  Rng rng(5);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const int v = rng.uniform_int(2, 7);
    REQUIRE(v >= 2);
    REQUIRE(v <= 7);
    ++counts[v - 2];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("sample_cgauss moments match a unit complex Gaussian") {
  Rng rng(11);
  const CMatrix m = sample_cgauss(rng, 400, 250, 1.0);  // 1e5 samples
  std::complex<double> mean = 0.0;
  double power = 0.0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      mean += m(r, c);
      power += std::norm(m(r, c));
    }
  const double n = static_cast<double>(m.size());
  mean /= n;
  power /= n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(power - std::norm(mean) - 1.0) < 0.02);
}

TEST_CASE("sample_cgauss degenerate and error cases") {
  Rng rng(3);
  const CMatrix z = sample_cgauss(rng, 4, 5, 0.0);
  CHECK(z.norm() == 0.0);

  Rng r2(3);
  CHECK_THROWS_AS(sample_cgauss(r2, 2, 2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_cgauss(r2, 0, 2, 1.0), std::invalid_argument);
}

TEST_CASE("sample_cgauss is deterministic per seed") {
  Rng a(99), b(99);
  const CMatrix x = sample_cgauss(a, 7, 3, 0.5);
  const CMatrix y = sample_cgauss(b, 7, 3, 0.5);
  CHECK((x - y).norm() == 0.0);
}

TEST_CASE("lognormal mean matches the closed form") {
  Rng rng(123);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) acc += rng.lognormal(0.7, 0.2);
  const double expected = std::exp(0.7 + 0.2 * 0.2 / 2.0);
  CHECK(std::abs(acc / n - expected) < 0.01 * expected);
}
