// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "xlmimo/fusion.hpp"

using namespace xlmimo;

namespace {

struct Trial {
  CMatrix h;
  CVector y;
  std::vector<int> sent;
};

Trial make_trial(Rng& rng, int antennas, int users, const Constellation& a,
                 double noise_var) {
  Trial t;
  t.h = sample_cgauss(rng, antennas, users, 1.0);
  t.sent.resize(users);
  t.y = CVector::Zero(antennas);
  for (int k = 0; k < users; ++k) {
    t.sent[k] = rng.uniform_int(0, a.size() - 1);
    t.y += a.points[t.sent[k]] * t.h.col(k);
  }
  for (int m = 0; m < antennas; ++m) t.y(m) += rng.cgaussian(noise_var);
  return t;
}

}  // namespace

TEST_CASE("fusion matrix: ALL and saturated budgets select everything") {
  Rng rng(1);
  const CMatrix h = sample_cgauss(rng, 8, 3, 1.0);
  const Eigen::VectorXd lambda = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);

  const FusionMatrix all = build_fusion_matrix(FusionMode::All, h, 4, lambda, 0.75, 3);
  CHECK(all.v.sum() == 12);

  const FusionMatrix nop = build_fusion_matrix(FusionMode::Precision, h, 4, lambda, 0.75, 4);
  CHECK(nop.v.sum() == 12);
  const FusionMatrix hyb = build_fusion_matrix(FusionMode::Hybrid, h, 4, lambda, 0.75, 4);
  CHECK(hyb.v.sum() == 12);
}

TEST_CASE("power fusion keeps the dominant sub-array for a 90/10 split") {
  CMatrix h(2, 1);  // two single-antenna sub-arrays
  h(0, 0) = std::sqrt(0.9);
  h(1, 0) = std::sqrt(0.1);
  const FusionMatrix v =
      build_fusion_matrix(FusionMode::Power, h, 2, Eigen::VectorXd::Ones(2), 0.75, 2);
  CHECK(v.v(0, 0) == 1);
  CHECK(v.v(1, 0) == 0);
}

TEST_CASE("power fusion with p0 = 1 terminates with the full column") {
  Rng rng(5);
  const CMatrix h = sample_cgauss(rng, 8, 2, 1.0);
  const FusionMatrix v =
      build_fusion_matrix(FusionMode::Power, h, 4, Eigen::VectorXd::Ones(4), 1.0, 4);
  CHECK(v.v.sum() == 8);
}

TEST_CASE("power fusion falls back to all sub-arrays for a zero-energy user") {
  CMatrix h = CMatrix::Zero(4, 2);
  h.col(1).setOnes();
  const FusionMatrix v =
      build_fusion_matrix(FusionMode::Power, h, 2, Eigen::VectorXd::Ones(2), 0.75, 2);
  CHECK(v.v(0, 0) == 1);
  CHECK(v.v(1, 0) == 1);
}

TEST_CASE("precision fusion keeps the rows of the top lambdas") {
  Rng rng(6);
  const CMatrix h = sample_cgauss(rng, 8, 3, 1.0);
  Eigen::VectorXd lambda(4);
  lambda << 2.0, 9.0, 4.0, 9.0;  // tie between rows 1 and 3
  const FusionMatrix v = build_fusion_matrix(FusionMode::Precision, h, 4, lambda, 0.75, 2);
  for (int k = 0; k < 3; ++k) {
    CHECK(v.v(1, k) == 1);  // tie resolved to the lower index
    CHECK(v.v(3, k) == 1);
    CHECK(v.v(0, k) == 0);
    CHECK(v.v(2, k) == 0);
  }
}

TEST_CASE("hybrid measure is the row-scaled energy matrix") {
  Rng rng(8);
  const CMatrix h = sample_cgauss(rng, 6, 2, 1.0);
  Eigen::VectorXd lambda(3);
  lambda << 0.5, 2.0, 1.5;
  const HybridMeasure m = hybrid_measure(h, 3, lambda);
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 2; ++k) {
      const double energy = subarray_rows(h, b, 3).col(k).squaredNorm();
      CHECK(testutil::rel_close(m.energy(b, k), energy, 1e-14));
      CHECK(testutil::rel_close(m.gamma(b, k), lambda(b) * energy, 1e-14));
    }
}

TEST_CASE("every fusion mode leaves no user unfused") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix h = sample_cgauss(rng, 8, 3, 1.0);
    Eigen::VectorXd lambda(4);
    for (int b = 0; b < 4; ++b) lambda(b) = rng.uniform(0.1, 5.0);
    for (FusionMode mode : {FusionMode::All, FusionMode::Power, FusionMode::Precision,
                            FusionMode::Hybrid}) {
      const FusionMatrix v = build_fusion_matrix(mode, h, 4, lambda, 0.75, 2);
      for (int k = 0; k < 3; ++k) CHECK(v.v.col(k).sum() >= 1);
    }
  }
}

TEST_CASE("fused beliefs multiply and normalize") {
  SymbolPmf strong;
  strong.w = {0.7, 0.1, 0.1, 0.1};
  const SymbolPmf flat = SymbolPmf::uniform(4);

  // A single selected belief passes through.
  std::vector<const SymbolPmf*> one{&strong};
  CHECK(testutil::pmf_close(fuse_marginals(one), strong.w, 1e-15));

  // Uniform partners are the multiplicative identity.
  std::vector<const SymbolPmf*> with_flat{&strong, &flat};
  CHECK(testutil::pmf_close(fuse_marginals(with_flat), strong.w, 1e-14));

  std::vector<const SymbolPmf*> flats{&flat, &flat, &flat};
  CHECK(testutil::pmf_close(fuse_marginals(flats), flat.w, 1e-15));

  // Arbitrary product against the naive oracle, in any order.
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const SymbolPmf a = testutil::random_pmf(rng, 4);
    const SymbolPmf b = testutil::random_pmf(rng, 4);
    const SymbolPmf c = testutil::random_pmf(rng, 4);
    const auto expected = oracle::fuse({a.w, b.w, c.w});
    std::vector<const SymbolPmf*> abc{&a, &b, &c};
    std::vector<const SymbolPmf*> cba{&c, &b, &a};
    CHECK(testutil::pmf_close(fuse_marginals(abc), expected, 1e-12));
    CHECK(testutil::pmf_close(fuse_marginals(cba), expected, 1e-12));
  }
}

TEST_CASE("disjoint supports fall back to uniform with a conflict flag") {
  const SymbolPmf a = SymbolPmf::delta(4, 0);
  const SymbolPmf b = SymbolPmf::delta(4, 3);
  std::vector<const SymbolPmf*> picked{&a, &b};
  bool conflict = false;
  const SymbolPmf fused = fuse_marginals(picked, &conflict);
  CHECK(conflict);
  for (int i = 0; i < 4; ++i) CHECK(fused.w[i] == 0.25);
}

TEST_CASE("hard decisions take the argmax with lowest-index ties") {
  CHECK(hard_detect(SymbolPmf::delta(4, 2)) == 2);

  SymbolPmf ordered;
  ordered.w = {0.4, 0.3, 0.2, 0.1};
  CHECK(hard_detect(ordered) == 0);

  SymbolPmf tie;
  tie.w = {0.0, 0.5, 0.5, 0.0};
  CHECK(hard_detect(tie) == 1);

  // Argmax ignores any positive rescaling.
  SymbolPmf scaled;
  scaled.w = {0.8, 0.6, 0.4, 0.2};
  CHECK(hard_detect(scaled) == hard_detect(ordered));
}

TEST_CASE("certainty ratio distinguishes confident beliefs") {
  CHECK(certainty_ratio(SymbolPmf::uniform(4)) == 1.0);

  SymbolPmf q;
  q.w = {0.6, 0.3, 0.05, 0.05};
  CHECK(testutil::rel_close(certainty_ratio(q), 2.0, 1e-15));

  SymbolPmf two;
  two.w = {0.5, 0.5, 0.0, 0.0};
  CHECK(certainty_ratio(two) == 1.0);

  CHECK(std::isinf(certainty_ratio(SymbolPmf::delta(4, 1))));
}

TEST_CASE("SIC with one user equals the non-iterative detector") {
  const Constellation a = Constellation::qpsk();
  Rng rng(13);
  VmpOptions opt;
  opt.subarrays = 2;
  for (int trial = 0; trial < 10; ++trial) {
    Trial t = make_trial(rng, 4, 1, a, 0.2);
    const DetectionResult sic = sic_detect(t.y, t.h, 0.2, a, opt);
    const DetectionResult one = detect_noniterative(t.y, t.h, 0.2, a, opt);
    CHECK(sic.symbols == one.symbols);
  }
}

TEST_CASE("noiseless SIC agrees with the exhaustive ML search") {
  const Constellation a = Constellation::qpsk();
  Rng rng(17);
  VmpOptions opt;
  opt.subarrays = 4;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Trial t = make_trial(rng, 8, 2, a, 0.0);
    const DetectionResult sic = sic_detect(t.y, t.h, 1e-4, a, opt);
    const auto ml = oracle::ml_search(oracle::from_eigen(t.h), {t.y.data(), t.y.data() + 8},
                                      a.points);
    CHECK(sic.symbols == ml);
    CHECK(sic.symbols == t.sent);
    ++checked;

    // With every decision correct the cancelled signal is gone.
    CVector residual = t.y;
    for (int k = 0; k < 2; ++k) residual -= a.points[sic.symbols[k]] * t.h.col(k);
    CHECK(residual.norm() < 1e-10);
  }
  CHECK(checked == 20);
}

TEST_CASE("SIC visits every user exactly once in a deterministic order") {
  const Constellation a = Constellation::qpsk();
  Rng rng(23);
  VmpOptions opt;
  opt.subarrays = 2;
  Trial t = make_trial(rng, 8, 4, a, 0.5);
  const DetectionResult first = sic_detect(t.y, t.h, 0.5, a, opt);
  const DetectionResult second = sic_detect(t.y, t.h, 0.5, a, opt);
  CHECK(first.order == second.order);
  CHECK(first.symbols == second.symbols);

  std::vector<int> sorted = first.order;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < 4; ++k) CHECK(sorted[k] == k);
}

TEST_CASE("saturated HYB and NOP budgets reproduce ALL bit for bit") {
  const Constellation a = Constellation::qpsk();
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    Trial t = make_trial(rng, 8, 3, a, 0.4);
    VmpOptions all;
    all.subarrays = 4;
    all.fusion = FusionMode::All;
    VmpOptions hyb = all;
    hyb.fusion = FusionMode::Hybrid;
    hyb.budget = 4;
    VmpOptions nop = all;
    nop.fusion = FusionMode::Precision;
    nop.budget = 4;

    const DetectionResult ra = sic_detect(t.y, t.h, 0.4, a, all);
    const DetectionResult rh = sic_detect(t.y, t.h, 0.4, a, hyb);
    const DetectionResult rn = sic_detect(t.y, t.h, 0.4, a, nop);
    CHECK(ra.symbols == rh.symbols);
    CHECK(ra.order == rh.order);
    CHECK(ra.symbols == rn.symbols);
    CHECK(ra.order == rn.order);
  }
}

TEST_CASE("non-iterative detection matches the first SIC decision") {
  const Constellation a = Constellation::qpsk();
  Rng rng(31);
  VmpOptions opt;
  opt.subarrays = 2;
  for (int trial = 0; trial < 10; ++trial) {
    Trial t = make_trial(rng, 8, 3, a, 0.3);
    const DetectionResult sic = sic_detect(t.y, t.h, 0.3, a, opt);
    const DetectionResult flat = detect_noniterative(t.y, t.h, 0.3, a, opt);
    const int first = sic.order.front();
    CHECK(flat.symbols[first] == sic.symbols[first]);
    CHECK(flat.order == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("detectors validate their geometry") {
  const Constellation a = Constellation::qpsk();
  Rng rng(37);
  Trial t = make_trial(rng, 6, 2, a, 0.1);
  VmpOptions opt;
  opt.subarrays = 4;  // 6 antennas cannot split into 4
  CHECK_THROWS_AS(sic_detect(t.y, t.h, 0.1, a, opt), std::invalid_argument);
}
