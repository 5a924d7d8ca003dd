#include <cmath>
#include <random>

#include "doctest.h"
#include "dmcv/bipartite.hpp"
#include "dmcv/convergence.hpp"
#include "dmcv/error.hpp"

using namespace dmcv;
using cd = std::complex<double>;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected dmcv::Error");
  return ErrorKind::NonPhysicalInput;
}

// 16-QAM rotated by pi/8: still symmetric, but its density matrix is complex.
Constellation rotated_qam() {
  const auto base = shaped_qam(4, 1.0);
  std::vector<cd> pts;
  for (auto x : base.points()) pts.push_back(x * std::polar(1.0, 0.39269908169872414));
  return Constellation(pts, base.probs(), 4);
}

BipartiteState product(int d, int a, int b) {
  CVector phi = CVector::Zero(d * d);
  phi[a * d + b] = 1.0;
  return BipartiteState(d, phi, "product");
}

}  // namespace

TEST_CASE("purify: vacuum") {
  const auto s = purify(thermal_state(0.0, 4));
  CHECK(s.phi()[0] == cd(1.0, 0.0));
  CHECK(s.phi().norm() == 1.0);
}

TEST_CASE("purify: thermal reduced states") {
  const auto rho = thermal_state(1.0, 40);
  const auto s = purify(rho);
  CHECK((s.reduced(Side::A) - rho.entries()).norm() < 1e-12);
  CHECK((s.reduced(Side::B) - rho.entries()).norm() < 1e-12);
}

TEST_CASE("purify: identities on a complex-valued state") {
  const auto rho = constellation_density(rotated_qam(), 32);
  CHECK(rho.entries().imag().norm() > 1e-3);
  const auto s = purify(rho);
  CHECK(std::abs(s.trace() - rho.trace()) < 1e-12);
  // Tracing out A returns rho; tracing out B returns its transpose.
  CHECK((s.reduced(Side::A) - rho.entries()).norm() < 1e-10);
  CHECK((s.reduced(Side::B) - rho.entries().transpose()).norm() < 1e-10);
  CHECK((s.reduced(Side::B) - rho.entries().conjugate()).norm() < 1e-10);
}

TEST_CASE("purify: dense partial traces agree with the amplitude route") {
  const auto rho = constellation_density(rotated_qam(), 12 + 4);
  const auto s = purify(rho);
  const CMatrix dense = s.density();
  for (auto side : {Side::A, Side::B}) CHECK((partial_trace(dense, side) - s.reduced(side)).norm() < 1e-12);
  const auto ev = hermitian_eigenvalues(dense);
  CHECK(std::abs(ev[0] - s.trace()) < 1e-10);
  CHECK(std::abs(ev[1]) < 1e-10);
}

TEST_CASE("purify: QAM states are real") {
  const auto rho = constellation_density(shaped_qam(8, 1.0), 40);
  const auto s = purify(rho);
  CHECK((s.reduced(Side::A) - rho.entries().conjugate()).norm() < 1e-8);
  CHECK((s.reduced(Side::B) - rho.entries().transpose()).norm() < 1e-8);
}

TEST_CASE("purify rejects heavy truncation") {
  CHECK(kind_of([] { purify(thermal_state(1.0, 10)); }) == ErrorKind::TruncationTooSevere);
}

TEST_CASE("BipartiteState checks its size") {
  CHECK(kind_of([] { BipartiteState(3, CVector::Zero(8), "x"); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("epr_reference") {
  const auto v = epr_reference(0.0);
  CHECK(v.nu == 1.0);
  CHECK(v.z == 0.0);
  CHECK(v.squeeze_r == 0.0);
  CHECK(v.lambda == 0.0);

  const auto one = epr_reference(1.0);
  CHECK(one.nu == 3.0);
  CHECK(one.z == doctest::Approx(2.828427124746190).epsilon(1e-15));
  CHECK(one.lambda == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  const auto e = epr_reference(2.5);
  CHECK(e.lambda * e.lambda == doctest::Approx(tail_mass(2.5, 1)).epsilon(1e-15));

  for (double mbar : {0.01, 0.3, 1.0, 7.0, 40.0}) {
    const auto r = epr_reference(mbar);
    CHECK(std::abs(std::tanh(r.squeeze_r) - r.lambda) < 1e-12);
    CHECK(std::abs(std::sinh(r.squeeze_r) * std::sinh(r.squeeze_r) - mbar) < 1e-12 * std::max(1.0, mbar));
  }
  CHECK(kind_of([] { epr_reference(-1.0); }) == ErrorKind::NonPhysicalInput);
}

TEST_CASE("z_star") {
  SUBCASE("vacuum") {
    const auto s = purify(thermal_state(0.0, 4));
    CHECK(z_star(s, {0.3, 0.2}) == 0.0);
  }
  SUBCASE("thermal purification approaches the EPR value") {
    for (double mbar : {0.25, 0.5, 1.0}) {
      const auto s = purify(thermal_state(mbar, 64));
      const double expect = 2.0 * std::sqrt(mbar * mbar + mbar);
      CHECK(std::abs(z_star(s, {1.0, 0.0}) - expect) < 1e-4 * expect);
    }
  }
  SUBCASE("excess-noise correction") {
    const auto s = purify(constellation_density(shaped_qam(4, 1.0), 40));
    const ChannelModel ch{0.5, 0.01};
    CHECK(z_star(s, ch, 0.0) - z_star(s, ch, 0.3) == doctest::Approx(std::sqrt(2.0 * 0.5 * 0.01 * 0.3)));
    CHECK(kind_of([&] { z_star(s, ch, -1.0); }) == ErrorKind::NonPhysicalInput);
  }
  SUBCASE("constellation sweep stays below and climbs toward the channel value") {
    const ChannelModel ch{0.5, 0.01};
    const double limit = std::sqrt(0.5) * 2.0 * std::sqrt(2.0);
    double prev = -1.0;
    for (int m : {2, 4, 8, 16}) {
      const double z = z_star(purify(constellation_density(shaped_qam(m, 1.0), 48)), ch);
      CHECK(z < limit);
      CHECK(z > prev);
      prev = z;
    }
  }
  SUBCASE("amplitude route agrees with the dense operator") {
    const int d = 8;
    const auto s = purify(constellation_density(rotated_qam(), 30));
    const BipartiteState small(d, [&] {
      CVector phi(d * d);
      const int big = s.mode_dim();
      for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) phi[l * d + k] = s.phi()[l * big + k];
      return phi;
    }(), "cut");
    const CMatrix a = annihilation_op(d);
    const CMatrix ab = tensor_product(a, a);
    const CMatrix x = ab + ab.adjoint();
    const double dense = (small.density() * x).trace().real();
    CHECK(dense == doctest::Approx(2.0 * two_mode_correlation(small).real()).epsilon(1e-12));
  }
}

TEST_CASE("cm_distance") {
  const ChannelModel ch{0.7, 0.02};
  CHECK(cm_distance(1.3, channel_z(1.3, 0.7), ch) == 0.0);
  CHECK(cm_distance(1.0, 0.0, {1.0, 0.0}) == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-15));

  // Frobenius norm of the difference of the two 4x4 layouts.
  for (double zs : {0.0, 0.4, 1.1, 2.9}) {
    const auto ref = covariance_matrix(1.0, channel_z(1.0, 0.7), ch);
    const auto est = covariance_matrix(1.0, zs, ch);
    CHECK(cm_distance(1.0, zs, ch) == doctest::Approx((ref.layout() - est.layout()).norm()).epsilon(1e-14));
  }
}

TEST_CASE("covariance_matrix") {
  const auto cm = covariance_matrix(1.0, 2.0, {0.5, 0.1});
  CHECK(cm.va == 3.0);
  CHECK(cm.vb == doctest::Approx(0.5 * 2.0 + 1.0 + 0.05));
  const auto g = cm.layout();
  CHECK((g - g.transpose()).norm() == 0.0);
  CHECK(g(1, 3) == -2.0);
  CHECK(to_json(cm).contains("vb_convention"));
  CHECK(kind_of([] { covariance_matrix(1.0, 0.0, {1.5, 0.0}); }) == ErrorKind::NonPhysicalInput);
}

TEST_CASE("bipartite_trace_distance") {
  const auto s = purify(thermal_state(0.5, 24));
  CHECK(bipartite_trace_distance(s, s) < 1e-7);
  CHECK(bipartite_trace_distance(product(3, 0, 0), product(3, 1, 1)) == 2.0);
  CHECK(kind_of([&] { bipartite_trace_distance(product(3, 0, 0), product(2, 1, 1)); }) ==
        ErrorKind::DimensionMismatch);

  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + trial % 3;
    CVector a(d * d), b(d * d);
    for (int i = 0; i < d * d; ++i) {
      a[i] = {n(rng), n(rng)};
      b[i] = {n(rng), n(rng)};
    }
    a /= a.norm();
    b /= b.norm() * 1.01;
    const BipartiteState sa(d, a, "a"), sb(d, b, "b");
    CHECK(bipartite_trace_distance(sa, sb) ==
          doctest::Approx(trace_norm_distance(sa.density(), sb.density())).epsilon(1e-10));
  }
}

TEST_CASE("purification sweep approaches the EPR reference") {
  const auto ref = purify(thermal_state(1.0, 48));
  double prev = 3.0;
  for (int m : {2, 4, 8, 16}) {
    const auto s = purify(constellation_density(shaped_qam(m, 1.0), 48));
    const double d = bipartite_trace_distance(s, ref);
    CHECK(d < prev);
    prev = d;
  }
}
