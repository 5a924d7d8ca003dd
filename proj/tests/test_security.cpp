#include <cmath>
#include <random>

#include "doctest.h"
#include "dmcv/convergence.hpp"
#include "dmcv/error.hpp"
#include "dmcv/security.hpp"

using namespace dmcv;

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

}  // namespace

TEST_CASE("eps_test") {
  CHECK(eps_test(1.0, 20) == std::ldexp(1.0, -20));
  CHECK(eps_test(0.0, 5) == 0.0);
  for (double mbar : {0.1, 1.0, 3.0})
    for (int d : {1, 10, 100}) CHECK(eps_test(mbar, d) == tail_mass(mbar, d));
  CHECK(kind_of([] { eps_test(1.0, 0); }) == ErrorKind::InvalidTarget);
  CHECK(kind_of([] { eps_test(-1.0, 3); }) == ErrorKind::NonPhysicalInput);
}

TEST_CASE("min_dim_for_eps") {
  CHECK(min_dim_for_eps(1.0, std::ldexp(1.0, -20)) == 20);
  CHECK(min_dim_for_eps(1.0, 1e-10) == 34);

  const int d = min_dim_for_eps(2.5, 1e-6);
  CHECK(std::pow(5.0 / 7.0, d) <= 1e-6);
  CHECK(std::pow(5.0 / 7.0, d - 1) > 1e-6);

  CHECK(kind_of([] { min_dim_for_eps(1.0, 0.0); }) == ErrorKind::InvalidTarget);
  CHECK(kind_of([] { min_dim_for_eps(1.0, 1.0); }) == ErrorKind::InvalidTarget);
  CHECK(kind_of([] { min_dim_for_eps(0.0, 1e-3); }) == ErrorKind::InvalidTarget);
  CHECK(kind_of([] { min_dim_for_eps(1e12, 1e-300); }) == ErrorKind::InvalidTarget);
}

TEST_CASE("property: min_dim_for_eps is the smallest sufficient dimension") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> log_mbar(-2.0, 1.5);
  std::uniform_real_distribution<double> log_eps(-15.0, -1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double mbar = std::pow(10.0, log_mbar(rng));
    const double eps = std::pow(10.0, log_eps(rng));
    const int d = min_dim_for_eps(mbar, eps);
    CHECK(eps_test(mbar, d) <= eps);
    if (d > 1) CHECK(eps_test(mbar, d - 1) > eps);
  }
}

TEST_CASE("compose_budget") {
  CHECK(compose_budget(0.0, 1.0, 20).eps_total == std::ldexp(1.0, -19));
  CHECK(compose_budget(1e-9, 1.0, 40).eps_total == 1e-9 + std::ldexp(1.0, -39));

  const auto b = compose_budget(1e-7, 0.8, 30);
  CHECK(b.dim == 30);
  CHECK(b.mbar == 0.8);
  CHECK(b.eps_tilde == 1e-7);
  CHECK(b.eps_total == b.eps_tilde + 2.0 * b.eps_test);

  CHECK(kind_of([] { compose_budget(-1e-9, 1.0, 4); }) == ErrorKind::InvalidTarget);
  const auto j = to_json(b);
  CHECK(j.at("meta").at("eps_test_scaling") == "up-to-constant");
}

TEST_CASE("property: budgets tighten with dimension and loosen with energy") {
  for (double tilde : {0.0, 1e-10, 1e-5}) {
    for (int d = 1; d < 60; ++d) {
      CHECK(compose_budget(tilde, 1.0, d + 1).eps_total <= compose_budget(tilde, 1.0, d).eps_total);
      CHECK(compose_budget(tilde, 1.5, d).eps_total >= compose_budget(tilde, 1.0, d).eps_total);
    }
  }
}
