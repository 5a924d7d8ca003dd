#include "dmcv/security.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmcv/error.hpp"
#include "dmcv/fock.hpp"

namespace dmcv {

double eps_test(double mbar, int d) {
  if (d < 1) {
    throw Error(ErrorKind::InvalidTarget, "energy-test subspace dimension must be >= 1");
  }
  return thermal_tail(mbar, d);
}

int min_dim_for_eps(double mbar, double eps_target) {
  if (!(eps_target > 0.0 && eps_target < 1.0)) {
    throw Error(ErrorKind::InvalidTarget, "target epsilon must lie in (0, 1)");
  }
  if (!(mbar > 0.0) || !std::isfinite(mbar)) {
    throw Error(ErrorKind::InvalidTarget, "mean photon number must be finite and > 0");
  }
  const double ratio = mbar / (mbar + 1.0);
  const double estimate = std::ceil(std::log(eps_target) / std::log(ratio));
  if (!(estimate < 1e9)) {
    throw Error(ErrorKind::InvalidTarget, "required dimension exceeds 1e9");
  }
  // The log estimate can be off by one either way; settle it with the same
  // evaluation eps_test uses.
  int d = std::max(1, static_cast<int>(estimate));
  while (eps_test(mbar, d) > eps_target) ++d;
  while (d > 1 && eps_test(mbar, d - 1) <= eps_target) --d;
  return d;
}

SecurityBudget compose_budget(double eps_tilde, double mbar, int d) {
  if (!(eps_tilde >= 0.0) || !std::isfinite(eps_tilde)) {
    throw Error(ErrorKind::InvalidTarget, "eps_tilde must be finite and >= 0");
  }
  SecurityBudget b;
  b.eps_test = eps_test(mbar, d);
  b.dim = d;
  b.mbar = mbar;
  b.eps_tilde = eps_tilde;
  b.eps_total = eps_tilde + 2.0 * b.eps_test;
  return b;
}

nlohmann::json to_json(const SecurityBudget& b) {
  return {{"eps_test", b.eps_test},
          {"dim", b.dim},
          {"mbar", b.mbar},
          {"eps_tilde", b.eps_tilde},
          {"eps_total", b.eps_total},
          {"meta", {{"eps_test_scaling", "up-to-constant"}, {"eps_test_form", "(mbar/(mbar+1))^dim"}}}};
}

}  // namespace dmcv
