#pragma once

// Energy-test security arithmetic. The test term is the bare thermal tail
// (mbar/(mbar+1))^d: it is known only up to a constant factor, and outputs
// say so. The postselection term ||E~ - F~||_diamond is supplied by the
// caller, never computed here.

#include "json.hpp"

namespace dmcv {

struct SecurityBudget {
  double eps_test = 0.0;
  int dim = 0;
  double mbar = 0.0;
  double eps_tilde = 0.0;
  double eps_total = 0.0;  // eps_tilde + 2 eps_test
};

double eps_test(double mbar, int d);

/// Smallest d >= 1 with eps_test(mbar, d) <= eps_target.
int min_dim_for_eps(double mbar, double eps_target);

SecurityBudget compose_budget(double eps_tilde, double mbar, int d);

nlohmann::json to_json(const SecurityBudget& b);

}  // namespace dmcv
