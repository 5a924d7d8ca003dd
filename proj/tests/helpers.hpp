#pragma once

#include <random>

#include "dmcv/fock.hpp"

namespace testing {

inline dmcv::CMatrix random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  dmcv::CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = {n(rng), n(rng)};
  return (g + g.adjoint()) / 2.0;
}

// Random density matrix G G^dag / tr.
inline dmcv::CMatrix random_density(int d, std::mt19937_64& rng, int rank = -1) {
  std::normal_distribution<double> n;
  const int r = rank < 0 ? d : rank;
  dmcv::CMatrix g(d, r);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = {n(rng), n(rng)};
  dmcv::CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

inline dmcv::CMatrix projector(const dmcv::CVector& v) { return v * v.adjoint(); }

inline dmcv::CVector basis(int d, int k) {
  dmcv::CVector v = dmcv::CVector::Zero(d);
  v[k] = 1.0;
  return v;
}

}  // namespace testing
