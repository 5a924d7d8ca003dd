#include "dmcv/bipartite.hpp"

#include <cmath>

#include "dmcv/convergence.hpp"
#include "dmcv/error.hpp"

namespace dmcv {

BipartiteState::BipartiteState(int mode_dim, CVector phi, std::string source)
    : mode_dim_(mode_dim), phi_(std::move(phi)), source_(std::move(source)) {
  if (mode_dim_ < 1 || phi_.size() != static_cast<Eigen::Index>(mode_dim_) * mode_dim_) {
    throw Error(ErrorKind::DimensionMismatch, "bipartite amplitude vector must have d^2 entries");
  }
}

CMatrix BipartiteState::density() const { return phi_ * phi_.adjoint(); }

CMatrix BipartiteState::reduced(Side traced) const {
  const int d = mode_dim_;
  // Column-major map: amps(k, l) = Phi[l*d + k] = M[l][k], so amps = M^T.
  const Eigen::Map<const CMatrix> amps(phi_.data(), d, d);
  if (traced == Side::B) {
    return amps.transpose() * amps.conjugate();
  }
  return amps * amps.adjoint();
}

BipartiteState purify(const DensityMatrix& rho, std::string source) {
  if (rho.deficit() >= kMaxConstellationDeficit) {
    throw Error(ErrorKind::TruncationTooSevere,
                "purification needs deficit < 1e-6, got " + std::to_string(rho.deficit()));
  }
  const int d = rho.dim();
  const CMatrix root = matrix_sqrt_psd(rho);
  // Phi[l*d + k] = root(k, l) is exactly the column-major layout of root.
  CVector phi = Eigen::Map<const CVector>(root.data(), static_cast<Eigen::Index>(d) * d);
  return BipartiteState(d, std::move(phi), std::move(source));
}

EprReference epr_reference(double mbar) {
  if (!(mbar >= 0.0) || !std::isfinite(mbar)) {
    throw Error(ErrorKind::NonPhysicalInput, "mean photon number must be finite and >= 0");
  }
  EprReference ref;
  ref.nu = 2.0 * mbar + 1.0;
  ref.z = 2.0 * std::sqrt(mbar * mbar + mbar);
  ref.squeeze_r = std::asinh(std::sqrt(mbar));
  ref.lambda = std::sqrt(mbar / (mbar + 1.0));
  return ref;
}

Eigen::Matrix4d CovarianceMatrix::layout() const {
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  g(0, 0) = g(1, 1) = va;
  g(2, 2) = g(3, 3) = vb;
  g(0, 2) = g(2, 0) = z;
  g(1, 3) = g(3, 1) = -z;
  return g;
}

bool CovarianceMatrix::within_physical_bound() const {
  return std::abs(z) <= std::sqrt(std::max(0.0, (va - 1.0) * (vb + 1.0)));
}

CovarianceMatrix covariance_matrix(double mbar, double z, const ChannelModel& ch) {
  ch.validate();
  const auto ref = epr_reference(mbar);
  return {ref.nu, ch.tau * 2.0 * mbar + 1.0 + ch.tau * ch.xi, z};
}

double channel_z(double mbar, double tau) {
  return 2.0 * std::sqrt(tau) * std::sqrt(mbar * mbar + mbar);
}

Complex two_mode_correlation(const BipartiteState& state) {
  const int d = state.mode_dim();
  const auto& phi = state.phi();
  Complex acc{};
  // (a (x) b)|l>|k> = sqrt(l k) |l-1>|k-1>
  for (int l = 1; l < d; ++l) {
    for (int k = 1; k < d; ++k) {
      acc += std::conj(phi[(l - 1) * d + (k - 1)]) * std::sqrt(static_cast<double>(l) * k) * phi[l * d + k];
    }
  }
  return acc;
}

double z_star(const BipartiteState& state, const ChannelModel& ch, double w) {
  if (state.mode_dim() < 2) {
    throw Error(ErrorKind::DimensionMismatch, "z_star needs a mode cutoff >= 2");
  }
  ch.validate();
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw Error(ErrorKind::NonPhysicalInput, "w must be finite and >= 0");
  }
  // tr[rho (X + X^dag)] = 2 Re <Phi|X|Phi>
  const double correlation = 2.0 * two_mode_correlation(state).real();
  return std::sqrt(ch.tau) * correlation - std::sqrt(2.0 * ch.tau * ch.xi * w);
}

double cm_distance(double mbar, double zstar, const ChannelModel& ch) {
  ch.validate();
  return 2.0 * std::abs(channel_z(mbar, ch.tau) - zstar);
}

double bipartite_trace_distance(const BipartiteState& a, const BipartiteState& b) {
  if (a.mode_dim() != b.mode_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "bipartite states differ in mode cutoff");
  }
  // || |a><a| - |b><b| ||_1 = sqrt((na - nb)^2 + 4 (na nb - |<a|b>|^2)), and
  // na nb - |<a|b>|^2 = na ||b - (<a|b>/na) a||^2 avoids the cancellation.
  const double na = a.phi().squaredNorm();
  const double nb = b.phi().squaredNorm();
  if (na == 0.0) return nb;
  const Complex overlap = a.phi().dot(b.phi());
  const double gram = na * (b.phi() - (overlap / na) * a.phi()).squaredNorm();
  return std::sqrt((na - nb) * (na - nb) + 4.0 * gram);
}

nlohmann::json to_json(const CovarianceMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  const auto g = cm.layout();
  for (int i = 0; i < 4; ++i) rows.push_back({g(i, 0), g(i, 1), g(i, 2), g(i, 3)});
  return {{"va", cm.va},
          {"vb", cm.vb},
          {"z", cm.z},
          {"layout", std::move(rows)},
          {"vb_convention", "tau*2*mbar + 1 + tau*xi (thermal-loss bookkeeping)"},
          {"within_physical_bound", cm.within_physical_bound()}};
}

}  // namespace dmcv
