#include "dmcv/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dmcv/error.hpp"

namespace dmcv {

namespace {

constexpr double kNegligibleProbability = 1e-18;

double thermal_eigenvalue(double mbar, int k) {
  return std::pow(mbar, k) / std::pow(mbar + 1.0, k + 1);
}

bool folded(double p, std::complex<double> x) {
  return p < kNegligibleProbability && std::norm(x) > kMaxCoherentEnergy;
}

}  // namespace

DensityMatrix constellation_density(const Constellation& c, int dim) {
  if (dim < 1) {
    throw Error(ErrorKind::NonPhysicalInput, "Fock cutoff must be >= 1");
  }
  const double deficit = truncation_deficit(c, dim);
  if (deficit >= kMaxConstellationDeficit) {
    throw Error(ErrorKind::TruncationTooSevere,
                "cutoff " + std::to_string(dim) + " loses " + std::to_string(deficit) +
                    " of the constellation mass; increase the Fock dimension");
  }
  // rho = V V^dagger with column k = sqrt(p_k) |x_k>.
  CMatrix columns(dim, static_cast<Eigen::Index>(c.size()));
  Eigen::Index used = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double p = c.probs()[k];
    const auto x = c.points()[k];
    if (p == 0.0 || folded(p, x)) continue;
    columns.col(used++) = std::sqrt(p) * coherent_fock(x, dim).amps;
  }
  const auto v = columns.leftCols(used);
  CMatrix rho = v * v.adjoint();
  rho = (rho + rho.adjoint()) / 2.0;
  return DensityMatrix(std::move(rho), deficit);
}

double tail_mass(double mbar, int d) { return thermal_tail(mbar, d); }

double approximation_bound(double mbar, int d) { return 6.0 * tail_mass(mbar, d); }

double spectral_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "spectral_distance: dims " + std::to_string(a.dim()) + " and " +
                                                  std::to_string(b.dim()));
  }
  const auto la = hermitian_eigenvalues(a.entries());
  const auto lb = hermitian_eigenvalues(b.entries());
  return (la - lb).cwiseAbs().maxCoeff();
}

EigenConvergence eigen_convergence(const DensityMatrix& rho, double mbar, int branches) {
  if (branches < 1) {
    throw Error(ErrorKind::NonPhysicalInput, "at least one eigenbranch must be tracked");
  }
  if (branches > rho.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "cannot track " + std::to_string(branches) +
                                                  " branches at cutoff " + std::to_string(rho.dim()));
  }
  const auto thermal = thermal_state(mbar, rho.dim());

  std::vector<double> lambda(static_cast<std::size_t>(branches) + 1);
  for (int k = 0; k <= branches; ++k) lambda[k] = thermal_eigenvalue(mbar, k);
  for (int k = 0; k < branches; ++k) {
    if (!(lambda[k] - lambda[k + 1] > 0.0)) {
      throw Error(ErrorKind::DegenerateSpectrum, "thermal eigenvalues " + std::to_string(k) + " and " +
                                                     std::to_string(k + 1) + " coincide at mbar = " +
                                                     std::to_string(mbar));
    }
  }

  const double dist = trace_norm_distance(rho, thermal);
  const Spectrum spec = hermitian_eig(rho);

  EigenConvergence out;
  for (int k = 0; k < branches; ++k) {
    out.eig_gap.push_back(std::abs(spec.eigenvalues[k] - lambda[k]));

    // 2 sqrt(1 - |<k|phi>|^2), with the complement summed directly so small
    // gaps keep their relative precision.
    const auto phi = spec.eigenvectors.col(k);
    const double total = phi.squaredNorm();
    const double off = phi.head(k).squaredNorm() + phi.tail(phi.size() - k - 1).squaredNorm();
    out.proj_gap.push_back(2.0 * std::sqrt(std::max(off, 0.0) / total));

    const double left = k == 0 ? std::numeric_limits<double>::infinity() : lambda[k - 1] - lambda[k];
    const double right = lambda[k] - lambda[k + 1];
    out.identifiable.push_back(std::min(left, right) > 10.0 * dist);
  }
  return out;
}

EigenConvergence eigen_convergence(const Constellation& c, double mbar, int dim, int branches) {
  return eigen_convergence(constellation_density(c, dim), mbar, branches);
}

double truncation_deficit(const Constellation& c, int dim) {
  double deficit = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double p = c.probs()[k];
    const auto x = c.points()[k];
    deficit += folded(p, x) ? p : p * poisson_upper_tail(std::norm(x), dim);
  }
  return deficit;
}

int reference_dim(double mbar, std::span<const Constellation> constellations) {
  int dim = 1;
  while (thermal_tail(mbar, dim) >= kReferenceDeficit) ++dim;
  for (const auto& c : constellations) {
    while (truncation_deficit(c, dim) >= kMaxConstellationDeficit) ++dim;
  }
  return dim;
}

ConvergenceReport convergence_report(const Constellation& c, double mbar, int dim, int branches) {
  const auto rho = constellation_density(c, dim);
  const auto thermal = thermal_state(mbar, dim);
  const auto eig = eigen_convergence(rho, mbar, branches);

  ConvergenceReport r;
  r.m = c.order();
  r.mbar = mbar;
  r.dim = dim;
  r.trace_dist = trace_norm_distance(rho, thermal);
  r.tail_eps = tail_mass(mbar, dim);
  r.bound_6eps = approximation_bound(mbar, dim);
  r.spectral_dist = spectral_distance(rho, thermal);
  r.deficit = rho.deficit();
  r.eig_gap = eig.eig_gap;
  r.proj_gap = eig.proj_gap;
  r.identifiable = eig.identifiable;
  return r;
}

std::vector<ConvergenceReport> convergence_sweep(const std::vector<int>& orders, double mbar,
                                                 const SweepOptions& options) {
  std::vector<Constellation> constellations;
  for (int m : orders) constellations.push_back(shaped_qam(m, mbar, options.spacing));
  const int branches = mbar == 0.0 ? 1 : options.branches;
  const int dim = options.dim.value_or(std::max(reference_dim(mbar, constellations), branches + 1));

  std::vector<ConvergenceReport> reports;
  reports.reserve(constellations.size());
  for (const auto& c : constellations) {
    reports.push_back(convergence_report(c, mbar, dim, branches));
  }
  return reports;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  return {{"m", r.m},
          {"mbar", r.mbar},
          {"dim", r.dim},
          {"trace_dist", r.trace_dist},
          {"tail_eps", r.tail_eps},
          {"bound_6eps", r.bound_6eps},
          {"bound_informative", bound_is_informative(r.bound_6eps)},
          {"spectral_dist", r.spectral_dist},
          {"deficit", r.deficit},
          {"eig_gap", r.eig_gap},
          {"proj_gap", r.proj_gap},
          {"identifiable", r.identifiable}};
}

}  // namespace dmcv
