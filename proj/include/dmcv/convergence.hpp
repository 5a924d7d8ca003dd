#pragma once

// Distance between a constellation state sum_k p_k |x_k><x_k| and the thermal
// state with the same mean photon number, plus the tail, spectral and
// eigenprojector quantities that track how fast the former approaches the
// latter.

#include <optional>
#include <span>
#include <vector>

#include "dmcv/constellation.hpp"
#include "dmcv/fock.hpp"
#include "json.hpp"

namespace dmcv {

inline constexpr int kDefaultBranches = 6;
inline constexpr double kMaxConstellationDeficit = 1e-6;
inline constexpr double kReferenceDeficit = 1e-8;

/// sum_k p_k |x_k><x_k| over truncated coherent vectors. Throws
/// TruncationTooSevere when the lost mass reaches 1e-6. Points beyond the
/// coherent_fock energy guard whose probability is below 1e-18 are folded
/// into the deficit instead of expanded.
DensityMatrix constellation_density(const Constellation& c, int dim);

/// Thermal mass above the first d levels, (mbar/(mbar+1))^d.
double tail_mass(double mbar, int d);

/// 6 * tail_mass(mbar, d). Values >= 2 carry no information.
double approximation_bound(double mbar, int d);
inline bool bound_is_informative(double bound) { return bound < 2.0; }

/// Largest |lambda_i - mu_i| between the descending spectra of a and b.
double spectral_distance(const DensityMatrix& a, const DensityMatrix& b);

struct EigenConvergence {
  std::vector<double> eig_gap;   // |lambda_{k,n} - lambda_k|
  std::vector<double> proj_gap;  // || |phi_{k,n}><phi_{k,n}| - |k><k| ||_1
  // Thermal gaps around branch k exceed 10 x the trace distance, so the
  // descending-order pairing is unambiguous.
  std::vector<bool> identifiable;
};

/// Eigenbranches k < branches of the constellation state against the thermal
/// eigenpairs (mbar^k/(mbar+1)^(k+1), |k>), paired in descending order.
EigenConvergence eigen_convergence(const DensityMatrix& rho, double mbar, int branches = kDefaultBranches);
EigenConvergence eigen_convergence(const Constellation& c, double mbar, int dim,
                                   int branches = kDefaultBranches);

/// Mass lost when the constellation's coherent states are cut at `dim`.
double truncation_deficit(const Constellation& c, int dim);

/// Smallest cutoff whose thermal deficit is below kReferenceDeficit and at
/// which every given constellation loses less than kMaxConstellationDeficit.
int reference_dim(double mbar, std::span<const Constellation> constellations = {});

struct ConvergenceReport {
  int m = 0;
  double mbar = 0.0;
  int dim = 0;
  double trace_dist = 0.0;
  double tail_eps = 0.0;
  double bound_6eps = 0.0;
  double spectral_dist = 0.0;
  double deficit = 0.0;
  std::vector<double> eig_gap;
  std::vector<double> proj_gap;
  std::vector<bool> identifiable;
};

ConvergenceReport convergence_report(const Constellation& c, double mbar, int dim,
                                     int branches = kDefaultBranches);

struct SweepOptions {
  std::optional<int> dim;          // defaults to reference_dim over the whole sweep
  int branches = kDefaultBranches;
  std::optional<double> spacing;   // defaults to default_spacing(m, mbar)
};

/// One report per order, each against an MB-shaped QAM solved to hit mbar.
/// With mbar = 0 the thermal reference is |0><0| and only branch 0 is tracked.
std::vector<ConvergenceReport> convergence_sweep(const std::vector<int>& orders, double mbar,
                                                 const SweepOptions& options = {});

nlohmann::json to_json(const ConvergenceReport& r);

}  // namespace dmcv
