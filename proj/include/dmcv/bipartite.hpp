#pragma once

// Purifications of single-mode states and the two-mode covariance quantities
// compared against the EPR (two-mode squeezed vacuum) reference.

#include <string>

#include "dmcv/channel.hpp"
#include "dmcv/fock.hpp"
#include "json.hpp"

namespace dmcv {

// Pure state |Phi> on C^d (x) C^d, amplitude of |l>_A|k>_B at l*d + k.
// Stored as the vector; density() materializes the d^2 x d^2 operator.
class BipartiteState {
 public:
  BipartiteState(int mode_dim, CVector phi, std::string source);

  int mode_dim() const { return mode_dim_; }
  const CVector& phi() const { return phi_; }
  const std::string& source() const { return source_; }

  double trace() const { return phi_.squaredNorm(); }

  // O(d^4) memory: 85 MB at d = 48.
  CMatrix density() const;

  // Reduced states from the amplitude matrix M[l][k] = Phi[l*d + k]:
  // tr_B = M M^dagger, tr_A = M^T conj(M). O(d^3).
  CMatrix reduced(Side traced) const;

 private:
  int mode_dim_;
  CVector phi_;
  std::string source_;
};

/// |Phi> = (1 (x) rho^{1/2}) sum_n |n>|n>, i.e. Phi[l*d + k] = (rho^{1/2})[k][l].
BipartiteState purify(const DensityMatrix& rho, std::string source = {});

struct EprReference {
  double nu = 1.0;        // 2 mbar + 1
  double z = 0.0;         // 2 sqrt(mbar^2 + mbar)
  double squeeze_r = 0.0; // asinh(sqrt(mbar))
  double lambda = 0.0;    // sqrt(mbar / (mbar + 1)) = tanh(r)
};

EprReference epr_reference(double mbar);

struct CovarianceMatrix {
  double va = 1.0;
  double vb = 1.0;
  double z = 0.0;

  // [[va I, z sz], [z sz, vb I]] with sz = diag(1, -1).
  Eigen::Matrix4d layout() const;

  // |z| <= sqrt((va - 1)(vb + 1)); informational only.
  bool within_physical_bound() const;
};

// V_A = 2 mbar + 1; V_B = tau (2 mbar) + 1 + tau xi is a bookkeeping
// convention for the thermal-loss channel and does not enter cm_distance.
CovarianceMatrix covariance_matrix(double mbar, double z, const ChannelModel& ch);

/// Z_ch = 2 sqrt(tau) sqrt(mbar^2 + mbar), the channel-scaled EPR correlation.
double channel_z(double mbar, double tau);

/// Z*_n = sqrt(tau) tr[rho_AB (a b + a^dag b^dag)] - sqrt(2 tau xi w).
double z_star(const BipartiteState& state, const ChannelModel& ch, double w = 0.0);

/// <Phi| a (x) b |Phi> from the amplitudes, without building d^2 operators.
Complex two_mode_correlation(const BipartiteState& state);

/// Hilbert-Schmidt distance between the reference and estimated covariance
/// matrices; the diagonal blocks cancel, leaving 2 |Z_ch - Z*|.
double cm_distance(double mbar, double zstar, const ChannelModel& ch);

/// Trace distance between two pure bipartite states from their overlap.
double bipartite_trace_distance(const BipartiteState& a, const BipartiteState& b);

nlohmann::json to_json(const CovarianceMatrix& cm);

}  // namespace dmcv
