#pragma once

// Dense linear algebra over a truncated Fock basis {|0>, ..., |d-1>}.
//
// Bipartite operators use A-mode-major ordering: |l>_A |k>_B sits at row
// l * d + k. Truncated states are never renormalized; the probability mass
// lost above the cutoff is carried as an explicit deficit.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace dmcv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Largest |alpha|^2 accepted by coherent_fock.
inline constexpr double kMaxCoherentEnergy = 50.0;

struct FockVector {
  CVector amps;

  int dim() const { return static_cast<int>(amps.size()); }
  double squared_norm() const { return amps.squaredNorm(); }
};

class DensityMatrix {
 public:
  // Validates Hermiticity (1e-12) and trace + deficit = 1 (1e-10).
  // Positivity is not re-checked here; see is_psd().
  DensityMatrix(CMatrix entries, double deficit);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  double deficit() const { return deficit_; }
  double trace() const { return entries_.trace().real(); }

 private:
  CMatrix entries_;
  double deficit_;
};

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // descending
  CMatrix eigenvectors;         // column k pairs with eigenvalues[k]

  int size() const { return static_cast<int>(eigenvalues.size()); }
  FockVector vector(int k) const { return {eigenvectors.col(k)}; }
  CMatrix reconstruct() const;
};

enum class Side { A, B };

/// First `dim` Fock coefficients of the coherent state |alpha>.
FockVector coherent_fock(Complex alpha, int dim);

/// P(N >= dim) for N ~ Poisson(mean): the mass a coherent state of energy
/// `mean` loses when truncated to `dim` levels.
double poisson_upper_tail(double mean, int dim);

/// sum_{k >= d} mbar^k / (mbar+1)^(k+1) = (mbar/(mbar+1))^d.
double thermal_tail(double mbar, int d);

/// Thermal state diag(mbar^k/(mbar+1)^(k+1)) with deficit thermal_tail(mbar, dim).
DensityMatrix thermal_state(double mbar, int dim);

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
Spectrum hermitian_eig(const CMatrix& m);
inline Spectrum hermitian_eig(const DensityMatrix& rho) { return hermitian_eig(rho.entries()); }

/// Eigenvalues only, descending.
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m);

/// Smallest eigenvalue >= -1e-10.
bool is_psd(const CMatrix& m, double tol = 1e-10);

// Eigenvalues in [-1e-10, 0) are clamped to zero; anything more negative
// raises NotPSD.
CMatrix matrix_sqrt_psd(const CMatrix& m);
inline CMatrix matrix_sqrt_psd(const DensityMatrix& rho) { return matrix_sqrt_psd(rho.entries()); }

/// ||a - b||_1, the sum of absolute eigenvalues of the difference.
double trace_norm_distance(const CMatrix& a, const CMatrix& b);
inline double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_norm_distance(a.entries(), b.entries());
}

CMatrix tensor_product(const CMatrix& a, const CMatrix& b);

/// Traces out `traced` from an operator on C^d (x) C^d.
CMatrix partial_trace(const CMatrix& m, Side traced);

/// Truncated annihilation operator: sqrt(k) at (k-1, k).
CMatrix annihilation_op(int dim);

/// Max |m_ij - conj(m_ji)|.
double hermiticity_error(const CMatrix& m);

}  // namespace dmcv
