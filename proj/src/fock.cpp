#include "dmcv/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "dmcv/error.hpp"

namespace dmcv {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kClampTol = 1e-10;

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": matrix is not square");
  }
}

void require_same_shape(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "operands have shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

int mode_dim_of(const CMatrix& m) {
  require_square(m, "partial_trace");
  const auto n = m.rows();
  auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n || d == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension " + std::to_string(n) + " is not a perfect square");
  }
  return static_cast<int>(d);
}

}  // namespace

DensityMatrix::DensityMatrix(CMatrix entries, double deficit)
    : entries_(std::move(entries)), deficit_(deficit) {
  require_square(entries_, "DensityMatrix");
  if (entries_.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "DensityMatrix: empty matrix");
  }
  if (!(deficit_ >= 0.0 && deficit_ <= 1.0)) {
    throw Error(ErrorKind::NonPhysicalInput, "deficit outside [0,1]");
  }
  if (hermiticity_error(entries_) > 1e-12) {
    throw Error(ErrorKind::NotHermitian, "DensityMatrix entries are not Hermitian");
  }
  if (std::abs(trace() + deficit_ - 1.0) > 1e-10) {
    throw Error(ErrorKind::NonPhysicalInput,
                "trace + deficit = " + std::to_string(trace() + deficit_) + ", expected 1");
  }
}

CMatrix Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

FockVector coherent_fock(Complex alpha, int dim) {
  if (dim < 1) {
    throw Error(ErrorKind::NonPhysicalInput, "Fock cutoff must be >= 1");
  }
  const double energy = std::norm(alpha);
  if (!std::isfinite(energy) || energy > kMaxCoherentEnergy) {
    throw Error(ErrorKind::NonPhysicalInput,
                "|alpha|^2 = " + std::to_string(energy) + " exceeds " + std::to_string(kMaxCoherentEnergy));
  }
  // c_{n+1} = c_n * alpha / sqrt(n+1); no explicit factorials.
  CVector amps(dim);
  amps[0] = std::exp(-energy / 2.0);
  for (int n = 1; n < dim; ++n) {
    amps[n] = amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  }
  return {std::move(amps)};
}

double poisson_upper_tail(double mean, int dim) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw Error(ErrorKind::NonPhysicalInput, "Poisson mean must be finite and >= 0");
  }
  if (dim <= 0) return 1.0;
  if (mean == 0.0) return 0.0;
  // Sum terms from n = dim upwards; they rise until n ~ mean and then decay
  // geometrically.
  double term = std::exp(-mean + dim * std::log(mean) - boost::math::lgamma(static_cast<double>(dim) + 1.0));
  double sum = 0.0;
  for (long n = dim; n < dim + 100000; ++n) {
    sum += term;
    if (n >= mean && term <= 1e-19 * sum) break;
    term *= mean / static_cast<double>(n + 1);
  }
  return std::min(sum, 1.0);
}

double thermal_tail(double mbar, int d) {
  if (mbar < 0.0 || !std::isfinite(mbar)) {
    throw Error(ErrorKind::NonPhysicalInput, "mean photon number must be finite and >= 0");
  }
  if (d < 0) {
    throw Error(ErrorKind::NonPhysicalInput, "tail index must be >= 0");
  }
  return std::pow(mbar / (mbar + 1.0), d);
}

DensityMatrix thermal_state(double mbar, int dim) {
  if (dim < 1) {
    throw Error(ErrorKind::NonPhysicalInput, "Fock cutoff must be >= 1");
  }
  const double deficit = thermal_tail(mbar, dim);
  const double ratio = mbar / (mbar + 1.0);
  CMatrix entries = CMatrix::Zero(dim, dim);
  double weight = 1.0 / (mbar + 1.0);
  for (int k = 0; k < dim; ++k) {
    entries(k, k) = weight;
    weight *= ratio;
  }
  return DensityMatrix(std::move(entries), deficit);
}

double hermiticity_error(const CMatrix& m) {
  require_square(m, "hermiticity_error");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Spectrum hermitian_eig(const CMatrix& m) {
  require_square(m, "hermitian_eig");
  if (hermiticity_error(m) > kHermitianTol) {
    throw Error(ErrorKind::NotHermitian, "input deviates from its adjoint by more than 1e-10");
  }
  const CMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  // Eigen returns ascending order.
  Spectrum out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  require_square(m, "hermitian_eigenvalues");
  if (hermiticity_error(m) > kHermitianTol) {
    throw Error(ErrorKind::NotHermitian, "input deviates from its adjoint by more than 1e-10");
  }
  const CMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

bool is_psd(const CMatrix& m, double tol) {
  const auto values = hermitian_eigenvalues(m);
  return values.size() == 0 || values[values.size() - 1] >= -tol;
}

CMatrix matrix_sqrt_psd(const CMatrix& m) {
  const Spectrum spec = hermitian_eig(m);
  Eigen::VectorXd roots(spec.size());
  for (int k = 0; k < spec.size(); ++k) {
    const double v = spec.eigenvalues[k];
    if (v < -kClampTol) {
      throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(v) + " below -1e-10");
    }
    roots[k] = std::sqrt(std::max(v, 0.0));
  }
  CMatrix root = spec.eigenvectors * roots.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();
  return (root + root.adjoint()) / 2.0;
}

double trace_norm_distance(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b);
  return hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

CMatrix tensor_product(const CMatrix& a, const CMatrix& b) {
  require_square(a, "tensor_product");
  require_square(b, "tensor_product");
  const auto da = a.rows();
  const auto db = b.rows();
  CMatrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix partial_trace(const CMatrix& m, Side traced) {
  const int d = mode_dim_of(m);
  CMatrix out = CMatrix::Zero(d, d);
  if (traced == Side::B) {
    // out[l][l'] = sum_k m[l*d+k][l'*d+k]
    for (int l = 0; l < d; ++l) {
      for (int lp = 0; lp < d; ++lp) {
        out(l, lp) = m.block(l * d, lp * d, d, d).trace();
      }
    }
  } else {
    // out[k][k'] = sum_l m[l*d+k][l*d+k']
    for (int l = 0; l < d; ++l) {
      out += m.block(l * d, l * d, d, d);
    }
  }
  return out;
}

CMatrix annihilation_op(int dim) {
  if (dim < 2) {
    throw Error(ErrorKind::NonPhysicalInput, "annihilation operator needs cutoff >= 2");
  }
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  return a;
}

}  // namespace dmcv
