#ifndef QMONO_TYPES_HPP
#define QMONO_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmono {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Shared numerical tolerances.
inline constexpr double kHermitianTol = 1e-9;  // max |entry - conj(transposed entry)|
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kProbTol = 1e-9;
inline constexpr double kEigenFloor = -1e-9;    // below this an eigenvalue is an error
inline constexpr double kSpectrumCut = 1e-12;   // spectrum entries below this contribute nothing
inline constexpr double kDegeneracyTol = 1e-9;  // eigenvalues closer than this are treated as equal
inline constexpr long kMaxMatrixDim = 4096;     // desk-scale cap for dense operators

long dim_product(const std::vector<int>& dims);

/// Discrete distribution: nonnegative weights summing to one.
class ProbabilityDistribution {
 public:
  explicit ProbabilityDistribution(std::vector<double> weights);

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

/// Pure state on a tensor product of finite-dimensional parties.
class StateVector {
 public:
  StateVector(std::vector<int> dims, Vector amplitudes, double norm_tol = kNormTol);

  static StateVector basis(std::vector<int> dims, long index);

  const std::vector<int>& dims() const { return dims_; }
  const Vector& amplitudes() const { return amps_; }
  long dim() const { return amps_.size(); }
  int num_parties() const { return static_cast<int>(dims_.size()); }

  Complex overlap(const StateVector& other) const;  // <this|other>

 private:
  std::vector<int> dims_;
  Vector amps_;
};

/// Hermitian, unit-trace, positive-semidefinite operator on a tensor
/// product space. Hermiticity is enforced by symmetrizing (M + M^dag)/2
/// when the deviation is within tolerance.
class DensityMatrix {
 public:
  DensityMatrix(std::vector<int> dims, Matrix entries, double trace_tol = kTraceTol);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  const Matrix& entries() const { return mat_; }
  long dim() const { return mat_.rows(); }
  int num_parties() const { return static_cast<int>(dims_.size()); }

 private:
  std::vector<int> dims_;
  Matrix mat_;
};

}  // namespace qmono

#endif
