#include "qmono/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmono {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("dims must be nonempty");
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("party dimensions must be >= 2");
  }
}

// Strides for mixed-radix indices; party 0 varies slowest (kron order).
std::vector<long> strides_of(const std::vector<int>& dims) {
  std::vector<long> s(dims.size());
  long acc = 1;
  for (int p = static_cast<int>(dims.size()) - 1; p >= 0; --p) {
    s[p] = acc;
    acc *= dims[p];
  }
  return s;
}

void check_keep(const std::vector<int>& keep, int num_parties) {
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= num_parties)
      throw std::invalid_argument("invalid party index " + std::to_string(keep[i]));
    if (i > 0 && keep[i] <= keep[i - 1])
      throw std::invalid_argument("keep indices must be strictly increasing");
  }
}

struct CutIndexer {
  std::vector<int> keep;
  std::vector<int> traced;
  std::vector<int> keep_dims;
  std::vector<int> traced_dims;
  long keep_dim = 1;
  long traced_dim = 1;
  std::vector<long> keep_stride;    // stride of each kept party in the global index
  std::vector<long> traced_stride;  // same for traced parties

  CutIndexer(const std::vector<int>& dims, const std::vector<int>& keep_set) : keep(keep_set) {
    check_keep(keep_set, static_cast<int>(dims.size()));
    auto strides = strides_of(dims);
    for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
      if (std::find(keep.begin(), keep.end(), p) == keep.end()) traced.push_back(p);
    }
    for (int p : keep) {
      keep_dims.push_back(dims[p]);
      keep_stride.push_back(strides[p]);
      keep_dim *= dims[p];
    }
    for (int p : traced) {
      traced_dims.push_back(dims[p]);
      traced_stride.push_back(strides[p]);
      traced_dim *= dims[p];
    }
  }

  long global_index(long k, long t) const {
    long g = 0;
    for (int i = static_cast<int>(keep_dims.size()) - 1; i >= 0; --i) {
      g += (k % keep_dims[i]) * keep_stride[i];
      k /= keep_dims[i];
    }
    for (int i = static_cast<int>(traced_dims.size()) - 1; i >= 0; --i) {
      g += (t % traced_dims[i]) * traced_stride[i];
      t /= traced_dims[i];
    }
    return g;
  }
};

// Amplitudes reshaped to a keep_dim x traced_dim matrix.
Matrix fiber_matrix(const StateVector& psi, const CutIndexer& cut) {
  Matrix m(cut.keep_dim, cut.traced_dim);
  const Vector& a = psi.amplitudes();
  for (long k = 0; k < cut.keep_dim; ++k)
    for (long t = 0; t < cut.traced_dim; ++t) m(k, t) = a(cut.global_index(k, t));
  return m;
}

std::vector<double> clamp_spectrum(Eigen::VectorXd raw) {
  std::vector<double> eigs(raw.data(), raw.data() + raw.size());
  for (double& x : eigs) {
    if (x < kEigenFloor)
      throw std::invalid_argument("operator has eigenvalue " + std::to_string(x) +
                                  " below the PSD tolerance");
    x = std::clamp(x, 0.0, 1.0);
  }
  std::sort(eigs.begin(), eigs.end(), std::greater<>());
  return eigs;
}

}  // namespace

long dim_product(const std::vector<int>& dims) {
  long d = 1;
  for (int x : dims) d *= x;
  return d;
}

ProbabilityDistribution::ProbabilityDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("distribution must be nonempty");
  double sum = 0;
  for (double& w : weights_) {
    if (w < -kSpectrumCut || w > 1 + kProbTol)
      throw std::invalid_argument("probability " + std::to_string(w) + " outside [0,1]");
    if (w < 0) w = 0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > kProbTol)
    throw std::invalid_argument("probabilities must sum to 1 (got " + std::to_string(sum) + ")");
}

StateVector::StateVector(std::vector<int> dims, Vector amplitudes, double norm_tol)
    : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  check_dims(dims_);
  if (amps_.size() != dim_product(dims_))
    throw std::invalid_argument("amplitude count " + std::to_string(amps_.size()) +
                                " does not match dims product " +
                                std::to_string(dim_product(dims_)));
  if (std::abs(amps_.norm() - 1.0) > norm_tol)
    throw std::invalid_argument("state vector is not normalized (norm " +
                                std::to_string(amps_.norm()) + ")");
}

StateVector StateVector::basis(std::vector<int> dims, long index) {
  long d = dim_product(dims);
  if (index < 0 || index >= d) throw std::invalid_argument("basis index out of range");
  Vector v = Vector::Zero(d);
  v(index) = 1.0;
  return StateVector(std::move(dims), std::move(v));
}

Complex StateVector::overlap(const StateVector& other) const {
  if (dims_ != other.dims_) throw std::invalid_argument("overlap: dimension mismatch");
  return amps_.dot(other.amps_);  // conjugates this
}

DensityMatrix::DensityMatrix(std::vector<int> dims, Matrix entries, double trace_tol)
    : dims_(std::move(dims)), mat_(std::move(entries)) {
  check_dims(dims_);
  long d = dim_product(dims_);
  if (d > kMaxMatrixDim)
    throw std::invalid_argument("matrix dimension " + std::to_string(d) +
                                " exceeds the supported size");
  if (mat_.rows() != d || mat_.cols() != d)
    throw std::invalid_argument("matrix size does not match dims product");
  double herm_dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermitianTol)
    throw std::invalid_argument("matrix is not Hermitian (deviation " +
                                std::to_string(herm_dev) + ")");
  mat_ = 0.5 * (mat_ + mat_.adjoint().eval());
  double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > trace_tol)
    throw std::invalid_argument("matrix trace " + std::to_string(tr) + " is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kEigenFloor)
    throw std::invalid_argument("matrix is not positive semidefinite (min eigenvalue " +
                                std::to_string(solver.eigenvalues().minCoeff()) + ")");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(psi.dims(), std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::vector<int> dims) {
  long d = dim_product(dims);
  return DensityMatrix(std::move(dims), Matrix::Identity(d, d) / static_cast<double>(d));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<int> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  Vector out(a.dim() * b.dim());
  for (long i = 0; i < a.dim(); ++i)
    out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return StateVector(std::move(dims), std::move(out));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<int> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  long da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (long i = 0; i < da; ++i)
    for (long j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.entries()(i, j) * b.entries();
  return DensityMatrix(std::move(dims), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& state, const std::vector<int>& keep) {
  CutIndexer cut(state.dims(), keep);
  Matrix out = Matrix::Zero(cut.keep_dim, cut.keep_dim);
  const Matrix& rho = state.entries();
  for (long r = 0; r < cut.keep_dim; ++r)
    for (long c = 0; c < cut.keep_dim; ++c) {
      Complex acc = 0;
      for (long t = 0; t < cut.traced_dim; ++t)
        acc += rho(cut.global_index(r, t), cut.global_index(c, t));
      out(r, c) = acc;
    }
  return DensityMatrix(cut.keep_dims, std::move(out));
}

DensityMatrix partial_trace(const StateVector& psi, const std::vector<int>& keep) {
  CutIndexer cut(psi.dims(), keep);
  Matrix m = fiber_matrix(psi, cut);
  Matrix rho = m * m.adjoint();
  return DensityMatrix(cut.keep_dims, std::move(rho));
}

std::vector<double> reduced_spectrum(const StateVector& psi, const std::vector<int>& keep) {
  CutIndexer cut(psi.dims(), keep);
  Matrix m = fiber_matrix(psi, cut);
  Matrix gram = (cut.keep_dim <= cut.traced_dim) ? Matrix(m * m.adjoint())
                                                 : Matrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return clamp_spectrum(solver.eigenvalues());
}

std::vector<double> eigenvalues(const DensityMatrix& state) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state.entries(), Eigen::EigenvaluesOnly);
  auto eigs = clamp_spectrum(solver.eigenvalues());
  double sum = std::accumulate(eigs.begin(), eigs.end(), 0.0);
  if (std::abs(sum - 1.0) > kTraceTol)
    throw std::runtime_error("spectrum does not sum to 1");
  return eigs;
}

double entropy_from_spectrum(std::span<const double> eigs) {
  double s = 0;
  for (double x : eigs)
    if (x > kSpectrumCut) s -= x * std::log2(x);
  return s;
}

double von_neumann_entropy(const DensityMatrix& state) {
  return entropy_from_spectrum(eigenvalues(state));
}

double shannon_entropy(std::span<const double> weights) {
  double s = 0;
  for (double w : weights)
    if (w > kSpectrumCut) s -= w * std::log2(w);
  return s;
}

double shannon_entropy(const ProbabilityDistribution& dist) {
  return shannon_entropy(std::span<const double>(dist.weights()));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("trace_distance: dimension mismatch");
  Matrix diff = a.entries() - b.entries();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace qmono
