#include "qmono/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <future>
#include <numeric>

#include "qmono/qcore.hpp"
#include "qmono/rng.hpp"

namespace qmono {

namespace {

using BigFloat150 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<150>>;
using BigFloat600 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<600>>;

}  // namespace

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr int kMcShards = 64;

double clamp_small_negative(double x, const char* what) {
  if (x < kEigenFloor)
    throw std::runtime_error(std::string(what) + " came out negative (" + std::to_string(x) + ")");
  return std::max(x, 0.0);
}

std::vector<double> element_spectrum(const MultipartyEnsemble& ens, std::size_t i) {
  const auto& el = ens.element(i);
  if (el.is_pure()) return {1.0};
  return eigenvalues(std::get<DensityMatrix>(el.state));
}

// Entropy of the reduction of one element to `keep`; pure elements are
// evaluated on the smaller side of the cut.
double element_reduced_entropy(const MultipartyEnsemble& ens, std::size_t i,
                               const std::vector<int>& keep) {
  const auto& el = ens.element(i);
  if (el.is_pure()) {
    auto spec = reduced_spectrum(std::get<StateVector>(el.state), keep);
    return entropy_from_spectrum(spec);
  }
  return von_neumann_entropy(partial_trace(std::get<DensityMatrix>(el.state), keep));
}

// Gram-matrix spectrum of sum_i p_i M_i M_i^dag given the blocks M_i.
std::vector<double> gram_spectrum(const std::vector<Matrix>& blocks,
                                  const std::vector<double>& probs) {
  long total = 0;
  for (const Matrix& m : blocks) total += m.cols();
  Matrix gram(total, total);
  long row0 = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    long col0 = 0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      gram.block(row0, col0, blocks[i].cols(), blocks[j].cols()) =
          std::sqrt(probs[i] * probs[j]) * (blocks[i].adjoint() * blocks[j]);
      col0 += blocks[j].cols();
    }
    row0 += blocks[i].cols();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  std::vector<double> eigs(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& x : eigs) x = std::clamp(x, 0.0, 1.0);
  std::sort(eigs.begin(), eigs.end(), std::greater<>());
  return eigs;
}

// Amplitudes of a pure state reshaped to keep_dim x traced_dim; mirrors the
// slicing used by the pure-state partial trace.
Matrix fibers_of(const StateVector& psi, const std::vector<int>& keep) {
  const auto& dims = psi.dims();
  std::vector<long> strides(dims.size());
  long acc = 1;
  for (int p = static_cast<int>(dims.size()) - 1; p >= 0; --p) {
    strides[p] = acc;
    acc *= dims[p];
  }
  std::vector<int> traced;
  for (int p = 0; p < static_cast<int>(dims.size()); ++p)
    if (std::find(keep.begin(), keep.end(), p) == keep.end()) traced.push_back(p);
  long keep_dim = 1, traced_dim = 1;
  for (int p : keep) keep_dim *= dims[p];
  for (int p : traced) traced_dim *= dims[p];
  Matrix m(keep_dim, traced_dim);
  for (long k = 0; k < keep_dim; ++k) {
    long base = 0, kk = k;
    for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
      base += (kk % dims[keep[i]]) * strides[keep[i]];
      kk /= dims[keep[i]];
    }
    for (long t = 0; t < traced_dim; ++t) {
      long g = base, tt = t;
      for (int i = static_cast<int>(traced.size()) - 1; i >= 0; --i) {
        g += (tt % dims[traced[i]]) * strides[traced[i]];
        tt /= dims[traced[i]];
      }
      m(k, t) = psi.amplitudes()(g);
    }
  }
  return m;
}

struct McAccumulator {
  double sum = 0;
  double sum_sq = 0;
  long count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  McAccumulator& operator+=(const McAccumulator& other) {
    sum += other.sum;
    sum_sq += other.sum_sq;
    count += other.count;
    return *this;
  }
  double mean() const { return count > 0 ? sum / count : 0.0; }
  double std_error() const {
    if (count < 2) return 0.0;
    double var = (sum_sq - sum * sum / count) / (count - 1);
    return std::sqrt(std::max(var, 0.0) / count);
  }
};

// Runs `body(shard, engine, shard_samples)` over kMcShards keyed shards,
// split across threads; reduction is in shard order regardless of the
// thread count.
template <typename Body>
std::vector<McAccumulator> run_sharded(long samples, std::uint64_t seed, int threads, int lanes,
                                       Body body) {
  if (samples < 1000) throw std::invalid_argument("Monte-Carlo estimates need samples >= 1000");
  threads = std::max(1, threads);
  std::vector<std::vector<McAccumulator>> per_shard(kMcShards,
                                                    std::vector<McAccumulator>(lanes));
  auto run_range = [&](int lo, int hi) {
    for (int s = lo; s < hi; ++s) {
      long n = samples / kMcShards + (s < samples % kMcShards ? 1 : 0);
      std::mt19937_64 engine = keyed_engine(seed, static_cast<std::uint64_t>(s));
      body(per_shard[s], engine, n);
    }
  };
  if (threads == 1) {
    run_range(0, kMcShards);
  } else {
    std::vector<std::future<void>> futures;
    int per_thread = (kMcShards + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * per_thread;
      int hi = std::min(kMcShards, lo + per_thread);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, run_range, lo, hi));
    }
    for (auto& f : futures) f.get();
  }
  std::vector<McAccumulator> total(lanes);
  for (const auto& shard : per_shard)
    for (int lane = 0; lane < lanes; ++lane) total[lane] += shard[lane];
  return total;
}

double xlog2x(double x) { return x > kSpectrumCut ? x * std::log2(x) : 0.0; }

}  // namespace

std::vector<double> average_state_spectrum(const MultipartyEnsemble& ens) {
  if (ens.all_pure()) {
    std::vector<Matrix> blocks;
    std::vector<double> probs;
    for (const auto& el : ens.elements()) {
      blocks.push_back(std::get<StateVector>(el.state).amplitudes());
      probs.push_back(el.probability);
    }
    return gram_spectrum(blocks, probs);
  }
  return eigenvalues(ens.average_state());
}

std::vector<double> average_reduced_spectrum(const MultipartyEnsemble& ens,
                                             const std::vector<int>& keep) {
  if (ens.all_pure()) {
    std::vector<Matrix> blocks;
    std::vector<double> probs;
    for (const auto& el : ens.elements()) {
      blocks.push_back(fibers_of(std::get<StateVector>(el.state), keep));
      probs.push_back(el.probability);
    }
    long keep_dim = blocks.front().rows();
    long gram_dim = 0;
    for (const Matrix& m : blocks) gram_dim += m.cols();
    if (gram_dim <= keep_dim) return gram_spectrum(blocks, probs);
    // The kept side of the cut is the small one: accumulate the reduced
    // average densely instead of stacking fibers.
    Matrix acc = Matrix::Zero(keep_dim, keep_dim);
    for (std::size_t i = 0; i < blocks.size(); ++i) acc += probs[i] * (blocks[i] * blocks[i].adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(acc, Eigen::EigenvaluesOnly);
    std::vector<double> eigs(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
    for (double& x : eigs) x = std::clamp(x, 0.0, 1.0);
    std::sort(eigs.begin(), eigs.end(), std::greater<>());
    return eigs;
  }
  Matrix acc;
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    const auto& el = ens.element(i);
    Matrix m = el.is_pure() ? partial_trace(std::get<StateVector>(el.state), keep).entries()
                            : partial_trace(std::get<DensityMatrix>(el.state), keep).entries();
    acc = (i == 0) ? Matrix(el.probability * m) : Matrix(acc + el.probability * m);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(acc, Eigen::EigenvaluesOnly);
  std::vector<double> eigs(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& x : eigs) x = std::clamp(x, 0.0, 1.0);
  std::sort(eigs.begin(), eigs.end(), std::greater<>());
  return eigs;
}

BoundReport holevo_chi(const MultipartyEnsemble& ens) {
  double avg = entropy_from_spectrum(average_state_spectrum(ens));
  double cond = 0;
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    auto spec = element_spectrum(ens, i);
    cond += ens.element(i).probability * entropy_from_spectrum(spec);
  }
  return {"chi", clamp_small_negative(avg - cond, "holevo chi"), 0, 0, 0};
}

namespace {

// Confluent Newton divided-difference table of g(x) = x^r ln x over the
// grouped spectrum; repeated nodes compare equal exactly and use
// g^(k)(x) = P_k x^(r-k) (ln x + H_k), P_k = r!/(r-k)!, H_k = sum_{j=r-k+1}^r 1/j.
template <typename Real>
double confluent_subentropy(const std::vector<double>& nodes) {
  using std::log;
  const int r = static_cast<int>(nodes.size());
  auto derivative = [r](int k, const Real& x) -> Real {
    Real pk = 1, hk = 0;
    for (int j = r - k + 1; j <= r; ++j) {
      pk *= j;
      hk += Real(1) / j;
    }
    Real pw = 1;
    for (int e = 0; e < r - k; ++e) pw *= x;
    return pk * pw * (log(x) + hk);
  };

  std::vector<Real> x(nodes.begin(), nodes.end());
  std::vector<Real> dd(r);
  for (int i = 0; i < r; ++i) dd[i] = derivative(0, x[i]);
  Real factorial = 1;
  for (int level = 1; level < r; ++level) {
    factorial *= level;
    for (int i = 0; i + level < r; ++i) {
      if (nodes[i] == nodes[i + level])
        dd[i] = derivative(level, x[i]) / factorial;
      else
        dd[i] = (dd[i + 1] - dd[i]) / (x[i + level] - x[i]);
    }
  }
  return static_cast<double>(-dd[0] / Real(kLn2));
}

}  // namespace

double subentropy_from_spectrum(std::vector<double> eigenvalues) {
  // Zero eigenvalues contribute factors lambda_k/(lambda_k - 0) = 1 and
  // vanishing own terms, so they can be dropped exactly.
  std::erase_if(eigenvalues, [](double x) { return x < kSpectrumCut; });
  if (eigenvalues.empty()) throw std::invalid_argument("subentropy of an empty spectrum");
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  const int r = static_cast<int>(eigenvalues.size());
  if (r == 1) return 0.0;

  // Group almost-equal eigenvalues onto a shared representative node.
  std::vector<double> nodes(r);
  int group_start = 0;
  for (int i = 0; i <= r; ++i) {
    if (i == r || (i > 0 && eigenvalues[i - 1] - eigenvalues[i] > kDegeneracyTol)) {
      double mean = 0;
      for (int k = group_start; k < i; ++k) mean += eigenvalues[k];
      mean /= (i - group_start);
      for (int k = group_start; k < i; ++k) nodes[k] = mean;
      group_start = i;
    }
  }

  // The table cancels terms as large as the Lagrange coefficients
  // lambda^r |ln lambda| / prod |lambda_k - lambda_l| down to an O(1)
  // result, so size the working precision from their magnitude.
  double cancellation_digits = 0;
  for (int k = 0; k < r; ++k) {
    if (k > 0 && nodes[k] == nodes[k - 1]) continue;
    double mag = r * std::log10(nodes[k]) +
                 std::log10(std::max(std::abs(std::log(nodes[k])), 1e-30));
    for (int l = 0; l < r; ++l)
      if (nodes[l] != nodes[k]) mag -= std::log10(std::abs(nodes[k] - nodes[l]));
    cancellation_digits = std::max(cancellation_digits, mag);
  }

  double q;
  if (cancellation_digits < 12)
    q = confluent_subentropy<long double>(nodes);
  else if (cancellation_digits < 40)
    q = confluent_subentropy<boost::multiprecision::cpp_bin_float_50>(nodes);
  else if (cancellation_digits < 130)
    q = confluent_subentropy<BigFloat150>(nodes);
  else
    q = confluent_subentropy<BigFloat600>(nodes);
  return clamp_small_negative(q, "subentropy");
}

double subentropy(const DensityMatrix& state) {
  return subentropy_from_spectrum(eigenvalues(state));
}

BoundReport jrw_lower(const MultipartyEnsemble& ens) {
  double avg = subentropy_from_spectrum(average_state_spectrum(ens));
  double cond = 0;
  for (std::size_t i = 0; i < ens.cardinality(); ++i)
    cond += ens.element(i).probability * subentropy_from_spectrum(element_spectrum(ens, i));
  return {"jrw_lower", clamp_small_negative(avg - cond, "jrw lower bound"), 0, 0, 0};
}

BoundReport chi_locc(const MultipartyEnsemble& ens) {
  if (!ens.bipartite())
    throw std::invalid_argument("chi_locc requires a bipartite ensemble (got " +
                                std::to_string(ens.parties().size()) + " parties)");
  double avg_1 = entropy_from_spectrum(average_reduced_spectrum(ens, {0}));
  double avg_2 = entropy_from_spectrum(average_reduced_spectrum(ens, {1}));
  double cond_1 = 0, cond_2 = 0;
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    double p = ens.element(i).probability;
    cond_1 += p * element_reduced_entropy(ens, i, {0});
    cond_2 += p * element_reduced_entropy(ens, i, {1});
  }
  double value = avg_1 + avg_2 - std::max(cond_1, cond_2);
  return {"chi_locc", clamp_small_negative(value, "chi_locc"), 0, 0, 0};
}

StateVector haar_product_sample(int d1, int d2, std::mt19937_64& engine) {
  if (d1 < 2 || d2 < 2) throw std::invalid_argument("haar_product_sample: dims must be >= 2");
  Vector a = haar_state(d1, engine);
  Vector b = haar_state(d2, engine);
  Vector v(d1 * d2);
  for (int i = 0; i < d1; ++i) v.segment(i * d2, d2) = a(i) * b;
  return StateVector({d1, d2}, std::move(v));
}

BoundReport local_subentropy_mc(const DensityMatrix& zeta, long samples, std::uint64_t seed,
                                int threads) {
  if (zeta.num_parties() != 2)
    throw std::invalid_argument("local_subentropy_mc requires a bipartite state");
  const int d1 = zeta.dims()[0];
  const int d2 = zeta.dims()[1];
  const double scale = static_cast<double>(d1) * d2;
  const Matrix& z = zeta.entries();

  auto totals = run_sharded(samples, seed, threads, 1,
                            [&](std::vector<McAccumulator>& acc, std::mt19937_64& engine, long n) {
                              for (long k = 0; k < n; ++k) {
                                Vector a = haar_state(d1, engine);
                                Vector b = haar_state(d2, engine);
                                Vector v(d1 * d2);
                                for (int i = 0; i < d1; ++i) v.segment(i * d2, d2) = a(i) * b;
                                double f = std::real(v.dot(z * v));
                                acc[0].add(-scale * xlog2x(f));
                              }
                            });
  return {"Q_L", totals[0].mean(), totals[0].std_error(), samples, seed};
}

BoundReport lambda_locc(const MultipartyEnsemble& ens, long samples, std::uint64_t seed,
                        int threads) {
  if (!ens.bipartite()) throw std::invalid_argument("lambda_locc requires a bipartite ensemble");
  const int d1 = ens.dims()[0];
  const int d2 = ens.dims()[1];
  const std::size_t gamma = ens.cardinality();
  std::vector<double> probs = ens.priors().weights();

  // Marginals of every element on both sides of the cut.
  std::vector<Matrix> marg1, marg2;
  for (std::size_t i = 0; i < gamma; ++i) {
    const auto& el = ens.element(i);
    if (el.is_pure()) {
      const auto& psi = std::get<StateVector>(el.state);
      marg1.push_back(partial_trace(psi, {0}).entries());
      marg2.push_back(partial_trace(psi, {1}).entries());
    } else {
      const auto& rho = std::get<DensityMatrix>(el.state);
      marg1.push_back(partial_trace(rho, {0}).entries());
      marg2.push_back(partial_trace(rho, {1}).entries());
    }
  }

  // Per sample, common random numbers across the average and all elements:
  // lane k accumulates -d_k (fbar log2 fbar - sum_i p_i f_i log2 f_i).
  auto totals = run_sharded(
      samples, seed, threads, 2,
      [&](std::vector<McAccumulator>& acc, std::mt19937_64& engine, long n) {
        std::vector<double> f(gamma);
        for (long k = 0; k < n; ++k) {
          Vector a = haar_state(d1, engine);
          Vector b = haar_state(d2, engine);
          for (int side = 0; side < 2; ++side) {
            const Vector& x = side == 0 ? a : b;
            const auto& margs = side == 0 ? marg1 : marg2;
            double fbar = 0, cond = 0;
            for (std::size_t i = 0; i < gamma; ++i) {
              f[i] = std::real(x.dot(margs[i] * x));
              fbar += probs[i] * f[i];
              cond += probs[i] * xlog2x(f[i]);
            }
            double d = side == 0 ? d1 : d2;
            acc[side].add(-d * (xlog2x(fbar) - cond));
          }
        }
      });

  int best = totals[1].mean() > totals[0].mean() ? 1 : 0;
  return {"lambda_locc", totals[best].mean(), totals[best].std_error(), samples, seed};
}

BoundReport cardinality_bound(const MultipartyEnsemble& ens) {
  return {"log2_cardinality", std::log2(static_cast<double>(ens.cardinality())), 0, 0, 0};
}

}  // namespace qmono
