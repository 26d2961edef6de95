#include "qmono/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "qmono/qcore.hpp"
#include "qmono/rng.hpp"

namespace qmono {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kSimplexDiameterTol = 1e-7;
constexpr double kInitialStep = 0.35;
constexpr double kCertifyTol = 1e-9;

double wrap_angle(double x) {
  double y = std::remainder(x, 2 * M_PI);
  return (y >= M_PI) ? y - 2 * M_PI : y;
}

// ---- Nelder-Mead simplex descent -----------------------------------------

struct SimplexResult {
  double value = 0;  // minimum found
  std::vector<double> point;
  bool converged = false;
};

template <typename Fn>
SimplexResult nelder_mead(Fn objective, std::vector<double> start) {
  const int n = static_cast<int>(start.size());
  std::vector<std::vector<double>> simplex(n + 1, start);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += kInitialStep;
  std::vector<double> value(n + 1);
  for (int i = 0; i <= n; ++i) value[i] = objective(simplex[i]);

  auto order = [&] {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> v2(n + 1);
    for (int i = 0; i <= n; ++i) {
      s2[i] = std::move(simplex[idx[i]]);
      v2[i] = value[idx[i]];
    }
    simplex = std::move(s2);
    value = std::move(v2);
  };

  bool converged = false;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    order();
    double diameter = 0;
    for (int i = 1; i <= n; ++i)
      for (int k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[0][k]));
    if (diameter < kSimplexDiameterTol) {
      converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) centroid[k] += simplex[i][k] / n;

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (int k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[n][k] - centroid[k]);
      return p;
    };

    std::vector<double> reflected = blend(-1.0);
    double f_reflected = objective(reflected);
    if (f_reflected < value[0]) {
      std::vector<double> expanded = blend(-2.0);
      double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        simplex[n] = std::move(expanded);
        value[n] = f_expanded;
      } else {
        simplex[n] = std::move(reflected);
        value[n] = f_reflected;
      }
    } else if (f_reflected < value[n - 1]) {
      simplex[n] = std::move(reflected);
      value[n] = f_reflected;
    } else {
      std::vector<double> contracted = blend(f_reflected < value[n] ? -0.5 : 0.5);
      double f_contracted = objective(contracted);
      if (f_contracted < std::min(value[n], f_reflected)) {
        simplex[n] = std::move(contracted);
        value[n] = f_contracted;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int k = 0; k < n; ++k) simplex[i][k] = 0.5 * (simplex[i][k] + simplex[0][k]);
          value[i] = objective(simplex[i]);
        }
      }
    }
  }
  order();
  return {value[0], simplex[0], converged};
}

// ---- measurement templates -------------------------------------------------

struct TemplateSpec {
  StrategyTemplate strategy;
  int sender = 0;    // for one-way templates
  int receiver = 1;
  int sender_dim = 0;
  int receiver_dim = 0;
  int parameter_count = 0;
};

TemplateSpec make_spec(StrategyTemplate strategy, const MultipartyEnsemble& ens) {
  TemplateSpec spec;
  spec.strategy = strategy;
  if (strategy == StrategyTemplate::GlobalProjective) {
    long d = ens.dim();
    if (d > 64)
      throw std::invalid_argument("global projective search supports total dimension <= 64");
    spec.parameter_count = basis_angle_count(static_cast<int>(d));
    return spec;
  }
  if (!ens.bipartite())
    throw std::invalid_argument("one-way search requires a bipartite ensemble");
  spec.sender = (strategy == StrategyTemplate::OneWayAtoB) ? 0 : 1;
  spec.receiver = 1 - spec.sender;
  spec.sender_dim = ens.dims()[spec.sender];
  spec.receiver_dim = ens.dims()[spec.receiver];
  if (spec.sender_dim > 4 || spec.receiver_dim > 4)
    throw std::invalid_argument("one-way search supports local dimensions <= 4");
  spec.parameter_count =
      basis_angle_count(spec.sender_dim) + spec.sender_dim * basis_angle_count(spec.receiver_dim);
  return spec;
}

double mutual_information_of_table(const Eigen::MatrixXd& joint) {
  double h_prior = 0, h_cond = 0;
  for (long i = 0; i < joint.rows(); ++i) {
    double p = joint.row(i).sum();
    if (p > kSpectrumCut) h_prior -= p * std::log2(p);
  }
  for (long m = 0; m < joint.cols(); ++m) {
    double q = joint.col(m).sum();
    if (q <= kSpectrumCut) continue;
    double h = 0;
    for (long i = 0; i < joint.rows(); ++i) {
      double post = joint(i, m) / q;
      if (post > kSpectrumCut) h -= post * std::log2(post);
    }
    h_cond += q * h;
  }
  return h_prior - h_cond;
}

// Exact mutual information of the strategy encoded by `params`.
double evaluate_template(const TemplateSpec& spec, const MultipartyEnsemble& ens,
                         std::span<const double> params,
                         const std::vector<Matrix>& element_matrices) {
  const std::size_t gamma = ens.cardinality();
  if (spec.strategy == StrategyTemplate::GlobalProjective) {
    long d = ens.dim();
    Matrix basis = basis_from_angles(static_cast<int>(d), params);
    Eigen::MatrixXd joint(gamma, d);
    for (std::size_t i = 0; i < gamma; ++i) {
      double p = ens.element(i).probability;
      for (long m = 0; m < d; ++m)
        joint(i, m) = p * std::real(basis.col(m).dot(element_matrices[i] * basis.col(m)));
    }
    return mutual_information_of_table(joint);
  }

  const int ds = spec.sender_dim;
  const int dr = spec.receiver_dim;
  const int ns = basis_angle_count(ds);
  const int nr = basis_angle_count(dr);
  Matrix sender_basis = basis_from_angles(ds, params.subspan(0, ns));
  Eigen::MatrixXd joint(gamma, ds * dr);
  for (int m = 0; m < ds; ++m) {
    Matrix receiver_basis = basis_from_angles(dr, params.subspan(ns + m * nr, nr));
    for (std::size_t i = 0; i < gamma; ++i) {
      // Receiver-side block <u_m| rho |u_m> of the element.
      Matrix block = Matrix::Zero(dr, dr);
      const Matrix& rho = element_matrices[i];
      for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b) {
          Complex w = std::conj(sender_basis(a, m)) * sender_basis(b, m);
          if (spec.sender == 0)
            block += w * rho.block(a * dr, b * dr, dr, dr);
          else
            for (int r = 0; r < dr; ++r)
              for (int c = 0; c < dr; ++c) block(r, c) += w * rho(r * ds + a, c * ds + b);
        }
      double p = ens.element(i).probability;
      for (int k = 0; k < dr; ++k)
        joint(i, m * dr + k) =
            p * std::real(receiver_basis.col(k).dot(block * receiver_basis.col(k)));
    }
  }
  return mutual_information_of_table(joint);
}

OptimizationResult search_template(const TemplateSpec& spec, const MultipartyEnsemble& ens,
                                   int restarts, std::uint64_t seed, int threads,
                                   std::uint64_t stream_offset) {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  std::vector<Matrix> element_matrices;
  for (std::size_t i = 0; i < ens.cardinality(); ++i)
    element_matrices.push_back(ens.element_matrix(i).entries());

  auto objective = [&](const std::vector<double>& params) {
    return -evaluate_template(spec, ens, params, element_matrices);
  };

  struct Candidate {
    double value = -1;
    std::vector<double> params;
    bool converged = false;
  };
  std::vector<Candidate> candidates(restarts);

  auto run_restart = [&](int r) {
    std::vector<double> start(spec.parameter_count, 0.0);
    if (r > 0) {
      std::mt19937_64 engine = keyed_engine(seed, stream_offset + r);
      std::uniform_real_distribution<double> uniform(-M_PI, M_PI);
      for (double& x : start) x = uniform(engine);
    }
    SimplexResult best = nelder_mead(objective, std::move(start));
    candidates[r] = {-best.value, std::move(best.point), best.converged};
  };

  threads = std::max(1, threads);
  if (threads == 1 || restarts == 1) {
    for (int r = 0; r < restarts; ++r) run_restart(r);
  } else {
    std::vector<std::future<void>> futures;
    int per_thread = (restarts + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * per_thread;
      int hi = std::min(restarts, lo + per_thread);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, [&, lo, hi] {
        for (int r = lo; r < hi; ++r) run_restart(r);
      }));
    }
    for (auto& f : futures) f.get();
  }

  // First-found maximum under seed order.
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (candidates[r].value > candidates[best].value) best = r;

  OptimizationResult result;
  result.strategy = spec.strategy;
  result.parameters = std::move(candidates[best].params);
  for (double& x : result.parameters) x = wrap_angle(x);
  result.value = evaluate_template(spec, ens, result.parameters, element_matrices);
  result.restarts_used = restarts;
  result.seed = seed;
  result.converged = candidates[best].converged;
  return result;
}

}  // namespace

int basis_angle_count(int d) { return d * d - d; }

Matrix basis_from_angles(int d, std::span<const double> angles) {
  if (static_cast<int>(angles.size()) != basis_angle_count(d))
    throw std::invalid_argument("expected " + std::to_string(basis_angle_count(d)) +
                                " angles for dimension " + std::to_string(d));
  Matrix u = Matrix::Identity(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double theta = angles[k++];
      double phi = angles[k++];
      Complex c = std::cos(theta);
      Complex s_pos = std::polar(std::sin(theta), phi);
      Complex s_neg = -std::polar(std::sin(theta), -phi);
      // Givens rotation in the (i, j) plane applied from the left.
      for (int col = 0; col < d; ++col) {
        Complex ui = u(i, col), uj = u(j, col);
        u(i, col) = c * ui + s_neg * uj;
        u(j, col) = s_pos * ui + c * uj;
      }
    }
  return u;
}

OptimizationResult optimize_global_projective(const MultipartyEnsemble& ens, int restarts,
                                              std::uint64_t seed, int threads) {
  return search_template(make_spec(StrategyTemplate::GlobalProjective, ens), ens, restarts, seed,
                         threads, 0);
}

OptimizationResult optimize_one_way_locc(const MultipartyEnsemble& ens, int restarts,
                                         std::uint64_t seed,
                                         std::optional<StrategyTemplate> direction, int threads) {
  if (direction && *direction == StrategyTemplate::GlobalProjective)
    throw std::invalid_argument("one-way search requires a one-way direction");
  if (direction)
    return search_template(make_spec(*direction, ens), ens, restarts, seed, threads,
                           *direction == StrategyTemplate::OneWayAtoB ? 0 : 1ull << 32);
  OptimizationResult ab = search_template(make_spec(StrategyTemplate::OneWayAtoB, ens), ens,
                                          restarts, seed, threads, 0);
  OptimizationResult ba = search_template(make_spec(StrategyTemplate::OneWayBtoA, ens), ens,
                                          restarts, seed, threads, 1ull << 32);
  return (ba.value > ab.value) ? ba : ab;  // ties prefer A -> B
}

LoccProtocol protocol_from_result(const MultipartyEnsemble& ens,
                                  const OptimizationResult& result) {
  if (result.strategy == StrategyTemplate::GlobalProjective)
    throw std::invalid_argument("global strategies are not measurement trees");
  TemplateSpec spec = make_spec(result.strategy, ens);
  std::span<const double> params(result.parameters);
  const int ns = basis_angle_count(spec.sender_dim);
  const int nr = basis_angle_count(spec.receiver_dim);
  if (static_cast<int>(params.size()) != spec.parameter_count)
    throw std::invalid_argument("parameter count does not match the strategy template");

  MeasurementNode root =
      projective_node(spec.sender, basis_from_angles(spec.sender_dim, params.subspan(0, ns)));
  for (int m = 0; m < spec.sender_dim; ++m)
    root.children[m] = std::make_unique<MeasurementNode>(projective_node(
        spec.receiver, basis_from_angles(spec.receiver_dim, params.subspan(ns + m * nr, nr))));
  return LoccProtocol(std::move(root));
}

double certify(const OptimizationResult& result, const MultipartyEnsemble& ens) {
  double replayed = 0;
  if (result.strategy == StrategyTemplate::GlobalProjective) {
    TemplateSpec spec = make_spec(result.strategy, ens);
    if (static_cast<int>(result.parameters.size()) != spec.parameter_count)
      throw std::invalid_argument("parameter count does not match the strategy template");
    std::vector<Matrix> element_matrices;
    for (std::size_t i = 0; i < ens.cardinality(); ++i)
      element_matrices.push_back(ens.element_matrix(i).entries());
    replayed = evaluate_template(spec, ens, result.parameters, element_matrices);
  } else {
    replayed = mutual_information(simulate(ens, protocol_from_result(ens, result)));
  }
  if (std::abs(replayed - result.value) > kCertifyTol)
    throw std::runtime_error("certification failed: replayed value " + std::to_string(replayed) +
                             " differs from reported " + std::to_string(result.value));
  return replayed;
}

}  // namespace qmono
