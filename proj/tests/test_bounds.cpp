#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmono/bounds.hpp"
#include "qmono/ensembles.hpp"
#include "qmono/qcore.hpp"
#include "qmono/rng.hpp"

using namespace qmono;

namespace {

constexpr double kLog2E = 1.4426950408889634;

// {1/2 |00>, 1/2 |11>}: a two-party encoding of two orthogonal pure signals.
MultipartyEnsemble orthogonal_pair() {
  std::vector<EnsembleElement> elements{{0.5, StateVector::basis({2, 2}, 0), "00"},
                                        {0.5, StateVector::basis({2, 2}, 3), "11"}};
  return MultipartyEnsemble({"A", "B1"}, {2, 2}, std::move(elements));
}

MultipartyEnsemble identical_pair() {
  std::vector<EnsembleElement> elements{{0.5, StateVector::basis({2, 2}, 0), "a"},
                                        {0.5, StateVector::basis({2, 2}, 0), "b"}};
  return MultipartyEnsemble({"A", "B1"}, {2, 2}, std::move(elements));
}

MultipartyEnsemble single_element() {
  std::vector<EnsembleElement> elements{{1.0, StateVector::basis({2, 2}, 1), "x"}};
  return MultipartyEnsemble({"A", "B1"}, {2, 2}, std::move(elements));
}

MultipartyEnsemble bell_pair_ensemble() {
  Vector plus(4), minus(4);
  double s = 1.0 / std::sqrt(2.0);
  plus << s, 0, 0, s;
  minus << s, 0, 0, -s;
  std::vector<EnsembleElement> elements{{0.5, StateVector({2, 2}, plus), "phi+"},
                                        {0.5, StateVector({2, 2}, minus), "phi-"}};
  return MultipartyEnsemble({"A", "B1"}, {2, 2}, std::move(elements));
}

MultipartyEnsemble shifts_pair() {
  return reduce_to_pair(build_case({CaseId::Kind::VShifts}), "B1");
}

DensityMatrix diag_state(std::vector<double> eigs) {
  Matrix m = Matrix::Zero(eigs.size(), eigs.size());
  for (std::size_t i = 0; i < eigs.size(); ++i) m(i, i) = eigs[i];
  std::vector<int> dims{static_cast<int>(eigs.size())};
  return DensityMatrix(dims, m);
}

double harmonic_subentropy(int d) {
  double h = 0;
  for (int k = 2; k <= d; ++k) h += 1.0 / k;
  return std::log2(static_cast<double>(d)) - kLog2E * h;
}

}  // namespace

TEST_CASE("holevo bound on simple ensembles") {
  CHECK(holevo_chi(orthogonal_pair()).value == doctest::Approx(1).epsilon(1e-12));
  CHECK(holevo_chi(identical_pair()).value == doctest::Approx(0).epsilon(1e-12));
  CHECK(holevo_chi(build_case({CaseId::Kind::IVEP})).value == doctest::Approx(3).epsilon(1e-12));
}

TEST_CASE("subentropy closed-form values") {
  CHECK(subentropy(DensityMatrix::from_pure(StateVector::basis({2, 2}, 2))) ==
        doctest::Approx(0).epsilon(1e-12));
  CHECK(subentropy(DensityMatrix::maximally_mixed({2})) ==
        doctest::Approx(1 - kLog2E / 2).epsilon(1e-12));
  CHECK(subentropy(diag_state({0.75, 0.25})) ==
        doctest::Approx(0.2169171866886993).epsilon(1e-10));

  for (int d : {2, 3, 4, 8})
    CHECK(subentropy(DensityMatrix::maximally_mixed({d})) ==
          doctest::Approx(harmonic_subentropy(d)).epsilon(1e-10));
}

TEST_CASE("subentropy agrees with the eigenvalue-splitting oracle") {
  CHECK(subentropy_from_spectrum({0.75, 0.25}) ==
        doctest::Approx(oracles::perturbation_subentropy({0.75, 0.25})).epsilon(1e-9));
  CHECK(subentropy_from_spectrum({0.5, 0.5}) ==
        doctest::Approx(oracles::perturbation_subentropy({0.5, 0.5})).epsilon(1e-6));
  CHECK(subentropy_from_spectrum({0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(oracles::perturbation_subentropy({0.25, 0.25, 0.25, 0.25}))
            .epsilon(1e-6));

  std::mt19937_64 rng(3);
  for (int d : {2, 3, 4}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto spec = oracles::random_simplex(d, rng);
      CHECK(subentropy_from_spectrum(spec) ==
            doctest::Approx(oracles::perturbation_subentropy(spec)).epsilon(1e-6));
    }
  }
}

TEST_CASE("subentropy is continuous across the degenerate point") {
  double at_limit = subentropy(DensityMatrix::maximally_mixed({2}));
  double previous = 1;
  for (double delta : {1e-3, 1e-5, 1e-7}) {
    double gap = std::abs(subentropy(diag_state({0.5 + delta, 0.5 - delta})) - at_limit);
    CHECK(gap <= previous + 1e-12);
    previous = gap;
  }
  CHECK(previous < 1e-9);
}

TEST_CASE("subentropy never exceeds the entropy") {
  std::mt19937_64 rng(7);
  for (int d : {2, 3, 4, 8}) {
    for (int rep = 0; rep < 100; ++rep) {
      DensityMatrix rho = oracles::random_density({d}, rng);
      CHECK(subentropy(rho) <= von_neumann_entropy(rho) + 1e-9);
      CHECK(subentropy(rho) >= -1e-9);
    }
  }
}

TEST_CASE("lower bound on accessible information") {
  CHECK(jrw_lower(orthogonal_pair()).value ==
        doctest::Approx(1 - kLog2E / 2).epsilon(1e-10));
  CHECK(jrw_lower(identical_pair()).value == doctest::Approx(0).epsilon(1e-10));
  CHECK(jrw_lower(single_element()).value == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("chi-locc values") {
  CHECK(chi_locc(shifts_pair()).value == doctest::Approx(2).epsilon(1e-9));
  CHECK(chi_locc(identical_pair()).value == doctest::Approx(0).epsilon(1e-12));
  CHECK(chi_locc(bell_pair_ensemble()).value == doctest::Approx(1).epsilon(1e-12));
  CHECK_THROWS_AS(chi_locc(build_case({CaseId::Kind::IIE1})), std::invalid_argument);
}

TEST_CASE("haar product samples are deterministic and unbiased") {
  std::mt19937_64 a = keyed_engine(99, 0), b = keyed_engine(99, 0);
  StateVector sa = haar_product_sample(2, 3, a);
  StateVector sb = haar_product_sample(2, 3, b);
  CHECK((sa.amplitudes() - sb.amplitudes()).norm() == 0);

  for (int d : {2, 3}) {
    std::mt19937_64 rng = keyed_engine(8, d);
    const long n = 100000;
    double mean = 0, m2 = 0;
    for (long k = 0; k < n; ++k) {
      Vector v = haar_state(d, rng);
      double f = std::norm(v(0));
      mean += f;
      m2 += f * f;
    }
    mean /= n;
    double sigma = std::sqrt((m2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0 / d) < 3 * sigma + 1e-12);
  }
}

TEST_CASE("local subentropy of a pure product state") {
  DensityMatrix zeta = DensityMatrix::from_pure(StateVector::basis({2, 2}, 0));
  BoundReport report = local_subentropy_mc(zeta, 200000, 11);
  CHECK(report.std_error > 0);
  CHECK(std::abs(report.value - kLog2E) < 3 * report.std_error);
}

TEST_CASE("local subentropy is invariant under local rotations") {
  std::mt19937_64 rng(13);
  DensityMatrix zeta = std::get<DensityMatrix>(shifts_pair().element(3).state);
  Matrix u(4, 4);
  Matrix ua = oracles::random_unitary(2, rng);
  Matrix ub = oracles::random_unitary(2, rng);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) u.block(a * 2, b * 2, 2, 2) = ua(a, b) * ub;
  DensityMatrix rotated({2, 2}, u * zeta.entries() * u.adjoint());

  BoundReport plain = local_subentropy_mc(zeta, 100000, 17);
  BoundReport moved = local_subentropy_mc(rotated, 100000, 18);
  double sigma = std::hypot(plain.std_error, moved.std_error);
  CHECK(std::abs(plain.value - moved.value) < 3 * sigma);
}

TEST_CASE("local subentropy of the shifts average state") {
  MultipartyEnsemble pair = shifts_pair();
  BoundReport report = local_subentropy_mc(pair.average_state(), 400000, 19);
  // Quadrature value of the defining integral for this state.
  CHECK(std::abs(report.value - 1.9796452825504094) < 3 * report.std_error);
}

TEST_CASE("local subentropy rejects tiny sample counts") {
  DensityMatrix zeta = DensityMatrix::maximally_mixed({2, 2});
  CHECK_THROWS_AS(local_subentropy_mc(zeta, 10, 1), std::invalid_argument);
}

TEST_CASE("lambda bound reproduces the closed form on the shifts pair") {
  BoundReport report = lambda_locc(shifts_pair(), 200000, 7);
  CHECK(report.std_error > 0);
  CHECK(std::abs(report.value - (1 - kLog2E / 2)) < 3 * report.std_error);
}

TEST_CASE("lambda bound vanishes without index information") {
  BoundReport single = lambda_locc(single_element(), 2000, 3);
  CHECK(single.value == doctest::Approx(0).epsilon(1e-12));
  CHECK(single.std_error == doctest::Approx(0).epsilon(1e-12));

  BoundReport twin = lambda_locc(identical_pair(), 2000, 3);
  CHECK(twin.value == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("lambda stays below chi-locc on random bipartite ensembles") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 5; ++rep) {
    MultipartyEnsemble ens = oracles::random_ensemble({2, 2}, 3, rep % 2 == 0, rng);
    BoundReport lambda = lambda_locc(ens, 20000, 31 + rep);
    CHECK(lambda.value <= chi_locc(ens).value + 3 * lambda.std_error + 1e-9);
  }
}

TEST_CASE("cardinality bound") {
  CHECK(cardinality_bound(orthogonal_pair()).value == doctest::Approx(1));
  CHECK(cardinality_bound(build_case({CaseId::Kind::VShifts})).value == doctest::Approx(2));
  CHECK(cardinality_bound(build_case({CaseId::Kind::IVET})).value ==
        doctest::Approx(std::log2(3.0)).epsilon(1e-12));
}

TEST_CASE("bound ordering holds on random ensembles") {
  std::mt19937_64 rng(37);
  std::vector<std::vector<int>> shapes{{2, 2}, {2, 3}, {4, 4}, {2, 2, 2}, {8, 8}};
  for (int rep = 0; rep < 50; ++rep) {
    const auto& dims = shapes[rep % shapes.size()];
    MultipartyEnsemble ens = oracles::random_ensemble(dims, 2 + rep % 4, rep % 2 == 0, rng);
    double lower = jrw_lower(ens).value;
    double chi = holevo_chi(ens).value;
    double avg_entropy = entropy_from_spectrum(average_state_spectrum(ens));
    CHECK(lower >= -1e-9);
    CHECK(lower <= chi + 1e-9);
    CHECK(chi <= avg_entropy + 1e-9);
  }
}

TEST_CASE("standard error shrinks like the square root of the sample count") {
  DensityMatrix zeta = std::get<DensityMatrix>(shifts_pair().element(0).state);
  double base = local_subentropy_mc(zeta, 100000, 23).std_error;
  double doubled = local_subentropy_mc(zeta, 200000, 23).std_error;
  double ratio = doubled / base;
  CHECK(ratio > 0.7071 * 0.8);
  CHECK(ratio < 0.7071 * 1.2);
}

TEST_CASE("monte-carlo estimates are reproducible across runs and thread counts") {
  MultipartyEnsemble pair = shifts_pair();
  BoundReport a = lambda_locc(pair, 50000, 41, 1);
  BoundReport b = lambda_locc(pair, 50000, 41, 1);
  BoundReport c = lambda_locc(pair, 50000, 41, 8);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);

  DensityMatrix avg = pair.average_state();
  CHECK(local_subentropy_mc(avg, 50000, 43, 1).value ==
        local_subentropy_mc(avg, 50000, 43, 8).value);
}

TEST_CASE("spectrum helpers match the dense path") {
  std::mt19937_64 rng(53);
  MultipartyEnsemble ens = oracles::random_ensemble({2, 2, 2}, 3, true, rng);
  auto fast = average_state_spectrum(ens);
  auto dense = eigenvalues(ens.average_state());
  for (std::size_t i = 0; i < fast.size(); ++i)
    CHECK(fast[i] == doctest::Approx(dense[i]).epsilon(1e-9));

  auto fast_red = average_reduced_spectrum(ens, {0, 2});
  auto dense_red = eigenvalues(partial_trace(ens.average_state(), {0, 2}));
  for (std::size_t i = 0; i < fast_red.size(); ++i)
    CHECK(fast_red[i] == doctest::Approx(dense_red[i]).epsilon(1e-9));
}
