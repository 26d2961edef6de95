#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmono/ensembles.hpp"
#include "qmono/qcore.hpp"

using namespace qmono;

namespace {

StateVector two_term(std::vector<int> dims, long a, long b, double sign = 1.0) {
  Vector v = Vector::Zero(dim_product(dims));
  v(a) = 1.0 / std::sqrt(2.0);
  v(b) = sign / std::sqrt(2.0);
  return StateVector(std::move(dims), std::move(v));
}

}  // namespace

TEST_CASE("probability distribution validation") {
  CHECK_NOTHROW(ProbabilityDistribution({0.5, 0.5}));
  CHECK_THROWS_AS(ProbabilityDistribution({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityDistribution({1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityDistribution({}), std::invalid_argument);
}

TEST_CASE("state vector validation") {
  Vector v(2);
  v << 1, 1;
  CHECK_THROWS_AS(StateVector({2}, v), std::invalid_argument);
  v << 1, 0;
  CHECK_NOTHROW(StateVector({2}, v));
  CHECK_THROWS_AS(StateVector::basis({2, 2}, 4), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
  Matrix m(2, 2);
  m << 0.5, Complex(0, 0.5), Complex(0, 0.5), 0.5;  // not Hermitian
  CHECK_THROWS_AS(DensityMatrix({2}, m), std::invalid_argument);

  m << 0.7, 0, 0, 0.7;  // trace 1.4
  CHECK_THROWS_AS(DensityMatrix({2}, m), std::invalid_argument);

  m << 1.5, 0, 0, -0.5;  // negative eigenvalue
  CHECK_THROWS_AS(DensityMatrix({2}, m), std::invalid_argument);

  CHECK_NOTHROW(DensityMatrix::maximally_mixed({2, 2}));
}

TEST_CASE("tensor products") {
  StateVector zero = StateVector::basis({2}, 0);
  StateVector one = StateVector::basis({2}, 1);
  StateVector zo = tensor(zero, one);
  CHECK(zo.dims() == std::vector<int>{2, 2});
  CHECK(zo.amplitudes()(1) == Complex(1, 0));

  DensityMatrix mixed = DensityMatrix::maximally_mixed({2});
  DensityMatrix prod = tensor(mixed, mixed);
  CHECK(prod.dims() == std::vector<int>{2, 2});
  CHECK((prod.entries() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-15);

  // |0> x Bell is the first element of the second two-element case ensemble.
  StateVector bell = two_term({2, 2}, 0, 3);
  StateVector psi_plus = tensor(zero, bell);
  MultipartyEnsemble e2 = build_case({CaseId::Kind::IIE2});
  const auto& expected = std::get<StateVector>(e2.element(0).state);
  CHECK(std::abs(psi_plus.overlap(expected)) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("partial trace of a three-qubit cat state") {
  StateVector ghz = two_term({2, 2, 2}, 0, 7);
  DensityMatrix reduced = partial_trace(ghz, {0, 1});
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 0.5;
  expected(3, 3) = 0.5;
  CHECK((reduced.entries() - expected).cwiseAbs().maxCoeff() < 1e-12);

  // Same result through the dense path.
  DensityMatrix dense = partial_trace(DensityMatrix::from_pure(ghz), {0, 1});
  CHECK((dense.entries() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace of product and Bell states") {
  std::mt19937_64 rng(11);
  DensityMatrix rho = oracles::random_density({2}, rng);
  DensityMatrix sigma = oracles::random_density({3}, rng);
  DensityMatrix both = tensor(rho, sigma);
  CHECK(trace_distance(partial_trace(both, {0}), rho) < 1e-12);

  StateVector bell = two_term({2, 2}, 0, 3);
  DensityMatrix half = partial_trace(bell, {1});
  CHECK((half.entries() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace rejects bad party sets") {
  StateVector bell = two_term({2, 2}, 0, 3);
  CHECK_THROWS_AS(partial_trace(bell, {2}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(bell, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("eigenvalues of simple states") {
  auto eigs = eigenvalues(DensityMatrix::maximally_mixed({2}));
  CHECK(eigs[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eigs[1] == doctest::Approx(0.5).epsilon(1e-12));

  eigs = eigenvalues(DensityMatrix::from_pure(StateVector::basis({2}, 0)));
  CHECK(eigs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eigs[1] == doctest::Approx(0.0).epsilon(1e-12));

  StateVector ghz = two_term({2, 2, 2}, 0, 7);
  eigs = eigenvalues(partial_trace(ghz, {0, 1}));
  CHECK(eigs[0] == doctest::Approx(0.5));
  CHECK(eigs[1] == doctest::Approx(0.5));
  CHECK(eigs[2] == doctest::Approx(0.0));
  CHECK(eigs[3] == doctest::Approx(0.0));
}

TEST_CASE("von Neumann entropy values") {
  CHECK(von_neumann_entropy(DensityMatrix::from_pure(StateVector::basis({2}, 0))) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed({2})) ==
        doctest::Approx(1.0).epsilon(1e-12));

  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 0.25;
  m(1, 1) = 0.75;
  double s = von_neumann_entropy(DensityMatrix({2}, m));
  CHECK(s == doctest::Approx(0.8112781244591328).epsilon(1e-12));
  CHECK(s == doctest::Approx(static_cast<double>(oracles::entropy_bits({0.25, 0.75}))));
}

TEST_CASE("shannon entropy values") {
  CHECK(shannon_entropy(ProbabilityDistribution({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(shannon_entropy(ProbabilityDistribution({1.0, 0.0})) == doctest::Approx(0.0));
  CHECK(shannon_entropy(ProbabilityDistribution({1.0 / 3, 2.0 / 3})) ==
        doctest::Approx(std::log2(3.0) - 2.0 / 3).epsilon(1e-12));
}

TEST_CASE("entropy bounds hold for random states") {
  std::mt19937_64 rng(5);
  for (const auto& dims : {std::vector<int>{2}, {3}, {2, 2}, {2, 3}, {2, 2, 2}}) {
    for (int rep = 0; rep < 20; ++rep) {
      DensityMatrix rho = oracles::random_density(dims, rng);
      double s = von_neumann_entropy(rho);
      CHECK(s >= -1e-9);
      CHECK(s <= std::log2(static_cast<double>(dim_product(dims))) + 1e-9);
    }
  }
}

TEST_CASE("pure and dense partial traces agree on random states") {
  std::mt19937_64 rng(17);
  std::vector<std::vector<int>> shapes{{2, 2}, {2, 3}, {3, 2, 2}, {2, 2, 2, 2}, {4, 4, 2}};
  for (const auto& dims : shapes) {
    for (int rep = 0; rep < 10; ++rep) {
      StateVector psi = oracles::random_pure(dims, rng);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(dims.size()) - 1);
      std::vector<int> keep{pick(rng)};
      if (dims.size() > 2 && rep % 2 == 0) {
        int extra = pick(rng);
        if (extra != keep[0]) keep.push_back(extra);
        std::sort(keep.begin(), keep.end());
      }
      DensityMatrix fast = partial_trace(psi, keep);
      DensityMatrix slow = partial_trace(DensityMatrix::from_pure(psi), keep);
      CHECK((fast.entries() - slow.entries()).cwiseAbs().maxCoeff() < 1e-9);

      auto spectrum = reduced_spectrum(psi, keep);
      auto dense_spectrum = eigenvalues(fast);
      for (std::size_t i = 0; i < spectrum.size(); ++i)
        CHECK(spectrum[i] == doctest::Approx(dense_spectrum[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("entropy is invariant under unitary conjugation") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    DensityMatrix rho = oracles::random_density({2, 2}, rng);
    Matrix u = oracles::random_unitary(4, rng);
    DensityMatrix rotated({2, 2}, u * rho.entries() * u.adjoint());
    CHECK(von_neumann_entropy(rotated) ==
          doctest::Approx(von_neumann_entropy(rho)).epsilon(1e-9));
  }
}

TEST_CASE("tensor then partial trace returns the first factor") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    DensityMatrix a = oracles::random_density({2, 2}, rng);
    DensityMatrix b = oracles::random_density({3}, rng);
    DensityMatrix joined = tensor(a, b);
    CHECK(trace_distance(partial_trace(joined, {0, 1}), a) < 1e-9);
  }
}
