#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "qmono/ensembles.hpp"
#include "qmono/protocols.hpp"
#include "qmono/qcore.hpp"

using namespace qmono;

namespace {

const double kShiftsValue = 13.0 / 4 - (3 * std::log2(3.0) + 5 * std::log2(5.0)) / 8;

MultipartyEnsemble shifts_pair() {
  return reduce_to_pair(build_case({CaseId::Kind::VShifts}), "B1");
}

LoccProtocol trivial_protocol(int dim) {
  std::vector<Matrix> ops{Matrix::Identity(dim, dim)};
  return LoccProtocol(MeasurementNode(0, std::move(ops)));
}

double column_sum(const JointDistribution& joint, const std::string& label) {
  for (std::size_t m = 0; m < joint.outcome_labels().size(); ++m)
    if (joint.outcome_labels()[m] == label) return joint.outcome_probability(m);
  return 0;
}

LoccProtocol random_protocol(const std::vector<int>& dims, int max_depth, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> party_pick(0, static_cast<int>(dims.size()) - 1);
  std::uniform_real_distribution<double> coin(0, 1);
  auto build = [&](auto&& self, int depth) -> MeasurementNode {
    int party = party_pick(rng);
    MeasurementNode node = projective_node(party, oracles::random_unitary(dims[party], rng));
    if (depth < max_depth) {
      for (auto& child : node.children)
        if (coin(rng) < 0.5)
          child = std::make_unique<MeasurementNode>(self(self, depth + 1));
    }
    return node;
  };
  return LoccProtocol(build(build, 1));
}

}  // namespace

TEST_CASE("shifts protocol structure and completeness") {
  LoccProtocol prot = shifts_protocol();
  CHECK(prot.depth() == 2);
  CHECK(prot.root().children.size() == 2);
  for (const auto& child : prot.root().children) {
    REQUIRE(child != nullptr);
    CHECK(child->children.size() == 2);
    CHECK(child->children[0] == nullptr);
    Matrix sum = Matrix::Zero(2, 2);
    for (const Matrix& k : child->operators) sum += k.adjoint() * k;
    CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(prot.leaf_labels().size() == 4);
}

TEST_CASE("the shifts strategy yields the closed-form value") {
  JointDistribution joint = simulate(shifts_pair(), shifts_protocol());
  double mi = mutual_information(joint);
  CHECK(mi == doctest::Approx(kShiftsValue).epsilon(1e-12));
  CHECK(mi == doctest::Approx(1.2044340029249650).epsilon(1e-10));
  CHECK(mi == doctest::Approx(oracles::mi_of_table(joint.joint())).epsilon(1e-12));
}

TEST_CASE("the sender outcome is unbiased on the shifts pair") {
  JointDistribution joint = simulate(shifts_pair(), shifts_protocol());
  double p0 = column_sum(joint, "0.0") + column_sum(joint, "0.1");
  CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("computational measurements correlate perfectly on the parity pair") {
  MultipartyEnsemble pair = reduce_to_pair(build_case({CaseId::Kind::IIE1}), "B1");
  JointDistribution joint = simulate(pair, computational_protocol(pair.dims()));
  CHECK(column_sum(joint, "0.0") == doctest::Approx(0.25));
  // Element 0 occupies the equal-outcome columns, element 1 the rest.
  for (std::size_t m = 0; m < joint.outcome_labels().size(); ++m) {
    const std::string& label = joint.outcome_labels()[m];
    bool equal_bits = label[0] == label[2];
    CHECK(joint.joint()(equal_bits ? 1 : 0, m) == doctest::Approx(0).epsilon(1e-12));
  }
  CHECK(mutual_information(joint) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the trivial protocol learns nothing") {
  MultipartyEnsemble pair = shifts_pair();
  JointDistribution joint = simulate(pair, trivial_protocol(2));
  REQUIRE(joint.outcome_labels().size() == 1);
  for (std::size_t i = 0; i < pair.cardinality(); ++i)
    CHECK(joint.joint()(i, 0) == doctest::Approx(pair.element(i).probability));
  CHECK(mutual_information(joint) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("mutual information of simple tables") {
  Eigen::MatrixXd correlated(2, 2);
  correlated << 0.5, 0, 0, 0.5;
  CHECK(mutual_information(JointDistribution({0.5, 0.5}, {"0", "1"}, correlated)) ==
        doctest::Approx(1));

  Eigen::MatrixXd product(2, 2);
  product << 0.25, 0.25, 0.25, 0.25;
  CHECK(mutual_information(JointDistribution({0.5, 0.5}, {"0", "1"}, product)) ==
        doctest::Approx(0));
}

TEST_CASE("coarse graining") {
  JointDistribution joint = simulate(shifts_pair(), shifts_protocol());

  std::map<std::string, std::string> identity;
  for (const auto& label : joint.outcome_labels()) identity[label] = label;
  CHECK(mutual_information(coarse_grain(joint, identity)) ==
        doctest::Approx(mutual_information(joint)));

  std::map<std::string, std::string> all;
  for (const auto& label : joint.outcome_labels()) all[label] = "x";
  CHECK(mutual_information(coarse_grain(joint, all)) == doctest::Approx(0).epsilon(1e-12));

  std::map<std::string, std::string> merge{{"0.0", "0"}, {"0.1", "0"}, {"1.0", "1.0"},
                                           {"1.1", "1.1"}};
  JointDistribution merged = coarse_grain(joint, merge);
  double merged_mi = mutual_information(merged);
  CHECK(merged_mi < kShiftsValue - 0.1);
  CHECK(merged_mi == doctest::Approx(oracles::mi_of_table(merged.joint())).epsilon(1e-12));

  std::map<std::string, std::string> partial{{"0.0", "x"}};
  CHECK_THROWS_AS(coarse_grain(joint, partial), std::invalid_argument);
}

TEST_CASE("protocol files round-trip") {
  std::string text = serialize_protocol(shifts_protocol());
  LoccProtocol back = parse_protocol(text);
  JointDistribution a = simulate(shifts_pair(), shifts_protocol());
  JointDistribution b = simulate(shifts_pair(), back);
  CHECK((a.joint() - b.joint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("incomplete operator sets are rejected") {
  std::vector<Matrix> ops{0.5 * Matrix::Identity(2, 2)};
  CHECK_THROWS_WITH_AS(LoccProtocol(MeasurementNode(0, std::move(ops))),
                       doctest::Contains("incomplete measurement"), std::invalid_argument);

  CHECK_THROWS_AS(
      parse_protocol(R"({"party":0,"operators":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]})"),
      std::invalid_argument);
}

TEST_CASE("acting on a missing party fails at simulation time") {
  std::vector<Matrix> ops{Matrix::Identity(2, 2)};
  LoccProtocol prot((MeasurementNode(7, std::move(ops))));
  CHECK_THROWS_WITH_AS(simulate(shifts_pair(), prot), doctest::Contains("party"),
                       std::invalid_argument);
}

TEST_CASE("simulation satisfies the joint-distribution invariants on fuzzed inputs") {
  std::mt19937_64 rng(41);
  std::vector<std::vector<int>> shapes{{2, 2}, {2, 4}, {3, 3}, {2, 2, 2}, {4, 2, 2}};
  for (int rep = 0; rep < 40; ++rep) {
    const auto& dims = shapes[rep % shapes.size()];
    MultipartyEnsemble ens = oracles::random_ensemble(dims, 2 + rep % 3, rep % 2 == 0, rng);
    LoccProtocol prot = random_protocol(dims, 3, rng);
    JointDistribution joint = simulate(ens, prot);  // constructor checks the invariants
    double mi = mutual_information(joint);
    double h_prior = shannon_entropy(ens.priors());
    CHECK(mi >= -1e-9);
    CHECK(mi <= h_prior + 1e-9);
    CHECK(mi <=
          std::log2(static_cast<double>(joint.outcome_labels().size())) + 1e-9);
    CHECK(mi == doctest::Approx(oracles::mi_symmetric(joint.joint())).epsilon(1e-9));
  }
}

TEST_CASE("coarse graining never creates information") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 25; ++rep) {
    MultipartyEnsemble ens = oracles::random_ensemble({2, 2}, 3, rep % 2 == 0, rng);
    LoccProtocol prot = random_protocol({2, 2}, 2, rng);
    JointDistribution joint = simulate(ens, prot);
    std::map<std::string, std::string> merge;
    std::uniform_int_distribution<int> klass(0, 1);
    for (const auto& label : joint.outcome_labels())
      merge[label] = "c" + std::to_string(klass(rng));
    CHECK(mutual_information(coarse_grain(joint, merge)) <=
          mutual_information(joint) + 1e-9);
  }
}

TEST_CASE("simulation is covariant under local unitaries") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 15; ++rep) {
    MultipartyEnsemble ens = oracles::random_ensemble({2, 3}, 3, true, rng);
    LoccProtocol prot = random_protocol({2, 3}, 2, rng);
    std::vector<Matrix> locals{oracles::random_unitary(2, rng), oracles::random_unitary(3, rng)};

    // Rotate the ensemble by U_A x U_B.
    std::vector<EnsembleElement> rotated;
    for (const auto& el : ens.elements()) {
      DensityMatrix rho = el.is_pure() ? DensityMatrix::from_pure(std::get<StateVector>(el.state))
                                       : std::get<DensityMatrix>(el.state);
      Matrix u(6, 6);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) u.block(a * 3, b * 3, 3, 3) = locals[0](a, b) * locals[1];
      rotated.push_back({el.probability, DensityMatrix({2, 3}, u * rho.entries() * u.adjoint()),
                         el.label});
    }
    MultipartyEnsemble rotated_ens(ens.parties(), ens.dims(), std::move(rotated));

    // Conjugate every node operator by the acting party's unitary.
    auto conjugate = [&](auto&& self, const MeasurementNode& node) -> MeasurementNode {
      MeasurementNode out = node;
      for (Matrix& k : out.operators)
        k = locals[node.party].adjoint() * k * locals[node.party];
      for (std::size_t m = 0; m < out.children.size(); ++m)
        if (out.children[m])
          out.children[m] = std::make_unique<MeasurementNode>(self(self, *out.children[m]));
      return out;
    };
    LoccProtocol conjugated(conjugate(conjugate, prot.root()));

    JointDistribution direct = simulate(rotated_ens, prot);
    JointDistribution moved = simulate(ens, conjugated);
    CHECK((direct.joint() - moved.joint()).cwiseAbs().maxCoeff() < 1e-9);
  }
}
