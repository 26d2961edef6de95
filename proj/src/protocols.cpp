#include "qmono/protocols.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qmono {

namespace {

using nlohmann::json;

constexpr double kBranchCut = 1e-15;
const std::string kPrunedLabel = "∅";

void validate_node(const MeasurementNode& node) {
  if (node.operators.empty()) throw std::invalid_argument("measurement node has no operators");
  long d = node.operators.front().rows();
  Matrix sum = Matrix::Zero(d, d);
  for (const Matrix& k : node.operators) {
    if (k.rows() != d || k.cols() != d)
      throw std::invalid_argument("measurement operators must be square and equally sized");
    sum += k.adjoint() * k;
  }
  double dev = (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > kHermitianTol)
    throw std::invalid_argument("incomplete measurement: sum K^dag K deviates from identity by " +
                                std::to_string(dev));
  if (node.children.size() != node.operators.size())
    throw std::invalid_argument("child count does not match outcome count");
  if (node.party < 0) throw std::invalid_argument("party index must be nonnegative");
  for (const auto& child : node.children)
    if (child) validate_node(*child);
}

int node_depth(const MeasurementNode& node) {
  int best = 0;
  for (const auto& child : node.children)
    if (child) best = std::max(best, node_depth(*child));
  return best + 1;
}

void collect_labels(const MeasurementNode& node, const std::string& prefix,
                    std::vector<std::string>& out) {
  for (std::size_t m = 0; m < node.children.size(); ++m) {
    std::string label = prefix.empty() ? std::to_string(m) : prefix + "." + std::to_string(m);
    if (node.children[m])
      collect_labels(*node.children[m], label, out);
    else
      out.push_back(label);
  }
}

// K acting on one party, lifted to the full space.
Matrix lift_operator(const Matrix& k, const std::vector<int>& dims, int party) {
  long pre = 1, post = 1;
  for (int p = 0; p < party; ++p) pre *= dims[p];
  for (int p = party + 1; p < static_cast<int>(dims.size()); ++p) post *= dims[p];
  long dp = dims[party];
  long d = pre * dp * post;
  Matrix out = Matrix::Zero(d, d);
  for (long a = 0; a < pre; ++a)
    for (long r = 0; r < dp; ++r)
      for (long c = 0; c < dp; ++c) {
        if (k(r, c) == Complex(0, 0)) continue;
        for (long b = 0; b < post; ++b)
          out((a * dp + r) * post + b, (a * dp + c) * post + b) = k(r, c);
      }
  return out;
}

struct SimulationSink {
  std::map<std::string, std::size_t>* column_of;
  Eigen::MatrixXd* joint;
  std::size_t row;
};

void simulate_node(const MeasurementNode& node, const std::vector<int>& dims,
                   const Matrix& branch_state, const std::string& prefix, SimulationSink sink) {
  if (node.party >= static_cast<int>(dims.size()))
    throw std::invalid_argument("protocol acts on party " + std::to_string(node.party) +
                                " but the ensemble has " + std::to_string(dims.size()) +
                                " parties");
  if (node.operators.front().rows() != dims[node.party])
    throw std::invalid_argument("operator dimension does not match party " +
                                std::to_string(node.party));
  for (std::size_t m = 0; m < node.operators.size(); ++m) {
    Matrix lifted = lift_operator(node.operators[m], dims, node.party);
    Matrix next = lifted * branch_state * lifted.adjoint();
    double mass = next.trace().real();
    std::string label = prefix.empty() ? std::to_string(m) : prefix + "." + std::to_string(m);
    if (mass < kBranchCut) {
      (*sink.joint)(sink.row, sink.column_of->at(kPrunedLabel)) += std::max(mass, 0.0);
      continue;
    }
    if (node.children[m])
      simulate_node(*node.children[m], dims, next, label, sink);
    else
      (*sink.joint)(sink.row, sink.column_of->at(label)) += mass;
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(where + ": expected a matrix");
  long rows = static_cast<long>(j.size());
  long cols = static_cast<long>(j[0].size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<long>(j[r].size()) != cols)
      throw std::invalid_argument(where + ": ragged matrix rows");
    for (long c = 0; c < cols; ++c) {
      const json& z = j[r][c];
      if (!z.is_array() || z.size() != 2)
        throw std::invalid_argument(where + ": entries must be [re, im] pairs");
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

json node_to_json(const MeasurementNode& node) {
  json j;
  j["party"] = node.party;
  json ops = json::array();
  for (const Matrix& k : node.operators) ops.push_back(matrix_to_json(k));
  j["operators"] = std::move(ops);
  json children = json::array();
  for (const auto& child : node.children) {
    if (child)
      children.push_back(node_to_json(*child));
    else
      children.push_back(json{{"leaf", true}});
  }
  j["children"] = std::move(children);
  return j;
}

MeasurementNode node_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("party") || !j.contains("operators"))
    throw std::invalid_argument(where + ": node needs \"party\" and \"operators\"");
  MeasurementNode node;
  node.party = j["party"].get<int>();
  for (std::size_t i = 0; i < j["operators"].size(); ++i)
    node.operators.push_back(
        matrix_from_json(j["operators"][i], where + ".operators[" + std::to_string(i) + "]"));
  if (j.contains("children")) {
    const json& children = j["children"];
    for (std::size_t i = 0; i < children.size(); ++i) {
      const json& c = children[i];
      if (c.is_object() && c.value("leaf", false))
        node.children.push_back(nullptr);
      else
        node.children.push_back(std::make_unique<MeasurementNode>(
            node_from_json(c, where + ".children[" + std::to_string(i) + "]")));
    }
  } else {
    for (std::size_t i = 0; i < node.operators.size(); ++i) node.children.push_back(nullptr);
  }
  return node;
}

}  // namespace

MeasurementNode::MeasurementNode(int party_index, std::vector<Matrix> ops)
    : party(party_index), operators(std::move(ops)) {
  children.resize(operators.size());  // all leaves by default
}

MeasurementNode::MeasurementNode(const MeasurementNode& other)
    : party(other.party), operators(other.operators) {
  children.reserve(other.children.size());
  for (const auto& child : other.children)
    children.push_back(child ? std::make_unique<MeasurementNode>(*child) : nullptr);
}

MeasurementNode& MeasurementNode::operator=(const MeasurementNode& other) {
  if (this != &other) *this = MeasurementNode(other);
  return *this;
}

LoccProtocol::LoccProtocol(MeasurementNode root) : root_(std::move(root)) { validate_node(root_); }

std::vector<std::string> LoccProtocol::leaf_labels() const {
  std::vector<std::string> labels;
  collect_labels(root_, "", labels);
  return labels;
}

int LoccProtocol::depth() const { return node_depth(root_); }

JointDistribution::JointDistribution(std::vector<double> priors, std::vector<std::string> labels,
                                     Eigen::MatrixXd joint)
    : priors_(std::move(priors)), labels_(std::move(labels)), joint_(std::move(joint)) {
  if (joint_.rows() != static_cast<long>(priors_.size()) ||
      joint_.cols() != static_cast<long>(labels_.size()))
    throw std::invalid_argument("joint distribution shape mismatch");
  if (joint_.minCoeff() < -kSpectrumCut)
    throw std::invalid_argument("joint distribution has a negative entry");
  joint_ = joint_.cwiseMax(0.0);
  if (std::abs(joint_.sum() - 1.0) > kProbTol)
    throw std::invalid_argument("joint distribution does not sum to 1");
  for (long i = 0; i < joint_.rows(); ++i)
    if (std::abs(joint_.row(i).sum() - priors_[i]) > kProbTol)
      throw std::invalid_argument("row sum does not match the prior of element " +
                                  std::to_string(i));
}

JointDistribution simulate(const MultipartyEnsemble& ens, const LoccProtocol& prot) {
  std::vector<std::string> labels = prot.leaf_labels();
  labels.push_back(kPrunedLabel);
  std::map<std::string, std::size_t> column_of;
  for (std::size_t m = 0; m < labels.size(); ++m) column_of[labels[m]] = m;

  Eigen::MatrixXd joint =
      Eigen::MatrixXd::Zero(static_cast<long>(ens.cardinality()), static_cast<long>(labels.size()));
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    Matrix rho = ens.element(i).probability * ens.element_matrix(i).entries();
    simulate_node(prot.root(), ens.dims(), rho, "", {&column_of, &joint, i});
  }

  // Drop the pruned column if nothing landed there.
  if (joint.col(joint.cols() - 1).sum() == 0.0) {
    labels.pop_back();
    joint.conservativeResize(Eigen::NoChange, joint.cols() - 1);
  }
  return JointDistribution(ens.priors().weights(), std::move(labels), std::move(joint));
}

double mutual_information(const JointDistribution& joint) {
  const Eigen::MatrixXd& p = joint.joint();
  double h_prior = shannon_entropy(std::span<const double>(joint.priors()));
  double h_cond = 0;
  for (long m = 0; m < p.cols(); ++m) {
    double q = p.col(m).sum();
    if (q <= kSpectrumCut) continue;
    double h = 0;
    for (long i = 0; i < p.rows(); ++i) {
      double post = p(i, m) / q;
      if (post > kSpectrumCut) h -= post * std::log2(post);
    }
    h_cond += q * h;
  }
  return h_prior - h_cond;
}

MeasurementNode projective_node(int party, const Matrix& basis) {
  std::vector<Matrix> ops;
  ops.reserve(basis.cols());
  for (long m = 0; m < basis.cols(); ++m)
    ops.push_back(basis.col(m) * basis.col(m).adjoint());
  return MeasurementNode(party, std::move(ops));
}

namespace {

MeasurementNode computational_chain(const std::vector<int>& dims, int party) {
  MeasurementNode node = projective_node(party, Matrix::Identity(dims[party], dims[party]));
  if (party + 1 < static_cast<int>(dims.size())) {
    for (std::size_t m = 0; m < node.children.size(); ++m)
      node.children[m] = std::make_unique<MeasurementNode>(computational_chain(dims, party + 1));
  }
  return node;
}

}  // namespace

LoccProtocol computational_protocol(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("computational_protocol: empty dims");
  return LoccProtocol(computational_chain(dims, 0));
}

LoccProtocol shifts_protocol(int sender) {
  if (sender != 0 && sender != 1)
    throw std::invalid_argument("shifts_protocol: sender must be 0 or 1");
  int receiver = 1 - sender;
  const double s = 1.0 / std::sqrt(2.0);
  Matrix z = Matrix::Identity(2, 2);
  Matrix x(2, 2);
  x << s, s, s, -s;  // columns |+>, |->

  MeasurementNode root = projective_node(sender, z);
  root.children[0] = std::make_unique<MeasurementNode>(projective_node(receiver, z));
  root.children[1] = std::make_unique<MeasurementNode>(projective_node(receiver, x));
  return LoccProtocol(std::move(root));
}

JointDistribution coarse_grain(const JointDistribution& joint,
                               const std::map<std::string, std::string>& merge) {
  std::vector<std::string> classes;
  std::map<std::string, std::size_t> class_column;
  for (const std::string& label : joint.outcome_labels()) {
    auto it = merge.find(label);
    if (it == merge.end())
      throw std::invalid_argument("merge map does not cover outcome '" + label + "'");
    if (!class_column.contains(it->second)) {
      class_column[it->second] = classes.size();
      classes.push_back(it->second);
    }
  }
  Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(joint.joint().rows(),
                                                 static_cast<long>(classes.size()));
  for (std::size_t m = 0; m < joint.outcome_labels().size(); ++m)
    merged.col(static_cast<long>(class_column[merge.at(joint.outcome_labels()[m])])) +=
        joint.joint().col(static_cast<long>(m));
  return JointDistribution(joint.priors(), std::move(classes), std::move(merged));
}

nlohmann::json protocol_to_json(const LoccProtocol& prot) { return node_to_json(prot.root()); }

std::string serialize_protocol(const LoccProtocol& prot) { return protocol_to_json(prot).dump(2); }

LoccProtocol protocol_from_json(const json& j) { return LoccProtocol(node_from_json(j, "root")); }

LoccProtocol parse_protocol(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("protocol file: ") + err.what());
  }
  return protocol_from_json(j);
}

}  // namespace qmono
