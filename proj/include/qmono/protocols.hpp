#ifndef QMONO_PROTOCOLS_HPP
#define QMONO_PROTOCOLS_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmono/ensembles.hpp"
#include "qmono/types.hpp"

namespace qmono {

/// Node of an adaptive measurement tree: the acting party applies a
/// complete set of Kraus operators; the outcome selects the child branch.
/// A null child is a leaf. Classical communication is the branching.
struct MeasurementNode {
  int party = 0;
  std::vector<Matrix> operators;
  std::vector<std::unique_ptr<MeasurementNode>> children;

  MeasurementNode() = default;
  MeasurementNode(int party_index, std::vector<Matrix> ops);
  MeasurementNode(const MeasurementNode& other);
  MeasurementNode& operator=(const MeasurementNode& other);
  MeasurementNode(MeasurementNode&&) = default;
  MeasurementNode& operator=(MeasurementNode&&) = default;
};

class LoccProtocol {
 public:
  explicit LoccProtocol(MeasurementNode root);

  const MeasurementNode& root() const { return root_; }
  std::vector<std::string> leaf_labels() const;
  int depth() const;

 private:
  MeasurementNode root_;
};

/// Joint distribution p(i, m) over ensemble index i and outcome label m.
class JointDistribution {
 public:
  JointDistribution(std::vector<double> priors, std::vector<std::string> labels,
                    Eigen::MatrixXd joint);

  const std::vector<double>& priors() const { return priors_; }
  const std::vector<std::string>& outcome_labels() const { return labels_; }
  const Eigen::MatrixXd& joint() const { return joint_; }
  double outcome_probability(std::size_t m) const { return joint_.col(m).sum(); }

 private:
  std::vector<double> priors_;
  std::vector<std::string> labels_;
  Eigen::MatrixXd joint_;
};

/// Exact outcome distribution of a protocol on an ensemble: recursive
/// application of the lifted Kraus operators, no sampling. Branches with
/// probability mass below 1e-15 are folded into the reserved label "∅".
JointDistribution simulate(const MultipartyEnsemble& ens, const LoccProtocol& prot);

/// I(i:m) = H(priors) - sum_m q_m H(posteriors), in bits.
double mutual_information(const JointDistribution& joint);

/// Projective node whose outcomes are the columns of `basis`.
MeasurementNode projective_node(int party, const Matrix& basis);

/// Every party measures its computational basis, in party order.
LoccProtocol computational_protocol(const std::vector<int>& dims);

/// The one-bit-communication discrimination protocol for the SHIFTS pair:
/// the sender measures {|0>,|1>}; on outcome 0 the receiver measures
/// {|0>,|1>}, on outcome 1 it measures {|+>,|->}.
LoccProtocol shifts_protocol(int sender = 0);

/// Sum outcome columns according to a total merge map (label -> class).
JointDistribution coarse_grain(const JointDistribution& joint,
                               const std::map<std::string, std::string>& merge);

// Protocol file format (JSON): node {"party": int, "operators": [matrix...],
// "children": [node | {"leaf": true}, ...]}, matrices as rows of [re, im].
LoccProtocol parse_protocol(const std::string& text);
std::string serialize_protocol(const LoccProtocol& prot);
nlohmann::json protocol_to_json(const LoccProtocol& prot);
LoccProtocol protocol_from_json(const nlohmann::json& j);

}  // namespace qmono

#endif
