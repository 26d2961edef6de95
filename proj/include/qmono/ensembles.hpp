#ifndef QMONO_ENSEMBLES_HPP
#define QMONO_ENSEMBLES_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qmono/qcore.hpp"
#include "qmono/types.hpp"

namespace qmono {

struct EnsembleElement {
  double probability;
  std::variant<StateVector, DensityMatrix> state;
  std::string label;

  bool is_pure() const { return std::holds_alternative<StateVector>(state); }
};

/// Probability-weighted list of multiparty states shared between A and
/// partners B1..BN. Cardinality is the element count.
class MultipartyEnsemble {
 public:
  MultipartyEnsemble(std::vector<std::string> parties, std::vector<int> dims,
                     std::vector<EnsembleElement> elements);

  const std::vector<std::string>& parties() const { return parties_; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<EnsembleElement>& elements() const { return elements_; }
  const EnsembleElement& element(std::size_t i) const { return elements_.at(i); }

  std::size_t cardinality() const { return elements_.size(); }
  int num_partners() const { return static_cast<int>(parties_.size()) - 1; }
  long dim() const { return dim_product(dims_); }
  bool all_pure() const;
  bool bipartite() const { return parties_.size() == 2; }

  int party_index(const std::string& label) const;  // throws on unknown label
  ProbabilityDistribution priors() const;

  /// Element as a density matrix (pure elements are expanded on demand).
  DensityMatrix element_matrix(std::size_t i) const;
  /// Dense average state; requires desk-scale dimension.
  DensityMatrix average_state() const;

 private:
  std::vector<std::string> parties_;
  std::vector<int> dims_;
  std::vector<EnsembleElement> elements_;
};

/// Registry ids for the built-in case-study ensembles.
struct CaseId {
  enum class Kind { IPair, IFullBasis, IIE1, IIE2, IIE3, IIICat, IVET, IVEP, IVNonorth, VShifts };

  Kind kind;
  int cat_parties = 3;  // N for III-cat
  double theta = 0;     // nonorthogonality angle for IV-nonorth; 0 selects the default

  static CaseId parse(const std::string& text);  // e.g. "V-shifts", "III-cat(5)"
  std::string to_string() const;
};

/// Default angle for IV-nonorth, chosen so that <0|n> = 0.1.
double default_nonorth_theta();

MultipartyEnsemble build_case(const CaseId& id);

/// Bipartite ensemble {p_i, tr_others(state_i)} on (A, partner).
MultipartyEnsemble reduce_to_pair(const MultipartyEnsemble& ens, const std::string& partner);

/// True iff exchanging parties p1 and p2 maps the ensemble onto itself as a
/// multiset of (probability, state) pairs; states are compared as density
/// matrices via greedy trace-distance matching.
bool is_swap_invariant(const MultipartyEnsemble& ens, const std::string& p1,
                       const std::string& p2);

/// True iff every pair of elements coincides (trace distance below tol);
/// such an ensemble carries no information about the index.
bool all_elements_identical(const MultipartyEnsemble& ens, double tol = kDegeneracyTol);

// Ensemble file format (JSON): {"dims":[...], "parties":[...], "elements":
// [{"p":..,"label":..,"vector":[[re,im],..]} | {"p":..,"label":..,
// "matrix":[[[re,im],..],..]}]}. Unnormalized vectors are rejected
// (tolerance 1e-6), not renormalized.
MultipartyEnsemble parse_ensemble(const std::string& text);
std::string serialize_ensemble(const MultipartyEnsemble& ens);
nlohmann::json ensemble_to_json(const MultipartyEnsemble& ens);
MultipartyEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace qmono

#endif
