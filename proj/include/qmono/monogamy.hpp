#ifndef QMONO_MONOGAMY_HPP
#define QMONO_MONOGAMY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmono/bounds.hpp"
#include "qmono/ensembles.hpp"
#include "qmono/protocols.hpp"

namespace qmono {

struct PairBound {
  std::string partner;
  double lower = 0;           // certified lower bound on the pair's accessible information
  std::string method;         // identical-reductions | explicit-protocol | optimizer | lambda-locc
  double std_error = 0;       // nonzero only for Monte-Carlo methods
  double chi_locc_upper = 0;  // per-pair diagnostics
  double log2_cardinality = 0;
  std::optional<nlohmann::json> protocol;  // replayable certificate when protocol-backed
};

struct MonogamyCertificate {
  std::vector<PairBound> pairs;
  double sum_lower = 0;
  double mc_uncertainty = 0;  // 3 sigma combined over Monte-Carlo pair bounds
  double global_upper = 0;
  std::string upper_method;  // log2-cardinality | chi | chi-locc-cut
  double margin = 0;         // sum_lower - global_upper
  std::string verdict;       // violated | satisfied | inconclusive
  bool maximal = false;      // sum_lower reaches N * log2(cardinality)
  long samples = 0;
  std::uint64_t seed = 0;
  int restarts = 0;
};

struct AuditConfig {
  int restarts = 64;
  long samples = 200000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool use_optimizer = true;
  bool use_lambda = true;
  std::optional<CaseId> registered_case;  // unlocks the explicit case protocols
};

/// Per-pair certified lower bounds against a universal upper bound on the
/// joint quantity. Lower bounds take the best of the registered explicit
/// protocol, the one-way optimizer, and the isotropic-measurement bound;
/// the upper bound is min(log2 cardinality, chi, chi-locc across A : rest).
MonogamyCertificate audit(const MultipartyEnsemble& ens, const AuditConfig& config);

/// True iff the certified sum reaches its algebraic ceiling N*log2(Gamma).
bool maximal_violation_check(const MonogamyCertificate& cert, const MultipartyEnsemble& ens);

/// The per-pair diagnostics used by audit, without the global verdict.
std::vector<PairBound> pair_table(const MultipartyEnsemble& ens, const AuditConfig& config);

/// Candidate explicit protocols known to be informative for a registry case
/// on the reduced pair (A, partner).
std::vector<LoccProtocol> registered_pair_protocols(const CaseId& id,
                                                    const MultipartyEnsemble& pair);

nlohmann::json certificate_to_json(const MonogamyCertificate& cert);

}  // namespace qmono

#endif
