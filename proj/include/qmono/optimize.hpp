#ifndef QMONO_OPTIMIZE_HPP
#define QMONO_OPTIMIZE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmono/ensembles.hpp"
#include "qmono/protocols.hpp"
#include "qmono/types.hpp"

namespace qmono {

enum class StrategyTemplate { GlobalProjective, OneWayAtoB, OneWayBtoA };

/// Number of angles parameterizing a projective basis in dimension d
/// (d^2 - d Givens rotation/phase parameters).
int basis_angle_count(int d);

/// Unitary assembled from Givens rotations with phases, in a fixed pair
/// ordering; its columns are the measurement basis.
Matrix basis_from_angles(int d, std::span<const double> angles);

struct OptimizationResult {
  StrategyTemplate strategy = StrategyTemplate::GlobalProjective;
  double value = 0;                   // bits; exact re-evaluation at the best parameters
  std::vector<double> parameters;    // canonical interval [-pi, pi)
  int restarts_used = 0;
  std::uint64_t seed = 0;
  bool converged = false;
};

/// Lower bound on accessible information: multi-start simplex search over a
/// projective measurement of the joint system. Deterministic for a fixed
/// (restarts, seed); restart 0 starts from the computational basis.
OptimizationResult optimize_global_projective(const MultipartyEnsemble& ens, int restarts,
                                              std::uint64_t seed, int threads = 1);

/// Lower bound on locally accessible information of a bipartite ensemble:
/// the sender measures a parameterized basis and the receiver measures an
/// outcome-conditioned basis (one round of classical communication). With
/// no direction given, the better of the two directions is returned.
OptimizationResult optimize_one_way_locc(const MultipartyEnsemble& ens, int restarts,
                                         std::uint64_t seed,
                                         std::optional<StrategyTemplate> direction = std::nullopt,
                                         int threads = 1);

/// The measurement tree encoded by a one-way optimization result.
LoccProtocol protocol_from_result(const MultipartyEnsemble& ens, const OptimizationResult& result);

/// Replays the reported strategy from its parameters alone and returns its
/// exact mutual information; throws if it disagrees with the reported value
/// beyond 1e-9. The certificate is the strategy, not the optimizer's word.
double certify(const OptimizationResult& result, const MultipartyEnsemble& ens);

}  // namespace qmono

#endif
