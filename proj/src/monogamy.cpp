#include "qmono/monogamy.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "qmono/optimize.hpp"
#include "qmono/qcore.hpp"

namespace qmono {

namespace {

using nlohmann::json;

constexpr double kVerdictTol = 1e-6;

// chi-locc across the cut A : B1..BN, with pure-state fast paths so that
// wide cat ensembles never materialize the big side of the cut.
double chi_locc_across_cut(const MultipartyEnsemble& ens) {
  std::vector<int> rest(ens.num_partners());
  for (int i = 0; i < ens.num_partners(); ++i) rest[i] = i + 1;

  double avg_a = entropy_from_spectrum(average_reduced_spectrum(ens, {0}));
  double avg_rest = entropy_from_spectrum(average_reduced_spectrum(ens, rest));
  double cond_a = 0, cond_rest = 0;
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    const auto& el = ens.element(i);
    double p = el.probability;
    if (el.is_pure()) {
      // Pure across the cut: both reductions share a spectrum.
      double s = entropy_from_spectrum(reduced_spectrum(std::get<StateVector>(el.state), {0}));
      cond_a += p * s;
      cond_rest += p * s;
    } else {
      const auto& rho = std::get<DensityMatrix>(el.state);
      cond_a += p * von_neumann_entropy(partial_trace(rho, {0}));
      cond_rest += p * von_neumann_entropy(partial_trace(rho, rest));
    }
  }
  return std::max(avg_a + avg_rest - std::max(cond_a, cond_rest), 0.0);
}

struct UpperBound {
  double value;
  std::string method;
};

UpperBound global_upper_bound(const MultipartyEnsemble& ens) {
  UpperBound best{std::log2(static_cast<double>(ens.cardinality())), "log2-cardinality"};
  double chi = entropy_from_spectrum(average_state_spectrum(ens));
  for (std::size_t i = 0; i < ens.cardinality(); ++i) {
    const auto& el = ens.element(i);
    if (!el.is_pure())
      chi -= el.probability * von_neumann_entropy(std::get<DensityMatrix>(el.state));
  }
  if (chi < best.value) best = {chi, "chi"};
  double cut = chi_locc_across_cut(ens);
  if (cut < best.value) best = {cut, "chi-locc-cut"};
  return best;
}

PairBound bound_one_pair(const MultipartyEnsemble& ens, const std::string& partner,
                         const AuditConfig& config) {
  MultipartyEnsemble pair = reduce_to_pair(ens, partner);
  PairBound entry;
  entry.partner = partner;
  entry.log2_cardinality = std::log2(static_cast<double>(pair.cardinality()));
  entry.chi_locc_upper = chi_locc(pair).value;

  if (all_elements_identical(pair)) {
    // Identical conditional states carry no index information.
    entry.lower = 0;
    entry.method = "identical-reductions";
    return entry;
  }

  entry.lower = 0;
  entry.method = "none";

  if (config.registered_case) {
    for (const LoccProtocol& prot : registered_pair_protocols(*config.registered_case, pair)) {
      double value = mutual_information(simulate(pair, prot));
      if (value > entry.lower) {
        entry.lower = value;
        entry.method = "explicit-protocol";
        entry.protocol = protocol_to_json(prot);
      }
    }
  }

  double pair_cap = std::min(entry.log2_cardinality, entry.chi_locc_upper);
  bool optimizer_feasible =
      config.use_optimizer && pair.dims()[0] <= 4 && pair.dims()[1] <= 4;
  if (optimizer_feasible && entry.lower < pair_cap - 1e-9) {
    OptimizationResult result = optimize_one_way_locc(pair, config.restarts, config.seed,
                                                      std::nullopt, config.threads);
    double value = certify(result, pair);
    if (value > entry.lower) {
      entry.lower = value;
      entry.method = "optimizer";
      entry.protocol = protocol_to_json(protocol_from_result(pair, result));
    }
  }

  // A bound already at the pair's cap cannot be improved; skip the Monte
  // Carlo so its noise cannot overshoot a certified value.
  if (config.use_lambda && entry.lower < pair_cap - 1e-9) {
    BoundReport lambda = lambda_locc(pair, config.samples, config.seed, config.threads);
    if (lambda.value > entry.lower) {
      entry.lower = lambda.value;
      entry.method = "lambda-locc";
      entry.std_error = lambda.std_error;
      entry.protocol.reset();
    }
  }
  return entry;
}

}  // namespace

std::vector<LoccProtocol> registered_pair_protocols(const CaseId& id,
                                                    const MultipartyEnsemble& pair) {
  using Kind = CaseId::Kind;
  std::vector<LoccProtocol> protocols;
  switch (id.kind) {
    case Kind::IFullBasis:
    case Kind::IIE1:
    case Kind::IIE2:
    case Kind::IIE3:
    case Kind::IIICat:
    case Kind::IVET:
    case Kind::IVEP:
      protocols.push_back(computational_protocol(pair.dims()));
      break;
    case Kind::VShifts:
      // The one-bit-communication discrimination strategy; the mirrored
      // sender covers the pair whose roles are exchanged.
      if (pair.dims() == std::vector<int>{2, 2}) {
        protocols.push_back(shifts_protocol(0));
        protocols.push_back(shifts_protocol(1));
      }
      break;
    case Kind::IPair:
    case Kind::IVNonorth:
      break;
  }
  return protocols;
}

std::vector<PairBound> pair_table(const MultipartyEnsemble& ens, const AuditConfig& config) {
  if (ens.num_partners() < 1) throw std::invalid_argument("pair_table needs at least one partner");
  std::vector<PairBound> rows;
  for (int i = 1; i <= ens.num_partners(); ++i)
    rows.push_back(bound_one_pair(ens, ens.parties()[i], config));
  return rows;
}

MonogamyCertificate audit(const MultipartyEnsemble& ens, const AuditConfig& config) {
  if (ens.num_partners() < 2)
    throw std::invalid_argument("monogamy audit needs at least two partners");
  if (config.use_optimizer)
    for (int d : ens.dims())
      if (d > 4)
        throw std::invalid_argument(
            "optimizer-backed audit supports local dimensions <= 4; disable the optimizer");

  MonogamyCertificate cert;
  cert.samples = config.samples;
  cert.seed = config.seed;
  cert.restarts = config.restarts;
  cert.pairs = pair_table(ens, config);

  double mc_var = 0;
  for (const PairBound& pair : cert.pairs) {
    cert.sum_lower += pair.lower;
    mc_var += pair.std_error * pair.std_error;
  }
  cert.mc_uncertainty = 3 * std::sqrt(mc_var);

  UpperBound upper = global_upper_bound(ens);
  cert.global_upper = upper.value;
  cert.upper_method = upper.method;
  cert.margin = cert.sum_lower - cert.global_upper;

  if (cert.margin > kVerdictTol + cert.mc_uncertainty)
    cert.verdict = "violated";
  else if (cert.mc_uncertainty > 0 && std::abs(cert.margin) <= cert.mc_uncertainty)
    cert.verdict = "inconclusive";
  else if (cert.margin > kVerdictTol)
    cert.verdict = "violated";
  else
    cert.verdict = "satisfied";

  cert.maximal = maximal_violation_check(cert, ens);
  return cert;
}

bool maximal_violation_check(const MonogamyCertificate& cert, const MultipartyEnsemble& ens) {
  double ceiling =
      ens.num_partners() * std::log2(static_cast<double>(ens.cardinality()));
  return std::abs(cert.sum_lower - ceiling) <= kVerdictTol;
}

nlohmann::json certificate_to_json(const MonogamyCertificate& cert) {
  json j;
  json pairs = json::array();
  for (const PairBound& pair : cert.pairs) {
    json p;
    p["partner"] = pair.partner;
    p["lower"] = pair.lower;
    p["method"] = pair.method;
    p["std_error"] = pair.std_error;
    p["chi_locc"] = pair.chi_locc_upper;
    p["log2_cardinality"] = pair.log2_cardinality;
    if (pair.protocol) p["protocol"] = *pair.protocol;
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  j["sum_lower"] = cert.sum_lower;
  j["mc_uncertainty"] = cert.mc_uncertainty;
  j["global_upper"] = cert.global_upper;
  j["upper_method"] = cert.upper_method;
  j["margin"] = cert.margin;
  j["verdict"] = cert.verdict;
  j["maximal"] = cert.maximal;
  j["samples"] = cert.samples;
  j["seed"] = cert.seed;
  j["restarts"] = cert.restarts;
  return j;
}

}  // namespace qmono
