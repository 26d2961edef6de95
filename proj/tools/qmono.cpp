// qmono: accessible-information bounds, measurement-protocol simulation,
// strategy optimization, and monogamy audits for small multiparty ensembles.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmono/bounds.hpp"
#include "qmono/ensembles.hpp"
#include "qmono/monogamy.hpp"
#include "qmono/optimize.hpp"
#include "qmono/protocols.hpp"
#include "qmono/qcore.hpp"

namespace {

using nlohmann::json;
using namespace qmono;

constexpr std::uint64_t kReproduceDefaultSeed = 7;
constexpr double kLog2E = 1.4426950408889634;
const double kShiftsProtocolValue = 13.0 / 4 - (3 * std::log2(3.0) + 5 * std::log2(5.0)) / 8;

struct CommonOptions {
  std::string case_id;
  std::string ensemble_file;
  std::string pair;
  int cat_n = 0;  // 0 = use the case default
  double theta = 0;
  int restarts = 64;
  long samples = 200000;
  std::int64_t seed = -1;
  int threads = 1;
  std::string format = "table";
  std::string out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const CommonOptions& opt, const std::string& table, const json& payload) {
  std::string text = (opt.format == "json") ? payload.dump(2) + "\n" : table;
  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) throw std::invalid_argument("cannot write to '" + opt.out + "'");
    out << text;
  } else {
    std::cout << text;
  }
}

std::uint64_t resolve_seed(const CommonOptions& opt, bool required,
                           std::optional<std::uint64_t> fallback = std::nullopt) {
  if (opt.seed >= 0) return static_cast<std::uint64_t>(opt.seed);
  if (const char* env = std::getenv("QMONO_SEED")) return std::stoull(env);
  if (fallback) return *fallback;
  if (required)
    throw CLI::ValidationError("--seed",
                               "a seed is required for sampled or optimized runs "
                               "(pass --seed or set QMONO_SEED)");
  return 0;
}

MultipartyEnsemble load_ensemble(const CommonOptions& opt) {
  if (!opt.case_id.empty() && !opt.ensemble_file.empty())
    throw CLI::ValidationError("--case", "use either --case or --ensemble, not both");
  MultipartyEnsemble ens = [&] {
    if (!opt.case_id.empty()) {
      CaseId id = CaseId::parse(opt.case_id);
      if (id.kind == CaseId::Kind::IIICat && opt.cat_n > 0) id.cat_parties = opt.cat_n;
      if (id.kind == CaseId::Kind::IVNonorth && opt.theta > 0) id.theta = opt.theta;
      return build_case(id);
    }
    if (!opt.ensemble_file.empty()) return parse_ensemble(read_file(opt.ensemble_file));
    throw CLI::ValidationError("--case", "an ensemble source is required (--case or --ensemble)");
  }();
  if (!opt.pair.empty()) {
    std::string partner = opt.pair;
    if (auto colon = partner.find(':'); colon != std::string::npos)
      partner = partner.substr(colon + 1);
    return reduce_to_pair(ens, partner);
  }
  return ens;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6) << x;
  return ss.str();
}

json bound_to_json(const BoundReport& report) {
  json j;
  j["name"] = report.name;
  j["value"] = report.value;
  j["std_error"] = report.std_error;
  if (report.samples > 0) {
    j["samples"] = report.samples;
    j["seed"] = report.seed;
  }
  return j;
}

// ---- reproduce -------------------------------------------------------------

struct Check {
  std::string name;
  double computed;
  double expected;
  double tolerance;
  bool pass;
};

Check make_check(const std::string& name, double computed, double expected, double tol) {
  return {name, computed, expected, tol, std::abs(computed - expected) <= tol};
}

Check make_check_ge(const std::string& name, double computed, double threshold) {
  return {name, computed, threshold, 0, computed >= threshold};
}

struct CaseReport {
  std::string id;
  std::vector<Check> checks;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

AuditConfig audit_config(const CommonOptions& opt, std::uint64_t seed, const CaseId& id) {
  AuditConfig config;
  config.restarts = opt.restarts;
  config.samples = opt.samples;
  config.seed = seed;
  config.threads = opt.threads;
  config.registered_case = id;
  return config;
}

CaseReport reproduce_case(const std::string& case_text, const CommonOptions& opt,
                          std::uint64_t seed) {
  CaseId id = CaseId::parse(case_text);
  if (id.kind == CaseId::Kind::IIICat && opt.cat_n > 0) id.cat_parties = opt.cat_n;
  if (id.kind == CaseId::Kind::IVNonorth && opt.theta > 0) id.theta = opt.theta;
  MultipartyEnsemble ens = build_case(id);
  CaseReport report;
  report.id = id.to_string();

  auto cert = [&] { return audit(ens, audit_config(opt, seed, id)); };

  switch (id.kind) {
    case CaseId::Kind::IPair: {
      MonogamyCertificate c = cert();
      report.checks.push_back(make_check("pair-B1-lower", c.pairs[0].lower, 0, 1e-9));
      report.checks.push_back(make_check("pair-B2-lower", c.pairs[1].lower, 0, 1e-9));
      report.checks.push_back(
          make_check("verdict-satisfied", c.verdict == "satisfied" ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::IFullBasis: {
      MonogamyCertificate c = cert();
      report.checks.push_back(make_check("sum-lower", c.sum_lower, 2, 1e-6));
      report.checks.push_back(make_check("global-upper", c.global_upper, 2, 1e-6));
      report.checks.push_back(
          make_check("verdict-satisfied", c.verdict == "satisfied" ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::IIE1:
    case CaseId::Kind::IIE2:
    case CaseId::Kind::IIE3: {
      MonogamyCertificate c = cert();
      for (const PairBound& pair : c.pairs)
        report.checks.push_back(make_check("pair-" + pair.partner, pair.lower, 1, 1e-6));
      report.checks.push_back(make_check("sum-lower", c.sum_lower, 2, 1e-6));
      report.checks.push_back(make_check("global-upper", c.global_upper, 1, 1e-6));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      report.checks.push_back(make_check("maximal", c.maximal ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::IIICat: {
      MonogamyCertificate c = cert();
      double n = ens.num_partners();
      for (const PairBound& pair : c.pairs)
        report.checks.push_back(make_check("pair-" + pair.partner, pair.lower, 1, 1e-6));
      report.checks.push_back(make_check("sum-lower", c.sum_lower, n, 1e-6));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      report.checks.push_back(make_check("maximal", c.maximal ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::IVET: {
      MonogamyCertificate c = cert();
      report.checks.push_back(make_check("sum-lower", c.sum_lower, 2 * std::log2(3.0), 1e-6));
      report.checks.push_back(make_check("global-upper", c.global_upper, std::log2(3.0), 1e-6));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      report.checks.push_back(make_check("maximal", c.maximal ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::IVEP: {
      MonogamyCertificate c = cert();
      report.checks.push_back(make_check("sum-lower", c.sum_lower, 4, 1e-6));
      report.checks.push_back(make_check("global-upper", c.global_upper, 3, 1e-6));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      report.checks.push_back(make_check("not-maximal", c.maximal ? 1 : 0, 0, 0));
      break;
    }
    case CaseId::Kind::IVNonorth: {
      MonogamyCertificate c = cert();
      report.checks.push_back(make_check_ge("sum-lower>=1.9", c.sum_lower, 1.9));
      report.checks.push_back(
          make_check("global-upper<=1", c.global_upper <= 1 + 1e-9 ? 1 : 0, 1, 0));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      break;
    }
    case CaseId::Kind::VShifts: {
      MultipartyEnsemble pair = reduce_to_pair(ens, "B1");
      double protocol_value = mutual_information(simulate(pair, shifts_protocol()));
      report.checks.push_back(
          make_check("protocol-mi", protocol_value, kShiftsProtocolValue, 1e-5));
      BoundReport lambda = lambda_locc(pair, opt.samples, seed, opt.threads);
      report.checks.push_back(make_check("lambda-locc", lambda.value, 1 - kLog2E / 2,
                                         3 * lambda.std_error + 1e-12));
      report.checks.push_back(make_check("chi-locc", chi_locc(pair).value, 2, 1e-9));
      MonogamyCertificate c = cert();
      report.checks.push_back(
          make_check_ge("sum-lower>=2.40887-1e-5", c.sum_lower, 2.40887 - 1e-5));
      report.checks.push_back(make_check("global-upper", c.global_upper, 2, 1e-9));
      report.checks.push_back(make_check("verdict-violated", c.verdict == "violated" ? 1 : 0, 1, 0));
      report.checks.push_back(make_check_ge("violation>20%",
                                            100 * c.margin / c.global_upper, 20.0));
      break;
    }
  }
  return report;
}

int cmd_reproduce(const CommonOptions& opt) {
  std::uint64_t seed = resolve_seed(opt, true, kReproduceDefaultSeed);
  std::vector<std::string> cases;
  std::string want = opt.case_id.empty() ? "all" : opt.case_id;
  if (want == "I")
    cases = {"I-pair", "I-full-basis"};
  else if (want == "II")
    cases = {"II-E1", "II-E2", "II-E3"};
  else if (want == "III")
    cases = {"III-cat"};
  else if (want == "IV")
    cases = {"IV-ET", "IV-EP", "IV-nonorth"};
  else if (want == "V")
    cases = {"V-shifts"};
  else if (want == "all")
    cases = {"I-pair", "I-full-basis", "II-E1", "II-E2", "II-E3",
             "III-cat", "IV-ET", "IV-EP", "IV-nonorth", "V-shifts"};
  else
    cases = {want};

  std::vector<CaseReport> reports;
  for (const std::string& c : cases) reports.push_back(reproduce_case(c, opt, seed));

  std::ostringstream table;
  bool all_pass = true;
  json jcases = json::array();
  for (const CaseReport& report : reports) {
    all_pass = all_pass && report.pass();
    table << "case " << report.id << "\n";
    table << "  " << std::left << std::setw(28) << "check" << std::setw(12) << "computed"
          << std::setw(12) << "expected" << "status\n";
    json jchecks = json::array();
    for (const Check& check : report.checks) {
      table << "  " << std::left << std::setw(28) << check.name << std::setw(12)
            << fmt(check.computed) << std::setw(12) << fmt(check.expected)
            << (check.pass ? "pass" : "FAIL") << "\n";
      jchecks.push_back({{"name", check.name},
                         {"computed", check.computed},
                         {"expected", check.expected},
                         {"tolerance", check.tolerance},
                         {"pass", check.pass}});
    }
    table << "  overall: " << (report.pass() ? "PASS" : "FAIL") << "\n\n";
    jcases.push_back({{"id", report.id}, {"checks", jchecks}, {"pass", report.pass()}});
  }
  json payload{{"command", "reproduce"},
               {"seed", seed},
               {"samples", opt.samples},
               {"restarts", opt.restarts},
               {"cases", jcases},
               {"pass", all_pass}};
  emit(opt, table.str(), payload);
  return all_pass ? 0 : 1;
}

// ---- bounds ----------------------------------------------------------------

int cmd_bounds(const CommonOptions& opt) {
  MultipartyEnsemble ens = load_ensemble(opt);
  std::vector<BoundReport> reports;
  reports.push_back(holevo_chi(ens));
  reports.push_back(jrw_lower(ens));
  reports.push_back(cardinality_bound(ens));
  if (ens.bipartite()) {
    std::uint64_t seed = resolve_seed(opt, true);
    reports.push_back(chi_locc(ens));
    reports.push_back(lambda_locc(ens, opt.samples, seed, opt.threads));
  }
  std::ostringstream table;
  table << std::left << std::setw(20) << "bound" << std::setw(14) << "value"
        << "std-error\n";
  json jb = json::array();
  for (const BoundReport& report : reports) {
    table << std::left << std::setw(20) << report.name << std::setw(14) << fmt(report.value)
          << fmt(report.std_error) << "\n";
    jb.push_back(bound_to_json(report));
  }
  json payload{{"command", "bounds"}, {"bounds", jb}};
  emit(opt, table.str(), payload);
  return 0;
}

// ---- protocol run ----------------------------------------------------------

int cmd_protocol_run(const CommonOptions& opt, const std::string& protocol_file) {
  MultipartyEnsemble ens = load_ensemble(opt);
  LoccProtocol prot = parse_protocol(read_file(protocol_file));
  JointDistribution joint = simulate(ens, prot);
  double mi = mutual_information(joint);

  std::ostringstream table;
  table << "mutual-information " << fmt(mi) << "\n";
  table << std::left << std::setw(12) << "outcome" << "q(m)\n";
  json joutcomes = json::array();
  for (std::size_t m = 0; m < joint.outcome_labels().size(); ++m) {
    table << std::left << std::setw(12) << joint.outcome_labels()[m]
          << fmt(joint.outcome_probability(m)) << "\n";
    json col{{"label", joint.outcome_labels()[m]},
             {"probability", joint.outcome_probability(m)}};
    json per_element = json::array();
    for (long i = 0; i < joint.joint().rows(); ++i) per_element.push_back(joint.joint()(i, m));
    col["joint"] = per_element;
    joutcomes.push_back(std::move(col));
  }
  json payload{{"command", "protocol-run"},
               {"mutual_information", mi},
               {"outcomes", joutcomes}};
  emit(opt, table.str(), payload);
  return 0;
}

// ---- optimize ----------------------------------------------------------------

int cmd_optimize(const CommonOptions& opt, const std::string& mode) {
  MultipartyEnsemble ens = load_ensemble(opt);
  std::uint64_t seed = resolve_seed(opt, true);
  OptimizationResult result;
  if (mode == "global")
    result = optimize_global_projective(ens, opt.restarts, seed, opt.threads);
  else if (ens.bipartite())
    result = optimize_one_way_locc(ens, opt.restarts, seed, std::nullopt, opt.threads);
  else
    throw CLI::ValidationError("--mode", "one-way optimization needs a bipartite ensemble "
                                         "(reduce with --pair or use --mode global)");
  double certified = certify(result, ens);

  std::ostringstream table;
  table << "value      " << fmt(result.value) << "\n"
        << "certified  " << fmt(certified) << "\n"
        << "template   "
        << (result.strategy == StrategyTemplate::GlobalProjective
                ? "global-projective"
                : (result.strategy == StrategyTemplate::OneWayAtoB ? "one-way-a-to-b"
                                                                   : "one-way-b-to-a"))
        << "\n"
        << "restarts   " << result.restarts_used << "\n"
        << "converged  " << (result.converged ? "yes" : "no") << "\n";
  json payload{{"command", "optimize"},
               {"value", result.value},
               {"certified", certified},
               {"template",
                result.strategy == StrategyTemplate::GlobalProjective
                    ? "global-projective"
                    : (result.strategy == StrategyTemplate::OneWayAtoB ? "one-way-a-to-b"
                                                                       : "one-way-b-to-a")},
               {"parameters", result.parameters},
               {"restarts", result.restarts_used},
               {"seed", result.seed},
               {"converged", result.converged}};
  if (result.strategy != StrategyTemplate::GlobalProjective)
    payload["protocol"] = protocol_to_json(protocol_from_result(ens, result));
  emit(opt, table.str(), payload);
  return 0;
}

// ---- monogamy ----------------------------------------------------------------

int cmd_monogamy(const CommonOptions& opt) {
  MultipartyEnsemble ens = load_ensemble(opt);
  std::uint64_t seed = resolve_seed(opt, true);
  AuditConfig config;
  config.restarts = opt.restarts;
  config.samples = opt.samples;
  config.seed = seed;
  config.threads = opt.threads;
  if (!opt.case_id.empty()) config.registered_case = CaseId::parse(opt.case_id);
  MonogamyCertificate cert = audit(ens, config);

  std::ostringstream table;
  table << std::left << std::setw(10) << "partner" << std::setw(12) << "lower" << std::setw(12)
        << "chi-locc" << std::setw(12) << "log2(G)" << "method\n";
  for (const PairBound& pair : cert.pairs)
    table << std::left << std::setw(10) << pair.partner << std::setw(12) << fmt(pair.lower)
          << std::setw(12) << fmt(pair.chi_locc_upper) << std::setw(12)
          << fmt(pair.log2_cardinality) << pair.method << "\n";
  table << "sum-lower     " << fmt(cert.sum_lower) << "\n"
        << "global-upper  " << fmt(cert.global_upper) << " (" << cert.upper_method << ")\n"
        << "margin        " << fmt(cert.margin) << "\n"
        << "verdict       " << cert.verdict << (cert.maximal ? " (maximal)" : "") << "\n";
  json payload{{"command", "monogamy"}, {"certificate", certificate_to_json(cert)}};
  emit(opt, table.str(), payload);
  return 0;
}

// ---- ensemble validate -------------------------------------------------------

int cmd_ensemble_validate(const CommonOptions& opt) {
  MultipartyEnsemble ens = parse_ensemble(read_file(opt.ensemble_file));
  std::ostringstream table;
  table << "ok: " << ens.cardinality() << " elements, " << ens.parties().size()
        << " parties, dims [";
  for (std::size_t i = 0; i < ens.dims().size(); ++i)
    table << (i ? "," : "") << ens.dims()[i];
  table << "]\n";
  json payload{{"command", "ensemble-validate"},
               {"cardinality", ens.cardinality()},
               {"parties", ens.parties()},
               {"dims", ens.dims()},
               {"all_pure", ens.all_pure()}};
  emit(opt, table.str(), payload);
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_source = true) {
  if (with_source) {
    cmd->add_option("--case", opt.case_id, "registry case id (e.g. V-shifts, III-cat)");
    cmd->add_option("--ensemble", opt.ensemble_file, "ensemble JSON file");
    cmd->add_option("--pair", opt.pair, "reduce to a pair, e.g. A:B1");
    cmd->add_option("--n", opt.cat_n, "partner count for III-cat");
    cmd->add_option("--theta", opt.theta, "angle for IV-nonorth");
  }
  cmd->add_option("--restarts", opt.restarts, "optimizer restarts");
  cmd->add_option("--samples", opt.samples, "Monte-Carlo samples");
  cmd->add_option("--seed", opt.seed, "random seed (QMONO_SEED as fallback)");
  cmd->add_option("--threads", opt.threads, "worker threads");
  cmd->add_option("--format", opt.format, "table | json")
      ->check(CLI::IsMember({"table", "json"}));
  cmd->add_option("--out", opt.out, "write the report to a file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accessible-information bounds and monogamy audits for multiparty ensembles"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string protocol_file;
  std::string optimize_mode = "one-way";

  CLI::App* reproduce = app.add_subcommand("reproduce", "run a case study and check its values");
  add_common(reproduce, opt);

  CLI::App* bounds = app.add_subcommand("bounds", "bound reports for an ensemble");
  add_common(bounds, opt);

  CLI::App* protocol = app.add_subcommand("protocol", "measurement-protocol tools");
  CLI::App* protocol_run = protocol->add_subcommand("run", "simulate a protocol file");
  add_common(protocol_run, opt);
  protocol_run->add_option("--protocol", protocol_file, "protocol JSON file")->required();

  CLI::App* optimize = app.add_subcommand("optimize", "search measurement strategies");
  add_common(optimize, opt);
  optimize->add_option("--mode", optimize_mode, "one-way | global")
      ->check(CLI::IsMember({"one-way", "global"}));

  CLI::App* monogamy = app.add_subcommand("monogamy", "audit the pairwise sum against the bound");
  add_common(monogamy, opt);

  CLI::App* ensemble = app.add_subcommand("ensemble", "ensemble file tools");
  CLI::App* validate = ensemble->add_subcommand("validate", "check an ensemble file");
  validate->add_option("--ensemble", opt.ensemble_file, "ensemble JSON file")->required();
  add_common(validate, opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (reproduce->parsed()) return cmd_reproduce(opt);
    if (bounds->parsed()) return cmd_bounds(opt);
    if (protocol->parsed() && protocol_run->parsed()) return cmd_protocol_run(opt, protocol_file);
    if (optimize->parsed()) return cmd_optimize(opt, optimize_mode);
    if (monogamy->parsed()) return cmd_monogamy(opt);
    if (ensemble->parsed() && validate->parsed()) return cmd_ensemble_validate(opt);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
