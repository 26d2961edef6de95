#include "qmono/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace qmono {

namespace {

using nlohmann::json;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::vector<std::string> party_labels(int num_parties) {
  std::vector<std::string> labels{"A"};
  for (int i = 1; i < num_parties; ++i) labels.push_back("B" + std::to_string(i));
  return labels;
}

Vector ket(char c) {
  Vector v(2);
  switch (c) {
    case '0': v << 1, 0; break;
    case '1': v << 0, 1; break;
    case '+': v << kInvSqrt2, kInvSqrt2; break;
    case '-': v << kInvSqrt2, -kInvSqrt2; break;
    default: throw std::invalid_argument("unknown single-qubit label");
  }
  return v;
}

StateVector qubit_product(const std::string& pattern) {
  std::vector<int> dims(pattern.size(), 2);
  Vector v = ket(pattern[0]);
  for (std::size_t i = 1; i < pattern.size(); ++i) {
    Vector w(v.size() * 2);
    Vector k = ket(pattern[i]);
    for (long j = 0; j < v.size(); ++j) w.segment(2 * j, 2) = v(j) * k;
    v = w;
  }
  return StateVector(dims, v);
}

StateVector superposition(std::vector<int> dims, const std::vector<std::pair<long, Complex>>& terms) {
  Vector v = Vector::Zero(dim_product(dims));
  for (const auto& [index, amp] : terms) v(index) = amp;
  v /= v.norm();
  return StateVector(std::move(dims), std::move(v));
}

long pack_index(const std::vector<int>& dims, const std::vector<int>& digits) {
  long g = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) g = g * dims[i] + digits[i];
  return g;
}

// Permutation of two party slots applied to a computational index.
long swap_digits(long g, const std::vector<int>& dims, int p1, int p2) {
  std::vector<int> digit(dims.size());
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    digit[i] = static_cast<int>(g % dims[i]);
    g /= dims[i];
  }
  std::swap(digit[p1], digit[p2]);
  return pack_index(dims, digit);
}

EnsembleElement swap_element(const EnsembleElement& el, const std::vector<int>& dims, int p1,
                             int p2) {
  EnsembleElement out = el;
  if (el.is_pure()) {
    const auto& psi = std::get<StateVector>(el.state);
    Vector v(psi.dim());
    for (long g = 0; g < psi.dim(); ++g) v(swap_digits(g, dims, p1, p2)) = psi.amplitudes()(g);
    out.state = StateVector(dims, std::move(v));
  } else {
    const auto& rho = std::get<DensityMatrix>(el.state);
    Matrix m(rho.dim(), rho.dim());
    for (long r = 0; r < rho.dim(); ++r) {
      long rr = swap_digits(r, dims, p1, p2);
      for (long c = 0; c < rho.dim(); ++c) m(rr, swap_digits(c, dims, p1, p2)) = rho.entries()(r, c);
    }
    out.state = DensityMatrix(dims, std::move(m));
  }
  return out;
}

bool states_equal(const EnsembleElement& a, const EnsembleElement& b, double tol) {
  if (a.is_pure() && b.is_pure()) {
    // For pure states trace distance is dominated by eigensolver noise, so
    // compare the overlap directly.
    double ov = std::abs(std::get<StateVector>(a.state).overlap(std::get<StateVector>(b.state)));
    return 1.0 - ov <= 1e-12;
  }
  auto dm = [](const EnsembleElement& e) {
    return e.is_pure() ? DensityMatrix::from_pure(std::get<StateVector>(e.state))
                       : std::get<DensityMatrix>(e.state);
  };
  return trace_distance(dm(a), dm(b)) < tol;
}

bool multisets_equal(const std::vector<EnsembleElement>& a, const std::vector<EnsembleElement>& b,
                     double tol) {
  std::vector<bool> used(b.size(), false);
  for (const auto& ea : a) {
    bool matched = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || std::abs(ea.probability - b[j].probability) > tol) continue;
      if (states_equal(ea, b[j], tol)) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument(where + ": expected a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

MultipartyEnsemble::MultipartyEnsemble(std::vector<std::string> parties, std::vector<int> dims,
                                       std::vector<EnsembleElement> elements)
    : parties_(std::move(parties)), dims_(std::move(dims)), elements_(std::move(elements)) {
  if (parties_.size() != dims_.size())
    throw std::invalid_argument("party label count does not match dims");
  if (parties_.size() < 2) throw std::invalid_argument("an ensemble needs at least two parties");
  if (elements_.empty()) throw std::invalid_argument("ensemble cardinality must be >= 1");
  priors();  // validates the probabilities
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& dims_i = elements_[i].is_pure() ? std::get<StateVector>(elements_[i].state).dims()
                                                : std::get<DensityMatrix>(elements_[i].state).dims();
    if (dims_i != dims_)
      throw std::invalid_argument("element " + std::to_string(i) +
                                  " does not match the ensemble dimensions");
  }
}

bool MultipartyEnsemble::all_pure() const {
  return std::all_of(elements_.begin(), elements_.end(),
                     [](const EnsembleElement& e) { return e.is_pure(); });
}

int MultipartyEnsemble::party_index(const std::string& label) const {
  auto it = std::find(parties_.begin(), parties_.end(), label);
  if (it == parties_.end()) throw std::invalid_argument("unknown party '" + label + "'");
  return static_cast<int>(it - parties_.begin());
}

ProbabilityDistribution MultipartyEnsemble::priors() const {
  std::vector<double> p;
  p.reserve(elements_.size());
  for (const auto& el : elements_) p.push_back(el.probability);
  return ProbabilityDistribution(std::move(p));
}

DensityMatrix MultipartyEnsemble::element_matrix(std::size_t i) const {
  const auto& el = element(i);
  return el.is_pure() ? DensityMatrix::from_pure(std::get<StateVector>(el.state))
                      : std::get<DensityMatrix>(el.state);
}

DensityMatrix MultipartyEnsemble::average_state() const {
  Matrix acc = Matrix::Zero(dim(), dim());
  for (std::size_t i = 0; i < elements_.size(); ++i)
    acc += elements_[i].probability * element_matrix(i).entries();
  return DensityMatrix(dims_, std::move(acc));
}

double default_nonorth_theta() { return std::asin(0.1); }

CaseId CaseId::parse(const std::string& text) {
  auto param_of = [&](const std::string& prefix) -> std::optional<std::string> {
    if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size() + 1, prefix + "(") == 0 &&
        text.back() == ')')
      return text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
    if (text == prefix) return std::string();
    return std::nullopt;
  };

  if (text == "I-pair") return {Kind::IPair};
  if (text == "I-full-basis") return {Kind::IFullBasis};
  if (text == "II-E1") return {Kind::IIE1};
  if (text == "II-E2") return {Kind::IIE2};
  if (text == "II-E3") return {Kind::IIE3};
  if (text == "IV-ET") return {Kind::IVET};
  if (text == "IV-EP") return {Kind::IVEP};
  if (text == "V-shifts") return {Kind::VShifts};
  if (auto arg = param_of("III-cat")) {
    CaseId id{Kind::IIICat};
    if (!arg->empty()) id.cat_parties = std::stoi(*arg);
    return id;
  }
  if (auto arg = param_of("IV-nonorth")) {
    CaseId id{Kind::IVNonorth};
    if (!arg->empty()) id.theta = std::stod(*arg);
    return id;
  }
  throw std::invalid_argument("unknown case id '" + text + "'");
}

std::string CaseId::to_string() const {
  switch (kind) {
    case Kind::IPair: return "I-pair";
    case Kind::IFullBasis: return "I-full-basis";
    case Kind::IIE1: return "II-E1";
    case Kind::IIE2: return "II-E2";
    case Kind::IIE3: return "II-E3";
    case Kind::IIICat: return "III-cat(" + std::to_string(cat_parties) + ")";
    case Kind::IVET: return "IV-ET";
    case Kind::IVEP: return "IV-EP";
    case Kind::IVNonorth: return "IV-nonorth";
    case Kind::VShifts: return "V-shifts";
  }
  throw std::logic_error("unreachable");
}

MultipartyEnsemble build_case(const CaseId& id) {
  using Kind = CaseId::Kind;
  std::vector<EnsembleElement> elements;

  switch (id.kind) {
    case Kind::IPair: {
      std::vector<int> dims{2, 2, 2};
      elements.push_back({0.5, superposition(dims, {{0, 1}, {7, 1}}), "psi0+"});
      elements.push_back({0.5, superposition(dims, {{0, 1}, {7, -1}}), "psi0-"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IFullBasis: {
      std::vector<int> dims{2, 2, 2};
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int sign = 0; sign < 2; ++sign) {
            long lo = pack_index(dims, {0, b, c});
            long hi = pack_index(dims, {1, 1 - b, 1 - c});
            std::string label = "ghz" + std::to_string(b) + std::to_string(c) +
                                (sign == 0 ? "+" : "-");
            elements.push_back(
                {0.125, superposition(dims, {{lo, 1}, {hi, sign == 0 ? 1.0 : -1.0}}), label});
          }
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IIE1: {
      std::vector<int> dims{2, 2, 2};
      elements.push_back({0.5, superposition(dims, {{0, 1}, {7, 1}}), "psi0+"});
      elements.push_back({0.5, superposition(dims, {{3, 1}, {4, -1}}), "psi3+"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IIE2: {
      std::vector<int> dims{2, 2, 2};
      elements.push_back({0.5, superposition(dims, {{0, 1}, {3, 1}}), "psi+"});
      elements.push_back({0.5, superposition(dims, {{4, 1}, {7, -1}}), "psi-"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IIE3: {
      std::vector<int> dims{2, 2, 2};
      elements.push_back({0.5, StateVector::basis(dims, 0), "000"});
      elements.push_back({0.5, StateVector::basis(dims, 7), "111"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IIICat: {
      int n = id.cat_parties;
      if (n < 2 || n > 20)
        throw std::invalid_argument("III-cat requires 2 <= N <= 20 (got " + std::to_string(n) +
                                    ")");
      std::vector<int> dims(n + 1, 2);
      long d = dim_product(dims);
      // |0...0> + |1...1>, and the same state with every partner spin-flipped:
      // |01...1> + |10...0>.
      elements.push_back({0.5, superposition(dims, {{0, 1}, {d - 1, 1}}), "cat"});
      long flipped_lo = (d - 1) >> 1;  // 0 followed by N ones
      long flipped_hi = d >> 1;        // 1 followed by N zeros
      elements.push_back({0.5, superposition(dims, {{flipped_lo, 1}, {flipped_hi, 1}}), "cat-x"});
      return MultipartyEnsemble(party_labels(n + 1), dims, std::move(elements));
    }
    case Kind::IVET: {
      std::vector<int> dims{3, 3, 3};
      auto idx = [&](int a, int b, int c) { return pack_index(dims, {a, b, c}); };
      elements.push_back(
          {1.0 / 3, superposition(dims, {{idx(0, 0, 0), 1}, {idx(1, 1, 1), 1}}), "000+111"});
      elements.push_back(
          {1.0 / 3, superposition(dims, {{idx(0, 1, 1), 1}, {idx(1, 2, 2), 1}}), "011+122"});
      elements.push_back(
          {1.0 / 3, superposition(dims, {{idx(1, 0, 0), 1}, {idx(2, 0, 0), 1}}), "100+200"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IVEP: {
      std::vector<int> dims{2, 2, 2};
      for (long g = 0; g < 8; ++g) {
        std::string label = std::to_string((g >> 2) & 1) + std::to_string((g >> 1) & 1) +
                            std::to_string(g & 1);
        elements.push_back({0.125, StateVector::basis(dims, g), label});
      }
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::IVNonorth: {
      double theta = id.theta > 0 ? id.theta : default_nonorth_theta();
      if (!(theta > 0 && theta < M_PI / 2))
        throw std::invalid_argument("IV-nonorth requires theta in (0, pi/2)");
      std::vector<int> dims{2, 2, 2};
      Vector n(2);
      n << std::sin(theta), std::cos(theta);
      Vector nnn(8);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) nnn(pack_index(dims, {a, b, c})) = n(a) * n(b) * n(c);
      elements.push_back({0.5, StateVector::basis(dims, 0), "000"});
      elements.push_back({0.5, StateVector(dims, nnn), "nnn"});
      return MultipartyEnsemble(party_labels(3), dims, std::move(elements));
    }
    case Kind::VShifts: {
      for (const char* pattern : {"01+", "1+0", "+01", "---"})
        elements.push_back({0.25, qubit_product(pattern), pattern});
      return MultipartyEnsemble(party_labels(3), {2, 2, 2}, std::move(elements));
    }
  }
  throw std::logic_error("unreachable");
}

MultipartyEnsemble reduce_to_pair(const MultipartyEnsemble& ens, const std::string& partner) {
  int idx = ens.party_index(partner);
  if (idx == 0) throw std::invalid_argument("partner must be one of B1..BN, not A");
  std::vector<int> keep{0, idx};
  std::vector<EnsembleElement> reduced;
  reduced.reserve(ens.cardinality());
  for (const auto& el : ens.elements()) {
    DensityMatrix rho = el.is_pure() ? partial_trace(std::get<StateVector>(el.state), keep)
                                     : partial_trace(std::get<DensityMatrix>(el.state), keep);
    reduced.push_back({el.probability, std::move(rho), el.label});
  }
  return MultipartyEnsemble({"A", partner}, {ens.dims()[0], ens.dims()[idx]}, std::move(reduced));
}

bool is_swap_invariant(const MultipartyEnsemble& ens, const std::string& p1,
                       const std::string& p2) {
  int i1 = ens.party_index(p1);
  int i2 = ens.party_index(p2);
  if (ens.dims()[i1] != ens.dims()[i2])
    throw std::invalid_argument("swap parties must have equal dimension");
  if (i1 == i2) return true;
  std::vector<EnsembleElement> swapped;
  swapped.reserve(ens.cardinality());
  for (const auto& el : ens.elements()) swapped.push_back(swap_element(el, ens.dims(), i1, i2));
  return multisets_equal(swapped, ens.elements(), kDegeneracyTol);
}

bool all_elements_identical(const MultipartyEnsemble& ens, double tol) {
  for (std::size_t i = 1; i < ens.cardinality(); ++i)
    if (!states_equal(ens.element(0), ens.element(i), tol)) return false;
  return true;
}

nlohmann::json ensemble_to_json(const MultipartyEnsemble& ens) {
  json j;
  j["dims"] = ens.dims();
  j["parties"] = ens.parties();
  json els = json::array();
  for (const auto& el : ens.elements()) {
    json e;
    e["p"] = el.probability;
    e["label"] = el.label;
    if (el.is_pure()) {
      const auto& psi = std::get<StateVector>(el.state);
      json v = json::array();
      for (long i = 0; i < psi.dim(); ++i) v.push_back(complex_to_json(psi.amplitudes()(i)));
      e["vector"] = std::move(v);
    } else {
      const auto& rho = std::get<DensityMatrix>(el.state);
      json m = json::array();
      for (long r = 0; r < rho.dim(); ++r) {
        json row = json::array();
        for (long c = 0; c < rho.dim(); ++c) row.push_back(complex_to_json(rho.entries()(r, c)));
        m.push_back(std::move(row));
      }
      e["matrix"] = std::move(m);
    }
    els.push_back(std::move(e));
  }
  j["elements"] = std::move(els);
  return j;
}

std::string serialize_ensemble(const MultipartyEnsemble& ens) {
  return ensemble_to_json(ens).dump(2);
}

MultipartyEnsemble ensemble_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("ensemble file: top level must be an object");
  if (!j.contains("dims") || !j["dims"].is_array())
    throw std::invalid_argument("ensemble file: missing \"dims\" array");
  std::vector<int> dims = j["dims"].get<std::vector<int>>();
  long d = dim_product(dims);

  std::vector<std::string> parties;
  if (j.contains("parties"))
    parties = j["parties"].get<std::vector<std::string>>();
  else
    parties = party_labels(static_cast<int>(dims.size()));

  if (!j.contains("elements") || !j["elements"].is_array() || j["elements"].empty())
    throw std::invalid_argument("ensemble file: missing nonempty \"elements\" array");

  std::vector<EnsembleElement> elements;
  double prob_sum = 0;
  for (std::size_t i = 0; i < j["elements"].size(); ++i) {
    const json& e = j["elements"][i];
    std::string where = "elements[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("p") || !e["p"].is_number())
      throw std::invalid_argument(where + ": missing numeric field \"p\"");
    double p = e["p"].get<double>();
    prob_sum += p;
    std::string label = e.value("label", "element-" + std::to_string(i));

    if (e.contains("vector")) {
      const json& v = e["vector"];
      if (!v.is_array() || static_cast<long>(v.size()) != d)
        throw std::invalid_argument(where + ".vector: expected " + std::to_string(d) +
                                    " amplitudes for dims product " + std::to_string(d));
      Vector amps(d);
      for (long k = 0; k < d; ++k)
        amps(k) = complex_from_json(v[k], where + ".vector[" + std::to_string(k) + "]");
      double norm = amps.norm();
      if (std::abs(norm - 1.0) > 1e-6)
        throw std::invalid_argument(where + ".vector: amplitudes are not normalized (norm " +
                                    std::to_string(norm) + "); renormalization is not applied");
      elements.push_back({p, StateVector(dims, std::move(amps), 2e-6), label});
    } else if (e.contains("matrix")) {
      const json& m = e["matrix"];
      if (!m.is_array() || static_cast<long>(m.size()) != d)
        throw std::invalid_argument(where + ".matrix: expected a " + std::to_string(d) + "x" +
                                    std::to_string(d) + " matrix");
      Matrix rho(d, d);
      for (long r = 0; r < d; ++r) {
        if (!m[r].is_array() || static_cast<long>(m[r].size()) != d)
          throw std::invalid_argument(where + ".matrix: row " + std::to_string(r) +
                                      " has the wrong length");
        for (long c = 0; c < d; ++c)
          rho(r, c) = complex_from_json(m[r][c], where + ".matrix[" + std::to_string(r) + "][" +
                                                     std::to_string(c) + "]");
      }
      elements.push_back({p, DensityMatrix(dims, std::move(rho), 2e-6), label});
    } else {
      throw std::invalid_argument(where + ": needs either a \"vector\" or a \"matrix\" field");
    }
  }
  if (std::abs(prob_sum - 1.0) > kProbTol)
    throw std::invalid_argument("probabilities must sum to 1 (got " + std::to_string(prob_sum) +
                                ")");
  return MultipartyEnsemble(std::move(parties), std::move(dims), std::move(elements));
}

MultipartyEnsemble parse_ensemble(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("ensemble file: ") + err.what());
  }
  return ensemble_from_json(j);
}

}  // namespace qmono
