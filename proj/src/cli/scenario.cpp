#include "qmc/cli/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace qmc::cli {

namespace {

std::optional<double> override_of(const ScenarioFile& s, const std::string& key) {
  const auto it = s.overrides.find(key);
  if (it == s.overrides.end()) return std::nullopt;
  return it->second;
}

int as_int(double v, const std::string& key) {
  if (std::abs(v - std::round(v)) > 1e-9 || std::abs(v) > 1e9) throw UsageError(key + " must be an integer");
  return static_cast<int>(std::lround(v));
}

double number(const ScenarioFile& s, const std::string& key, double fallback) {
  if (auto o = override_of(s, key)) return *o;
  if (s.payload.contains(key)) {
    if (!s.payload.at(key).is_number()) throw UsageError("payload." + key + " must be a number");
    return s.payload.at(key).get<double>();
  }
  return fallback;
}

std::optional<int> opt_int(const ScenarioFile& s, const std::string& key) {
  if (auto o = override_of(s, key)) return as_int(*o, key);
  if (s.payload.contains(key)) {
    if (!s.payload.at(key).is_number()) throw UsageError("payload." + key + " must be a number");
    return as_int(s.payload.at(key).get<double>(), key);
  }
  return std::nullopt;
}

std::vector<std::string> names(const json& p, const char* key) {
  if (!p.contains(key)) throw UsageError(std::string("payload needs \"") + key + "\"");
  const json& v = p.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw UsageError(std::string("payload.") + key + " must be a register name or list");
  return v.get<std::vector<std::string>>();
}

Povm povm_from_json(const json& j, int dim, Rng& rng, const std::string& where) {
  Povm p;
  if (j.is_string()) {
    const std::string k = j.get<std::string>();
    if (k == "trivial") {
      p.elements = {Mat::Identity(dim, dim), Mat::Zero(dim, dim)};
    } else if (k == "computational") {
      for (int i = 0; i < dim; ++i) {
        Mat m = Mat::Zero(dim, dim);
        m(i, i) = 1.0;
        p.elements.push_back(m);
      }
    } else {
      throw UsageError(where + ": named POVMs are \"trivial\" and \"computational\"");
    }
  } else if (j.is_object()) {
    require_keys(j, {"random"}, where);
    const int k = j.at("random").get<int>();
    if (k < 1) throw UsageError(where + ": random POVM needs at least one outcome");
    std::vector<Mat> g;
    Mat sum = Mat::Zero(dim, dim);
    for (int i = 0; i < k; ++i) {
      g.push_back(random_psd(rng, dim));
      sum += g.back();
    }
    const Mat ih = pinv_sqrt_psd(sum);
    for (const auto& x : g) p.elements.push_back(hermitize(ih * x * ih));
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      p.elements.push_back(matrix_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  } else {
    throw UsageError(where + ": POVM must be a list of matrices, a name or {\"random\": k}");
  }
  try {
    p.validate(1e-9);
  } catch (const ValidationError& e) {
    throw UsageError(where + ": " + e.what());
  }
  if (p.dim() != dim) throw UsageError(where + ": POVM dimension does not match register A");
  return p;
}

int merged_dim(const StateVector& psi, const std::vector<std::string>& regs) {
  int d = 1;
  for (const auto& r : regs) d *= psi.regs()[require_register(psi.regs(), r)].dim;
  return d;
}

// Shared by compress, compose and rates. `povm_key` is empty when the POVM
// comes from elsewhere.
CompressionScenario measurement_scenario(const ScenarioFile& s, Rng& rng, const char* povm_key) {
  const json& p = s.payload;
  CompressionScenario sc;
  sc.psi = pure_from_json(p.at("state"), rng, "payload.state");
  sc.R = names(p, "R");
  sc.A = names(p, "A");
  sc.B = names(p, "B");
  if (povm_key) {
    if (!p.contains(povm_key)) throw UsageError(std::string("payload needs \"") + povm_key + "\"");
    sc.povm = povm_from_json(p.at(povm_key), merged_dim(sc.psi, sc.A), rng, std::string("payload.") + povm_key);
  }
  sc.eps = number(s, "eps", 0.05);
  if (p.contains("sigma")) sc.sigma = real_vector_from_json(p.at("sigma"), "payload.sigma");
  sc.n = opt_int(s, "n");
  sc.b = opt_int(s, "b");
  sc.seed = s.rng_seed;
  return sc;
}

}  // namespace

ScenarioFile parse_scenario(const json& doc) {
  require_keys(doc, {"kind", "rngSeed", "payload", "overrides"}, "scenario");
  ScenarioFile s;
  s.source = doc;
  if (!doc.contains("kind") || !doc.at("kind").is_string()) throw UsageError("scenario: missing \"kind\"");
  s.kind = doc.at("kind").get<std::string>();
  if (std::find(kKinds.begin(), kKinds.end(), s.kind) == kKinds.end())
    throw UsageError("scenario: invalid kind \"" + s.kind + "\"");
  if (doc.contains("rngSeed")) {
    if (!doc.at("rngSeed").is_number_integer()) throw UsageError("scenario: rngSeed must be an integer");
    s.rng_seed = doc.at("rngSeed").get<std::uint64_t>();
  }
  if (doc.contains("payload")) {
    if (!doc.at("payload").is_object()) throw UsageError("scenario: payload must be an object");
    s.payload = doc.at("payload");
  }
  if (doc.contains("overrides")) {
    const json& o = doc.at("overrides");
    if (!o.is_object()) throw UsageError("scenario: overrides must be an object");
    for (const auto& [k, v] : o.items()) {
      if (std::find(kOverrideKeys.begin(), kOverrideKeys.end(), k) == kOverrideKeys.end())
        throw UsageError("scenario: unknown override \"" + k + "\"");
      if (!v.is_number()) throw UsageError("scenario: override " + k + " must be numeric");
      s.overrides[k] = v.get<double>();
    }
  }
  return s;
}

ScenarioFile load_scenario(const std::string& path) { return parse_scenario(read_json_file(path)); }

EntropyInput entropy_input(const ScenarioFile& s) {
  require_keys(s.payload, {"rho", "sigma", "eps"}, "payload");
  Rng rng(s.rng_seed);
  EntropyInput in;
  in.rho = density_from_json(s.payload.at("rho"), rng, "payload.rho");
  in.sigma = density_from_json(s.payload.at("sigma"), rng, "payload.sigma");
  in.eps = number(s, "eps", 0.1);
  if (in.rho.dim() != in.sigma.dim()) throw UsageError("payload: rho and sigma dimensions differ");
  return in;
}

ConvexSplitInput convex_split_input(const ScenarioFile& s) {
  require_keys(s.payload, {"source", "register", "sigma", "n", "iid"}, "payload");
  Rng rng(s.rng_seed);
  ConvexSplitInput in;
  const CqState st = cq_from_json(s.payload.at("source"), rng, "payload.source");
  in.source = CqSource::from_state(st, s.payload.value("register", std::string("C")));
  if (s.payload.contains("sigma")) in.sigma = real_vector_from_json(s.payload.at("sigma"), "payload.sigma");
  in.n = opt_int(s, "n").value_or(2);
  in.iid = s.payload.value("iid", false);
  return in;
}

CompressionScenario compress_input(const ScenarioFile& s) {
  require_keys(s.payload, {"state", "R", "A", "B", "povm", "eps", "sigma", "n", "b"}, "payload");
  Rng rng(s.rng_seed);
  return measurement_scenario(s, rng, "povm");
}

ExtractInput extract_input(const ScenarioFile& s) {
  require_keys(s.payload, {"source", "register", "k", "eps"}, "payload");
  Rng rng(s.rng_seed);
  ExtractInput in;
  in.source = cq_from_json(s.payload.at("source"), rng, "payload.source");
  in.reg = s.payload.value("register", std::string("C"));
  if (auto o = override_of(s, "k")) in.k = *o;
  else if (s.payload.contains("k")) in.k = s.payload.at("k").get<double>();
  in.eps = number(s, "eps", 0.25);
  return in;
}

ComposeInput compose_input(const ScenarioFile& s, const std::optional<json>& factorization_doc) {
  require_keys(s.payload, {"state", "R", "A", "B", "eps", "n", "b", "factorization", "delta", "extractorEps"},
               "payload");
  Rng rng(s.rng_seed);
  ComposeInput in;
  in.scenario = measurement_scenario(s, rng, nullptr);
  const json f = factorization_doc ? *factorization_doc : s.payload.value("factorization", json());
  if (f.is_null()) throw UsageError("compose needs a factorization (payload or --factorization)");
  require_keys(f, {"povm", "p_c_given_w", "target"}, "factorization");
  const int da = merged_dim(in.scenario.psi, in.scenario.A);
  in.factorization.w_povm = povm_from_json(f.at("povm"), da, rng, "factorization.povm");
  if (!f.contains("p_c_given_w") || !f.at("p_c_given_w").is_array())
    throw UsageError("factorization needs \"p_c_given_w\"");
  for (const auto& row : f.at("p_c_given_w"))
    in.factorization.p_c_given_w.push_back(real_vector_from_json(row, "factorization.p_c_given_w"));
  if (in.factorization.p_c_given_w.empty()) throw UsageError("factorization.p_c_given_w is empty");
  if (f.contains("target")) in.factorization.target = povm_from_json(f.at("target"), da, rng, "factorization.target");
  in.options.delta = number(s, "delta", 0.5);
  if (s.payload.contains("extractorEps")) in.options.extractor_eps = s.payload.at("extractorEps").get<double>();
  return in;
}

FamilyInput family_input(const ScenarioFile& s) {
  require_keys(s.payload, {"q", "n"}, "payload");
  FamilyInput in;
  in.q = opt_int(s, "q").value_or(2);
  in.n = opt_int(s, "n").value_or(2);
  if (in.q < 2 || in.n < 1) throw UsageError("family needs q >= 2 and n >= 1");
  return in;
}

RatesInput rates_input(const ScenarioFile& s) {
  require_keys(s.payload, {"state", "R", "A", "B", "povm", "eps"}, "payload");
  Rng rng(s.rng_seed);
  return {measurement_scenario(s, rng, "povm")};
}

}  // namespace qmc::cli
