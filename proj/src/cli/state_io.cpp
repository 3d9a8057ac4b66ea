#include "qmc/cli/state_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qmc::cli {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::complex<double> entry(const json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw UsageError(where + ": matrix entries must be numbers or [re, im] pairs");
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(origin + ": parse error at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw UsageError(where + ": unknown field \"" + k + "\"");
}

Mat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw UsageError(where + ": expected a matrix (list of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw UsageError(where + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = entry(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

Vec vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw UsageError(where + ": expected a vector");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = entry(j[i], where);
  return v;
}

RVec real_vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw UsageError(where + ": expected a list of numbers");
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw UsageError(where + ": expected a list of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(row);
  }
  return out;
}

RegList registers_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw UsageError(where + ": \"registers\" must be a non-empty list");
  RegList regs;
  for (const auto& r : j) {
    require_keys(r, {"name", "dim", "kind"}, where + ".registers");
    if (!r.contains("name") || !r.contains("dim")) throw UsageError(where + ": register needs name and dim");
    const std::string kind = r.value("kind", "quantum");
    if (kind != "quantum" && kind != "classical") throw UsageError(where + ": register kind must be quantum or classical");
    Register reg{r.at("name").get<std::string>(), r.at("dim").get<int>(),
                 kind == "quantum" ? Kind::quantum : Kind::classical};
    regs.push_back(reg);
  }
  try {
    check_registers(regs);
  } catch (const ValidationError& e) {
    throw UsageError(where + ": " + e.what());
  }
  return regs;
}

json registers_to_json(const RegList& regs) {
  json out = json::array();
  for (const auto& r : regs)
    out.push_back({{"name", r.name}, {"dim", r.dim}, {"kind", r.kind == Kind::quantum ? "quantum" : "classical"}});
  return out;
}

StateVector pure_from_json(const json& j, Rng& rng, const std::string& where) {
  require_keys(j, {"registers", "vector", "random"}, where);
  const RegList regs = registers_from_json(j.at("registers"), where);
  const auto d = static_cast<int>(total_dim(regs));
  if (j.contains("random")) {
    if (j.at("random") != "pure") throw UsageError(where + ": a pure state can only be \"random\": \"pure\"");
    return StateVector(random_pure(rng, d), regs);
  }
  if (!j.contains("vector")) throw UsageError(where + ": pure state needs \"vector\" or \"random\"");
  Vec v = vector_from_json(j.at("vector"), where);
  if (v.size() != d) throw UsageError(where + ": vector length does not match the registers");
  return StateVector(v, regs);
}

DensityOperator density_from_json(const json& j, Rng& rng, const std::string& where) {
  require_keys(j, {"registers", "vector", "matrix", "random"}, where);
  const RegList regs = registers_from_json(j.at("registers"), where);
  const auto d = static_cast<int>(total_dim(regs));
  if (j.contains("random")) {
    if (j.at("random") == "pure") return DensityOperator::from_pure(StateVector(random_pure(rng, d), regs));
    if (j.at("random") == "density") return DensityOperator(random_density(rng, d), regs);
    throw UsageError(where + ": \"random\" must be \"pure\" or \"density\"");
  }
  if (j.contains("vector")) return DensityOperator::from_pure(pure_from_json(j, rng, where));
  if (!j.contains("matrix")) throw UsageError(where + ": state needs \"matrix\", \"vector\" or \"random\"");
  const Mat m = matrix_from_json(j.at("matrix"), where);
  if (m.rows() != d || m.cols() != d) throw UsageError(where + ": matrix size does not match the registers");
  return DensityOperator(m, regs);
}

CqState cq_from_json(const json& j, Rng& rng, const std::string& where) {
  require_keys(j, {"registers", "blocks"}, where);
  (void)rng;
  const RegList regs = registers_from_json(j.at("registers"), where);
  RegList creg, qreg;
  for (const auto& r : regs) (r.kind == Kind::classical ? creg : qreg).push_back(r);
  CqState s(creg, qreg);
  if (!j.contains("blocks") || !j.at("blocks").is_array()) throw UsageError(where + ": cq state needs \"blocks\"");
  const auto d = static_cast<Eigen::Index>(total_dim(qreg));
  for (const auto& b : j.at("blocks")) {
    require_keys(b, {"key", "weight", "rho"}, where + ".blocks");
    const auto key = b.at("key").get<std::vector<int>>();
    if (key.size() != creg.size()) throw UsageError(where + ": block key length differs from the classical registers");
    for (std::size_t i = 0; i < key.size(); ++i)
      if (key[i] < 0 || key[i] >= creg[i].dim) throw UsageError(where + ": block key out of range");
    const Mat rho = b.contains("rho") ? matrix_from_json(b.at("rho"), where) : Mat::Identity(d, d);
    if (rho.rows() != d || rho.cols() != d) throw UsageError(where + ": block size does not match the registers");
    s.add(key, b.at("weight").get<double>(), rho);
  }
  try {
    s.validate(1e-9);
  } catch (const ValidationError& e) {
    throw UsageError(where + ": " + e.what());
  }
  return s;
}

json cq_to_json(const CqState& s) {
  json blocks = json::array();
  for (const auto& [k, b] : s.blocks()) blocks.push_back({{"key", k}, {"weight", b.weight}, {"rho", matrix_to_json(b.rho)}});
  return {{"registers", registers_to_json(concat(s.classical_regs(), s.quantum_regs()))}, {"blocks", blocks}};
}

}  // namespace qmc::cli
