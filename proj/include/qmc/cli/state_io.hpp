#pragma once

#include <string>

#include <json.hpp>

#include "qmc/cq_state.hpp"
#include "qmc/random_states.hpp"
#include "qmc/state.hpp"

namespace qmc::cli {

using json = nlohmann::json;

// Bad input files and flags; maps to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Parses a file, reporting syntax errors with line and column.
json read_json_file(const std::string& path);
json parse_json_text(const std::string& text, const std::string& origin);

// Rejects any key of `obj` outside `allowed`.
void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);

// Complex entries are [re, im] pairs or plain reals.
Mat matrix_from_json(const json& j, const std::string& where);
Vec vector_from_json(const json& j, const std::string& where);
json matrix_to_json(const Mat& m);
RVec real_vector_from_json(const json& j, const std::string& where);

RegList registers_from_json(const json& j, const std::string& where);
json registers_to_json(const RegList& regs);

// State documents (".qstate.json"):
//   {"registers": [...], "vector": [...]}            pure state
//   {"registers": [...], "matrix": [[...], ...]}     density operator
//   {"registers": [...], "blocks": [{"key": [...], "weight": w, "rho": [[...]]}]}
// "random": "pure" | "density" replaces the data with a state drawn from rng.
StateVector pure_from_json(const json& j, Rng& rng, const std::string& where);
DensityOperator density_from_json(const json& j, Rng& rng, const std::string& where);
CqState cq_from_json(const json& j, Rng& rng, const std::string& where);
json cq_to_json(const CqState& s);

}  // namespace qmc::cli
