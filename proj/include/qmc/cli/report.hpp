#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qmc/cli/state_io.hpp"

namespace qmc::cli {

inline constexpr const char* kReportSchema = "qmc-report/1";

struct Assertion {
  std::string name;
  std::string module;
  std::string invariant;
  bool pass = false;
};

// The hashed section holds everything except timings; it is serialized with
// sorted keys so equal runs give equal bytes.
struct RunReport {
  std::string command;
  json inputs = json::object();
  json results = json::object();
  std::vector<Assertion> assertions;
  json timings = json::object();

  void check(const std::string& name, const std::string& module, const std::string& invariant, bool pass);
  bool pass() const;
  json hashed() const;
  json to_json() const;
};

std::string sha256_hex(const std::string& data);

// Output root: $QMC_OUT, or ./qmc_out.
std::filesystem::path output_root();
// Run directory keyed by the content hash of the command and its inputs.
std::filesystem::path run_directory(const std::string& command, const json& inputs);
// Writes report.json, or report.<k>.json with the first free k.
std::filesystem::path write_report(const std::filesystem::path& dir, const RunReport& r);
// Same numbering scheme for other artifacts (e.g. "family", ".csv").
std::filesystem::path next_free(const std::filesystem::path& dir, const std::string& stem, const std::string& ext);

// Doubles that JSON cannot hold (inf, nan) become strings.
json number(double v);

}  // namespace qmc::cli
