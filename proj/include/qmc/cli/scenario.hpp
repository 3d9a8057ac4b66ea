#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmc/cli/state_io.hpp"
#include "qmc/compression.hpp"
#include "qmc/extractor.hpp"

namespace qmc::cli {

inline const std::vector<std::string> kKinds = {"entropy", "convex-split", "compress", "extract",
                                                "compose", "family",       "rates"};

// Top level of a ".qmc.json" file.
struct ScenarioFile {
  std::string kind;
  std::uint64_t rng_seed = 0;
  json payload = json::object();
  std::map<std::string, double> overrides;
  json source;  // the document as read, for the report echo and the run hash
};

// Numeric parameters that the command line, "overrides" and sweeps may set.
inline const std::vector<std::string> kOverrideKeys = {"n", "b", "eps", "k", "delta", "q", "blocks"};

ScenarioFile parse_scenario(const json& doc);
ScenarioFile load_scenario(const std::string& path);

// Payload decoders. Random parts of a payload draw from one Rng seeded with
// rngSeed, in document order.
struct EntropyInput {
  DensityOperator rho, sigma;
  double eps = 0.1;
};
EntropyInput entropy_input(const ScenarioFile& s);

struct ConvexSplitInput {
  CqSource source;
  std::optional<RVec> sigma;
  int n = 2;
  bool iid = false;
};
ConvexSplitInput convex_split_input(const ScenarioFile& s);

CompressionScenario compress_input(const ScenarioFile& s);

struct ExtractInput {
  CqState source;
  std::string reg = "C";
  std::optional<double> k;  // defaults to the source's -dmax(Psi_GC || Psi_G x I_C)
  double eps = 0.25;
};
ExtractInput extract_input(const ScenarioFile& s);

struct ComposeInput {
  CompressionScenario scenario;
  Factorization factorization;
  CompositionOptions options;
};
ComposeInput compose_input(const ScenarioFile& s, const std::optional<json>& factorization_doc);

struct FamilyInput {
  int q = 2;
  int n = 2;
};
FamilyInput family_input(const ScenarioFile& s);

struct RatesInput {
  CompressionScenario scenario;
};
RatesInput rates_input(const ScenarioFile& s);

}  // namespace qmc::cli
