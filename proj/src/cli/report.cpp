#include "qmc/cli/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace qmc::cli {

void RunReport::check(const std::string& name, const std::string& module, const std::string& invariant, bool pass) {
  assertions.push_back({name, module, invariant, pass});
}

bool RunReport::pass() const {
  for (const auto& a : assertions)
    if (!a.pass) return false;
  return true;
}

json RunReport::hashed() const {
  json as = json::array();
  for (const auto& a : assertions)
    as.push_back({{"name", a.name}, {"module", a.module}, {"invariant", a.invariant}, {"pass", a.pass}});
  return {{"command", command}, {"inputs", inputs}, {"results", results}, {"assertions", as}, {"pass", pass()}};
}

json RunReport::to_json() const {
  return {{"schema", kReportSchema}, {"hashed", hashed()}, {"timings", timings}};
}

std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::filesystem::path output_root() {
  const char* env = std::getenv("QMC_OUT");
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("qmc_out");
}

std::filesystem::path run_directory(const std::string& command, const json& inputs) {
  const json key = {{"command", command}, {"inputs", inputs}};
  return output_root() / sha256_hex(key.dump());
}

std::filesystem::path next_free(const std::filesystem::path& dir, const std::string& stem, const std::string& ext) {
  std::filesystem::create_directories(dir);
  std::filesystem::path p = dir / (stem + ext);
  for (int k = 1; std::filesystem::exists(p); ++k) p = dir / (stem + "." + std::to_string(k) + ext);
  return p;
}

std::filesystem::path write_report(const std::filesystem::path& dir, const RunReport& r) {
  const auto p = next_free(dir, "report", ".json");
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << r.to_json().dump(2) << '\n';
  if (!os) throw Error("write failed: " + p.string());
  return p;
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace qmc::cli
