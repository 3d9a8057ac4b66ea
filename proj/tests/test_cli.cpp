#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "qmc/cli/report.hpp"
#include "qmc/cli/scenario.hpp"

using namespace qmc;
using namespace qmc::cli;
namespace fs = std::filesystem;

namespace {

const char* kTwoQubit = R"({"registers": [{"name": "R", "dim": 2, "kind": "quantum"},
                                          {"name": "A", "dim": 2, "kind": "quantum"},
                                          {"name": "B", "dim": 2, "kind": "quantum"}],
                            "random": "pure"})";

std::string compress_doc(const std::string& extra_payload = "") {
  return std::string(R"({"kind": "compress", "rngSeed": 7, "payload": {"state": )") + kTwoQubit +
         R"(, "R": "R", "A": "A", "B": "B", "povm": {"random": 2}, "eps": 0.05)" + extra_payload + "}}";
}

const char* kConvexSplit = R"({"kind": "convex-split", "rngSeed": 5, "payload": {
  "source": {"registers": [{"name": "Q", "dim": 2, "kind": "classical"}, {"name": "P", "dim": 2, "kind": "quantum"}],
             "blocks": [{"key": [0], "weight": 0.5, "rho": [[1, 0], [0, 0]]},
                        {"key": [1], "weight": 0.5, "rho": [[0, 0], [0, 1]]}]},
  "register": "Q", "n": 4}})";

struct Run {
  int status = -1;
  std::string out;
};

class Sandbox {
 public:
  Sandbox() {
    root_ = fs::temp_directory_path() / ("qmc_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(root_);
    fs::create_directories(root_ / "out");
  }
  ~Sandbox() { fs::remove_all(root_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  Run run(const std::string& args) const {
    const char* bin = std::getenv("QMC_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd =
        "QMC_OUT='" + (root_ / "out").string() + "' '" + bin + "' " + args + " 2>" + (root_ / "stderr.txt").string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
  }

  std::string err() const {
    std::ifstream is(root_ / "stderr.txt");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  std::vector<fs::path> reports() const {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root_ / "out"))
      if (e.path().filename().string().rfind("report", 0) == 0) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static inline int counter_ = 0;
  fs::path root_;
};

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("scenario parsing") {
  const ScenarioFile s = parse_scenario(json::parse(compress_doc()));
  CHECK(s.kind == "compress");
  CHECK(s.rng_seed == 7);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"kind": "nope"})")), UsageError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"kind": "family", "seed": 1})")), UsageError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"kind": "family", "overrides": {"zeta": 1}})")), UsageError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"kind": "family", "overrides": {"n": "4"}})")), UsageError);
  CHECK_THROWS_AS(compress_input(parse_scenario(json::parse(compress_doc(R"(, "colour": 1)")))), UsageError);

  SUBCASE("same seed draws the same state") {
    const auto a = compress_input(s), b = compress_input(s);
    CHECK((a.psi.amps() - b.psi.amps()).norm() == 0.0);
    CHECK(a.povm.outcomes() == 2);
  }
  SUBCASE("overrides win over the payload") {
    ScenarioFile t = s;
    t.overrides["n"] = 16;
    t.overrides["b"] = 2;
    const auto sc = compress_input(t);
    CHECK(sc.n == 16);
    CHECK(sc.b == 2);
    t.overrides["n"] = 2.5;
    CHECK_THROWS_AS(compress_input(t), UsageError);
  }
}

TEST_CASE("json parse errors carry line and column") {
  try {
    parse_json_text("{\"kind\": \"compress\",\n  \"payload\": {,}}", "inline");
    FAIL("no error");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
}

TEST_CASE("report hashed section excludes timings") {
  RunReport a;
  a.command = "x";
  a.results = {{"v", 1.5}};
  a.check("c", "m", "inv", true);
  RunReport b = a;
  a.timings["total_seconds"] = 1.0;
  b.timings["total_seconds"] = 2.0;
  CHECK(a.hashed().dump() == b.hashed().dump());
  CHECK(a.to_json()["schema"] == kReportSchema);
  b.check("d", "m", "inv", false);
  CHECK_FALSE(b.pass());
  CHECK(number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("cli end to end") {
  Sandbox box;
  const auto compress = box.write("c.qmc.json", compress_doc());

  SUBCASE("compress at desk scale") {
    const Run r = box.run("compress --scenario " + compress.string() + " --n 16 --b 2");
    CHECK(r.status == 0);
    const auto reps = box.reports();
    REQUIRE(reps.size() == 1);
    std::ifstream is(reps[0]);
    const json rep = json::parse(is);
    CHECK(rep["schema"] == kReportSchema);
    CHECK(rep["hashed"]["results"]["protocol"]["m"] == 3);
    CHECK(rep["hashed"]["results"]["protocol"]["params"]["n"] == 16);
    CHECK(rep["hashed"]["pass"] == true);
    for (const auto& a : rep["hashed"]["assertions"]) CHECK(a["module"] == "compression");
  }

  SUBCASE("re-running appends and reproduces the hashed section") {
    const std::string args = "compress --scenario " + compress.string() + " --n 8 --b 2";
    REQUIRE(box.run(args).status == 0);
    REQUIRE(box.run(args).status == 0);
    const auto reps = box.reports();
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].parent_path() == reps[1].parent_path());
    CHECK(reps[0].filename() == "report.1.json");
    CHECK(reps[1].filename() == "report.json");
    std::ifstream a(reps[0]), b(reps[1]);
    CHECK(json::parse(a)["hashed"].dump() == json::parse(b)["hashed"].dump());
  }

  SUBCASE("family table") {
    const Run r = box.run("family --q 2 --n 4");
    CHECK(r.status == 0);
    CHECK(lines(r.out) == 9);
    CHECK(r.out.rfind("seed_a,seed_b,c_1,c_2,c_3,c_4\n", 0) == 0);
  }

  SUBCASE("invalid kind: exit 2, no report") {
    const auto bad = box.write("bad.qmc.json", R"({"kind": "teleport", "payload": {}})");
    CHECK(box.run("compress --scenario " + bad.string()).status == 2);
    CHECK(box.reports().empty());
  }

  SUBCASE("unknown field: exit 2") {
    const auto bad = box.write("bad.qmc.json", compress_doc(R"(, "colour": 1)"));
    CHECK(box.run("compress --scenario " + bad.string() + " --n 8 --b 2").status == 2);
    CHECK(box.err().find("colour") != std::string::npos);
    CHECK(box.reports().empty());
  }

  SUBCASE("parse error: exit 2 with line and column") {
    const auto bad = box.write("bad.qmc.json", "{\"kind\": \"compress\",\n\"payload\": {,}}");
    CHECK(box.run("compress --scenario " + bad.string()).status == 2);
    CHECK(box.err().find("line 2, column") != std::string::npos);
  }

  SUBCASE("theorem mode is refused with exit 3") {
    CHECK(box.run("compress --scenario " + compress.string()).status == 3);
    CHECK(box.err().find("exceeds 2^26") != std::string::npos);
    CHECK(box.reports().empty());
  }

  SUBCASE("kind mismatch and bad flags") {
    CHECK(box.run("extract --scenario " + compress.string()).status == 2);
    CHECK(box.run("compress --scenario " + compress.string() + " --n abc").status == 2);
    CHECK(box.run("teleport").status == 2);
  }

  SUBCASE("convex-split sweep over n") {
    const auto cs = box.write("cs.qmc.json", kConvexSplit);
    const Run r = box.run("sweep --scenario " + cs.string() + " --axis n --values 2,4,8,16,32");
    CHECK(r.status == 0);
    CHECK(lines(r.out) == 6);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "n,status,pass,n,k,D,bound");
    std::vector<int> order;
    while (std::getline(is, line)) order.push_back(std::stoi(line));
    CHECK(order == std::vector<int>{2, 4, 8, 16, 32});
  }

  SUBCASE("empty sweep gives the header only") {
    const auto cs = box.write("cs.qmc.json", kConvexSplit);
    const Run r = box.run("sweep --scenario " + cs.string() + " --axis n --values ''");
    CHECK(r.status == 0);
    CHECK(r.out == "n,status,pass,n,k,D,bound\n");
  }

  SUBCASE("sweep rejects a non-numeric axis") {
    const auto cs = box.write("cs.qmc.json", kConvexSplit);
    CHECK(box.run("sweep --scenario " + cs.string() + " --axis register --values 1").status == 2);
    CHECK(box.run("sweep --scenario " + cs.string() + " --axis n --values 2,x").status == 2);
  }
}
