#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "elicit/cli.hpp"
#include "elicit/transcript.hpp"

using namespace elicit;
namespace fs = std::filesystem;

namespace {

const std::string kGolden = std::string(ELICIT_SOURCE_DIR) + "/data/seagrass.transcript.jsonl";

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() /
         ("elicit-cli-" + std::to_string(std::random_device{}()) + "-" + name);
}

}  // namespace

TEST_CASE("replay prints the snapshot and rewrites the transcript unchanged") {
  const fs::path out = temp_file("replay.jsonl");
  const Run r = cli({"replay", kGolden, "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  const json snap = json::parse(r.out);
  CHECK(snap["phase"]["label"] == "Concluded");
  CHECK(read_file(out) == read_file(kGolden));
  fs::remove(out);
}

TEST_CASE("induce with an identity design returns the elicited locations") {
  const Session s = load_and_replay(read_file(kGolden));
  const int n = s.vine().n();
  const fs::path csv = temp_file("design.csv");
  {
    std::ofstream f(csv);
    for (int j = 0; j < n; ++j) f << (j ? "," : "") << "b" << j;
    f << '\n';
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) f << (j ? "," : "") << (i == j ? 1 : 0);
      f << '\n';
    }
  }
  const Run r = cli({"induce", kGolden, "--design", csv.string()});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  const Eigen::VectorXd m = s.final_location();
  REQUIRE(j["delta"].size() == static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) CHECK(j["delta"][i].get<double>() == doctest::Approx(m(i)).epsilon(1e-10));
  CHECK(j["names"][0] == "b0");
  CHECK(j["s"] == 14.3);

  const Run c = cli({"induce", kGolden, "--design", csv.string(), "--format", "csv"});
  CHECK(c.code == kExitOk);
  CHECK(c.out.rfind("coefficient,delta\nb0,", 0) == 0);
  fs::remove(csv);
}

TEST_CASE("truncate-scan ends at zero divergence") {
  const Run r = cli({"truncate-scan", kGolden});
  REQUIRE(r.code == kExitOk);
  const json rows = json::parse(r.out);
  REQUIRE(!rows.empty());
  CHECK(rows.back()["divergence"].get<double>() == doctest::Approx(0.0).scale(1.0));
  CHECK(rows[0]["t"] == 0);
  const Run c = cli({"truncate-scan", kGolden, "--format", "csv"});
  CHECK(c.out.rfind("t,divergence,threshold,substantial\n", 0) == 0);
}

TEST_CASE("curves lists increasing quantiles per scenario") {
  const Run r = cli({"curves", kGolden});
  REQUIRE(r.code == kExitOk);
  const json rows = json::parse(r.out);
  REQUIRE(rows.size() == 7 * 5);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i]["scenario"] == rows[i + 1]["scenario"])
      CHECK(rows[i]["quantile"].get<double>() < rows[i + 1]["quantile"].get<double>());
}

TEST_CASE("diagnose reports a discrepancy in both formats") {
  const Run r = cli({"diagnose", kGolden, "-n", "500", "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["kolmogorov"].get<double>() > 0);
  CHECK(j["kolmogorov"].get<double>() < 0.2);
  const Run ref = cli({"diagnose", kGolden, "-n", "500", "--seed", "3", "--backend", "reference"});
  CHECK(ref.out == r.out);
  const Run c = cli({"diagnose", kGolden, "-n", "500", "--format", "csv"});
  CHECK(c.out.rfind("mu0,w,n,kolmogorov", 0) == 0);
}

TEST_CASE("schema and casestudy") {
  const Run s = cli({"schema"});
  CHECK(s.code == kExitOk);
  CHECK_NOTHROW(json::parse(s.out));
  const Run c = cli({"casestudy"});
  CHECK(c.code == kExitOk);
  CHECK(c.out.rfind("s=14.3 r=118\n", 0) == 0);
}

TEST_CASE("exit codes") {
  CHECK(cli({"replay", "/nonexistent/x.jsonl"}).code == kExitIo);
  CHECK(cli({"replay", kGolden, "--bogus"}).code == kExitSchema);
  CHECK(cli({}).code == kExitSchema);
  CHECK(cli({"--help"}).code == kExitOk);

  const fs::path bad = temp_file("bad.jsonl");
  { std::ofstream(bad) << "not json\n"; }
  CHECK(cli({"replay", bad.string()}).code == kExitSchema);
  fs::remove(bad);

  const fs::path csv = temp_file("rank.csv");
  { std::ofstream(csv) << "a,b\n1,2\n1,2\n1,2\n1,2\n1,2\n1,2\n1,2\n"; }
  const Run r = cli({"induce", kGolden, "--design", csv.string()});
  CHECK(r.code == kExitDomain);
  CHECK(r.err.find("error (") == 0);
  fs::remove(csv);
}

TEST_CASE("design CSV parsing") {
  const DesignMatrix d = read_design_csv("x, \"y\"\n1,0\n\n0,1\n");
  CHECK(d.names == std::vector<std::string>{"x", "y"});
  CHECK(d.X.isIdentity());
  CHECK_THROWS_AS(read_design_csv("x,y\n1\n"), Error);
  CHECK_THROWS_AS(read_design_csv("x\nabc\n"), Error);
  CHECK_THROWS_AS(read_design_csv(""), Error);
}
