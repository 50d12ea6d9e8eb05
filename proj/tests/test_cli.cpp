#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bitension");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = bitension::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path p = fs::temp_directory_path() / "bitension_cli" / info->name();
  fs::create_directories(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Cli, ExitCodeMatrixOverCatalog) {
  const std::vector<std::pair<std::vector<std::string>, int>> cases = {
      {{"--catalog", "small-hypersphere", "--param", "m=3", "--param", "r=0.70710678118654752"}, 0},
      {{"--catalog", "small-hypersphere", "--param", "m=2"}, 0},
      {{"--catalog", "product-spheres"}, 0},
      {{"--catalog", "clifford-torus-b3"}, 0},
      {{"--catalog", "veronese"}, 0},
      {{"--catalog", "generalized-clifford"}, 0},
      {{"--catalog", "small-hypersphere", "--param", "r=1"}, 0},
      {{"--catalog", "product-spheres", "--param", "m1=1", "--param", "m2=1"}, 0},
      {{"--catalog", "small-hypersphere", "--param", "m=2", "--param", "r=0.6"}, 1},
      {{"--catalog", "veronese", "--param", "r=0.9"}, 1},
      {{"--catalog", "clifford-torus-b3", "--param", "a=0.4"}, 1},
      {{"--catalog", "small-hypersphere", "--param", "r=0.70712"}, 1},  // inconclusive
  };
  for (const auto& [args, code] : cases) {
    std::vector<std::string> full = {"verify"};
    full.insert(full.end(), args.begin(), args.end());
    full.insert(full.end(), {"--points", "16"});
    const auto r = run_cli(full);
    EXPECT_EQ(r.code, code) << args[1] << " " << (args.size() > 3 ? args[3] : "") << "\n" << r.err;
  }
}

TEST(Cli, InconclusiveBandExitsOne) {
  const auto r = run_cli({"verify", "--catalog", "small-hypersphere", "--param", "r=0.70712", "--format", "json",
                          "--points", "8"});
  EXPECT_EQ(json::parse(r.out)["verdict"], "inconclusive");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, VerifyJsonReportsQuantities) {
  const auto r = run_cli({"verify", "--catalog", "small-hypersphere", "--param", "m=3", "--param", "r=0.70710678",
                          "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char* key : {"tool_version", "config_echo", "chart", "samples", "residuals", "quantities", "audit",
                          "verdict"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["verdict"], "biharmonic-proper");
  EXPECT_NEAR(j["quantities"]["A_norm2"]["mean"].get<double>(), 3.0, 1e-7);
  EXPECT_NEAR(j["quantities"]["H_norm"]["mean"].get<double>(), 1.0, 1e-7);
  EXPECT_NEAR(j["quantities"]["scalar_curvature"]["mean"].get<double>(), 12.0, 1e-6);
  EXPECT_EQ(j["samples"]["seed"], 42);
  EXPECT_EQ(j["samples"]["used"], 64);
  EXPECT_EQ(j["config_echo"]["seed"], 42);
}

TEST(Cli, NegativeControlReportsNotBiharmonic) {
  const auto r = run_cli({"verify", "--catalog", "small-hypersphere", "--param", "m=2", "--param", "r=0.6",
                          "--format", "json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["verdict"], "not-biharmonic");
}

TEST(Cli, JsonRoundTripsAndIsDeterministic) {
  const std::vector<std::string> args = {"verify", "--catalog", "veronese", "--format", "json", "--seed", "9"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json::parse(a.out).dump(2) + "\n", a.out);

  const auto s = run_cli({"scan", "--family", "small-hypersphere", "--param", "r", "--range", "0.3:0.99", "--steps",
                          "40", "--format", "json"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(json::parse(s.out).dump(2) + "\n", s.out);
  EXPECT_EQ(run_cli({"scan", "--family", "small-hypersphere", "--param", "r", "--range", "0.3:0.99", "--steps", "40",
                     "--format", "json"})
                .out,
            s.out);
}

TEST(Cli, SeedChangesTheReport) {
  const auto a = run_cli({"verify", "--catalog", "veronese", "--format", "json", "--points", "8"});
  const auto b = run_cli({"verify", "--catalog", "veronese", "--format", "json", "--points", "8", "--seed", "7"});
  EXPECT_NE(a.out, b.out);
  EXPECT_EQ(json::parse(b.out)["samples"]["seed"], 7);
}

TEST(Cli, ScanCsvHasRootRow) {
  const auto r = run_cli({"scan", "--family", "small-hypersphere", "--param", "m=2", "--param", "r", "--range",
                          "0.3:0.99", "--steps", "200", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "param,max_residual,mean_residual,H_norm,verdict");
  int roots = 0;
  while (std::getline(lines, line)) {
    if (line.find("root:") == std::string::npos) continue;
    ++roots;
    EXPECT_NEAR(std::stod(line.substr(0, line.find(','))), 1.0 / std::sqrt(2.0), 1e-6);
  }
  EXPECT_EQ(roots, 1);
}

TEST(Cli, AuditSubcommand) {
  const auto ok = run_cli({"audit", "--catalog", "clifford-torus-b3", "--format", "json"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const json j = json::parse(ok.out);
  ASSERT_TRUE(j["audit"].is_array());
  bool found = false;
  for (const auto& e : j["audit"]) {
    if (e["name"] == "B_norm2_rigidity") {
      found = true;
      EXPECT_NEAR(e["measured"].get<double>(), 6.0, 1e-6);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(run_cli({"audit", "--catalog", "small-hypersphere", "--param", "r=0.6"}).code, 1);
  const auto human = run_cli({"audit", "--catalog", "veronese"});
  EXPECT_EQ(human.code, 0);
  EXPECT_NE(human.out.find("B_norm2_rigidity"), std::string::npos);
}

TEST(Cli, HumanReportShowsQuantityTable) {
  const auto r = run_cli({"verify", "--catalog", "product-spheres", "--points", "8"});
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"|H|", "|A|^2", "|B|^2", "biharmonic-proper"}) EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, CatalogListing) {
  const auto r = run_cli({"catalog", "list", "--json"});
  EXPECT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["catalog"].size(), 5u);
  const auto text = run_cli({"catalog", "list"});
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("generalized-clifford"), std::string::npos);
}

TEST(Cli, MalformedInputExitsTwo) {
  const std::vector<std::vector<std::string>> bad = {
      {},
      {"frobnicate"},
      {"verify"},
      {"verify", "--catalog", "nope"},
      {"verify", "--catalog", "veronese", "--param", "r"},
      {"verify", "--catalog", "veronese", "--param", "r=abc"},
      {"verify", "--catalog", "veronese", "--param", "q=1"},
      {"verify", "--catalog", "veronese", "--param", "r=1.5"},
      {"verify", "--catalog", "veronese", "--points", "0"},
      {"verify", "--catalog", "veronese", "--format", "xml"},
      {"verify", "--catalog", "veronese", "--pass-tol", "1e-2", "--fail-tol", "1e-3"},
      {"verify", "--catalog", "veronese", "--pass-tol", "0"},
      {"verify", "--catalog", "veronese", "--chart", "x.json"},
      {"verify", "--chart", "/nonexistent/chart.json"},
      {"scan", "--family", "veronese", "--range", "0.5:0.9"},
      {"scan", "--family", "veronese", "--param", "r", "--range", "0.9"},
      {"scan", "--family", "veronese", "--param", "r", "--range", "0.9:0.5"},
      {"scan", "--family", "veronese", "--param", "r", "--range", "0.5:0.9", "--steps", "4"},
  };
  for (const auto& args : bad) {
    const auto r = run_cli(args);
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    EXPECT_EQ(r.code, 2) << joined << "\n" << r.err;
  }
}

TEST(Cli, ChartFileErrors) {
  const auto syntax = write_file("syntax.json", "{ not json");
  EXPECT_EQ(run_cli({"verify", "--chart", syntax.string()}).code, 2);

  const auto parse = write_file("parse.json", json{{"name", "bad"},
                                                   {"m", 1},
                                                   {"n", 2},
                                                   {"expressions", {"cos(u1)", "sin(u1", "0"}},
                                                   {"domain", {{0, 6}}}}
                                                  .dump());
  const auto r = run_cli({"verify", "--chart", parse.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("column 7"), std::string::npos) << r.err;
}

TEST(Cli, NumericalFailureEverywhereExitsThree) {
  const auto flat = write_file("flat.json", json{{"name", "flat"},
                                                 {"m", 2},
                                                 {"n", 3},
                                                 {"expressions", {"cos(u1)", "sin(u1)", "0", "0"}},
                                                 {"domain", {{0, 6}, {0, 6}}}}
                                                .dump());
  const auto r = run_cli({"verify", "--chart", flat.string(), "--points", "8"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, ChartFileWithParameterOverride) {
  const auto sphere = write_file(
      "sphere.json", json{{"name", "sphere"},
                          {"m", 2},
                          {"n", 3},
                          {"params", {{"r", 0.6}}},
                          {"expressions", {"r*cos(u1)", "r*sin(u1)*cos(u2)", "r*sin(u1)*sin(u2)", "sqrt(1 - r^2)"}},
                          {"domain", {{0, M_PI}, {0, 2 * M_PI}}}}
                         .dump());
  EXPECT_EQ(run_cli({"verify", "--chart", sphere.string(), "--points", "8"}).code, 1);
  EXPECT_EQ(run_cli({"verify", "--chart", sphere.string(), "--param", "r=0.7071067811865476", "--points", "8"}).code,
            0);
}

TEST(Cli, OutputIsWrittenToFile) {
  const fs::path target = temp_dir() / "report.json";
  fs::remove(target);
  const auto r = run_cli({"verify", "--catalog", "veronese", "--format", "json", "--points", "8", "--output",
                          target.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(target);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto direct = run_cli({"verify", "--catalog", "veronese", "--format", "json", "--points", "8"});
  EXPECT_EQ(buf.str(), direct.out);
  for (const auto& e : fs::directory_iterator(temp_dir())) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST(Cli, VerifyCsvIsPerSampleTable) {
  const auto r = run_cli({"verify", "--catalog", "veronese", "--format", "csv", "--points", "8"});
  EXPECT_EQ(r.code, 0);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 9);
}

TEST(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.code, 0);
}
