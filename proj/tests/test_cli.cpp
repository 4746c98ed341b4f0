#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string data(const std::string& name) { return std::string(PATROL_TEST_DATA) + "/" + name; }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  const auto err_path =
      std::filesystem::temp_directory_path() / ("patrolscope_err_" + std::to_string(::getpid()) + "_" +
                                                std::to_string(counter++));
  const std::string command = std::string(PATROLSCOPE_BIN) + " " + args + " 2>" + err_path.string();
  Run result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) result.out.append(buffer.data(), n);
  const int raw = ::pclose(pipe);
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.err = slurp(err_path);
  std::filesystem::remove(err_path);
  return result;
}

std::vector<json> diagnostics(const std::string& err) {
  std::vector<json> lines;
  std::istringstream in(err);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(json::parse(line));
  }
  return lines;
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run("validate " + data("example.json")).status, 0);

  const auto leaky = run("validate " + data("row_sum_099.json"));
  EXPECT_EQ(leaky.status, 2);
  const auto diag = diagnostics(leaky.err);
  ASSERT_EQ(diag.size(), 1u);
  EXPECT_EQ(diag[0]["code"], "ROW_NOT_STOCHASTIC");
  EXPECT_EQ(diag[0]["subject"], "b");
  EXPECT_EQ(diag[0]["value"], 0.99);

  EXPECT_EQ(run("validate " + data("malformed.json")).status, 2);
  EXPECT_EQ(run("validate " + data("unknown_reference.json")).status, 2);
  EXPECT_EQ(run("validate " + data("does_not_exist.json")).status, 1);

  const auto reducible = run("validate " + data("reducible.json"));
  EXPECT_EQ(reducible.status, 0);
  const auto warnings = diagnostics(reducible.err);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0]["level"], "warning");
  EXPECT_EQ(warnings[0]["code"], "NOT_IRREDUCIBLE");
}

TEST(Cli, AnalyzeReport) {
  const auto r = run("analyze " + data("example.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(r.out);
  const auto& pi = report.at("stationary");
  EXPECT_EQ(pi[0]["mass"], 0.111111111);
  EXPECT_EQ(pi[1]["mass"], 0.666666667);
  EXPECT_EQ(pi[2]["mass"], 0.222222222);
  EXPECT_EQ(report.at("location_mass")[0]["mass"], 0.777777778);
  for (const char* key : {"strategy", "seed", "warnings", "edge_flows", "hitting_times", "loop_breaks",
                          "mixing", "simulation"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(report.at("loop_breaks")[0]["threshold"], 0.333333333);
  EXPECT_EQ(report.at("loop_breaks")[0]["abandoned"], json({"0", "2"}));
}

TEST(Cli, AnalyzeIsByteStable) {
  const auto a = run("analyze " + data("example.json") + " --seed 9");
  const auto b = run("analyze " + data("example.json") + " --seed 9");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json::parse(a.out)["seed"], 9);
}

TEST(Cli, AnalyzeWritesReportFile) {
  const auto path = std::filesystem::temp_directory_path() / "patrolscope_report_test.json";
  const auto r = run("analyze " + data("example.json") + " --report " + path.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(slurp(path))["strategy"]["name"], "three-node example");
  std::filesystem::remove(path);
}

TEST(Cli, AnalyzeFailsOnReducible) {
  const auto r = run("analyze " + data("reducible.json"));
  EXPECT_EQ(r.status, 3);
  bool saw_error = false;
  for (const auto& d : diagnostics(r.err)) saw_error = saw_error || d["code"] == "NOT_IRREDUCIBLE";
  EXPECT_TRUE(saw_error);
}

TEST(Cli, CorridorHittingTimeInReport) {
  const auto corridor = std::filesystem::temp_directory_path() / "patrolscope_corridor4.json";
  ASSERT_EQ(run("generate corridor --n 4 > " + corridor.string()).status, 0);
  const auto r = run("analyze " + corridor.string());
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(r.out);
  bool found = false;
  for (const auto& h : report["hitting_times"]) {
    if (h["from"] == "pos0" && h["to"] == "pos5") {
      EXPECT_EQ(h["steps"], 25.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  std::filesystem::remove(corridor);
}

TEST(Cli, SweepListsOuterRingFirst) {
  const auto ring = std::filesystem::temp_directory_path() / "patrolscope_ring.json";
  ASSERT_EQ(run("generate outer-ring > " + ring.string()).status, 0);
  const auto r = run("sweep " + ring.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(json::parse(r.out)["loop_breaks"][0]["threshold"], 0.001);
  std::filesystem::remove(ring);
}

TEST(Cli, SimulateTrace) {
  const auto a = run("simulate " + data("example.json") + " --start 0 --count 200 --horizon 5 --seed 4");
  ASSERT_EQ(a.status, 0) << a.err;
  const auto doc = json::parse(a.out);
  EXPECT_EQ(doc["occupancy"].size(), 6u);
  EXPECT_EQ(doc["occupancy"][0]["counts"]["0"], 200);
  EXPECT_EQ(doc["occupancy"][1]["counts"]["1"], 200);
  const auto b = run("simulate " + data("example.json") + " --start 0 --count 200 --horizon 5 --seed 4");
  EXPECT_EQ(a.out, b.out);
  const auto unseeded = run("simulate " + data("example.json") + " --start 0 --horizon 2");
  ASSERT_EQ(unseeded.status, 0);
  EXPECT_TRUE(json::parse(unseeded.out)["seed"].is_number_unsigned());
  EXPECT_EQ(run("simulate " + data("example.json") + " --start 9").status, 2);
}

TEST(Cli, LayoutIsDeterministic) {
  const auto a = run("layout " + data("example.json") + " --seed 3");
  const auto b = run("layout " + data("example.json") + " --seed 3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const auto doc = json::parse(a.out);
  EXPECT_EQ(doc["converged"], true);
  EXPECT_EQ(doc["nodes"].size(), 3u);
  EXPECT_NE(run("layout " + data("example.json") + " --seed 4").out, a.out);
}

TEST(Cli, ExportDot) {
  const auto single = run("export-dot " + data("single_node.json"));
  ASSERT_EQ(single.status, 0);
  EXPECT_NE(single.out.find("\"guard\" -> \"guard\" [label=\"1.0\"]"), std::string::npos);

  const auto corridor = std::filesystem::temp_directory_path() / "patrolscope_memory2.json";
  ASSERT_EQ(run("generate memory-corridor --n 2 > " + corridor.string()).status, 0);
  const auto dot = run("export-dot " + corridor.string());
  std::size_t clusters = 0;
  for (std::size_t at = dot.out.find("subgraph \"cluster_"); at != std::string::npos;
       at = dot.out.find("subgraph \"cluster_", at + 1)) {
    ++clusters;
  }
  EXPECT_EQ(clusters, 4u);
  std::filesystem::remove(corridor);
}

TEST(Cli, ImportMatchesHandWrittenFile) {
  const auto r = run("import " + data("example_matrix.csv") + " " + data("example_locations.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["nodes"].size(), 3u);
  EXPECT_EQ(doc["edges"].size(), 5u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

}  // namespace
