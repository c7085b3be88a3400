#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tsirelson/errors.hpp"
#include "tsirelson/suite.hpp"

using namespace tsirelson;

namespace {

SuiteOptions small(std::int64_t samples = 20000) {
  SuiteOptions o;
  o.samples = samples;
  return o;
}

const TestResult* find(const RunReport& r, const std::string& name) {
  for (const auto& t : r.tests) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(RunSuite, C1AllPass) {
  const auto r = run_suite(builtin_scenario("c1_wrapped_gaussian"), small());
  EXPECT_EQ(r.verdict, "C1");
  EXPECT_EQ(r.p_mu, 0);
  EXPECT_TRUE(r.certified);
  EXPECT_TRUE(r.pass) << render_text(r);
  for (const char* name : {"pathwise_recursion", "uniformity_eta0", "independence_eta0_noise", "centered_product_decay",
                           "non_interchange_witness", "mixture_ecf_distance"}) {
    EXPECT_NE(find(r, name), nullptr) << name;
  }
}

TEST(RunSuite, C2ExhibitsDependence) {
  const auto r = run_suite(builtin_scenario("c2_dirac_third"), small());
  EXPECT_EQ(r.verdict, "C2");
  const auto* exhibit = find(r, "dependence_exhibit");
  ASSERT_NE(exhibit, nullptr);
  EXPECT_EQ(exhibit->relation, ">");
  EXPECT_NEAR(exhibit->statistic, 1.0, 1e-9);
  EXPECT_TRUE(exhibit->pass);
  EXPECT_NE(find(r, "strong_limit_cauchy"), nullptr);
  EXPECT_NE(find(r, "translate_equals_shifted_anchor"), nullptr);
  EXPECT_EQ(find(r, "uniformity_eta0"), nullptr);
  EXPECT_TRUE(r.pass) << render_text(r);
}

TEST(RunSuite, C3MeasurabilityPasses) {
  const auto r = run_suite(builtin_scenario("c3_half_atoms"), small());
  EXPECT_EQ(r.verdict, "C3(2)");
  EXPECT_EQ(r.p_mu, 2);
  const auto* m = find(r, "measurability");
  ASSERT_NE(m, nullptr);
  EXPECT_TRUE(m->pass);
  EXPECT_LE(m->statistic, 1e-9);
  const auto* control = find(r, "measurability_negative_control");
  ASSERT_NE(control, nullptr);
  EXPECT_NEAR(control->statistic, 0.5, 1e-9);
  EXPECT_NE(find(r, "bucket_uniformity"), nullptr);
  EXPECT_NE(find(r, "exact_oracle_tv"), nullptr);
  EXPECT_TRUE(r.pass) << render_text(r);
}

TEST(RunSuite, OverallIsConjunction) {
  for (const auto& name : builtin_names()) {
    const auto r = run_suite(builtin_scenario(name), small(5000));
    bool all = !r.tests.empty();
    for (const auto& t : r.tests) all = all && t.pass;
    EXPECT_EQ(r.pass, all) << name;
  }
}

TEST(RunSuite, OptionsOverrideDefaults) {
  SuiteOptions o = small(3000);
  o.depth = 9;
  o.seed = 5;
  const auto r = run_suite(builtin_scenario("c3_thirds"), o);
  EXPECT_EQ(r.depth, 9);
  EXPECT_EQ(r.samples, 3000);
  EXPECT_EQ(r.seed, 5u);
}

TEST(Render, DeterministicAcrossRunsAndWorkers) {
  auto o = small(10000);
  o.workers = 1;
  const auto a = run_suite(builtin_scenario("c2_geometric_gaussian"), o);
  o.workers = 5;
  const auto b = run_suite(builtin_scenario("c2_geometric_gaussian"), o);
  EXPECT_EQ(render_text(a), render_text(b));
  EXPECT_EQ(render_csv(a), render_csv(b));
  EXPECT_EQ(render_text(a).find("wall"), std::string::npos);
  EXPECT_NE(render_text(a, true).find("wall_seconds"), std::string::npos);
}

TEST(Render, CsvHasOneHeaderAndOneRowPerTest) {
  const auto r = run_suite(builtin_scenario("c3_half_atoms"), small(5000));
  const auto csv = render_csv(r);
  std::stringstream ss(csv);
  std::string line;
  std::size_t headers = 0, rows = 0;
  while (std::getline(ss, line)) {
    if (line.starts_with("#")) {
      ++headers;
      continue;
    }
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8) << line;
  }
  EXPECT_EQ(headers, 1u);
  EXPECT_EQ(rows, r.tests.size() + 1);
}

TEST(PlotData, FilesAndShapes) {
  const auto dir = std::filesystem::temp_directory_path() / "tsirelson_plot_test";
  std::filesystem::remove_all(dir);
  const std::int64_t n = 100000;
  emit_plot_data(builtin_scenario("c1_wrapped_gaussian"), small(n), dir.string());

  const auto hist = read_csv(dir / "histogram.csv");
  ASSERT_EQ(hist.size(), 50u);
  const double expected = static_cast<double>(n) / 50.0;
  std::int64_t total = 0;
  for (const auto& row : hist) {
    const double count = std::stod(row[2]);
    EXPECT_NEAR(count, expected, 4.0 * std::sqrt(expected));
    total += static_cast<std::int64_t>(count);
  }
  EXPECT_EQ(total, n);

  // Decay in depth at every frequency.
  const auto decay = read_csv(dir / "ecf_decay.csv");
  for (std::size_t i = 1; i < decay.size(); ++i) {
    if (decay[i][1] != decay[i - 1][1]) continue;
    EXPECT_LE(std::stod(decay[i][3]), std::stod(decay[i - 1][3])) << i;
  }

  const auto conv = read_csv(dir / "convpower.csv");
  EXPECT_EQ(conv.size(), 1000u);
  std::filesystem::remove_all(dir);
}

TEST(PlotData, UnitModulusRowIsConstantOne) {
  const auto dir = std::filesystem::temp_directory_path() / "tsirelson_plot_test_c3";
  std::filesystem::remove_all(dir);
  emit_plot_data(builtin_scenario("c3_half_atoms"), small(2000), dir.string());
  for (const auto& row : read_csv(dir / "convpower.csv")) {
    if (row[0] == "2" || row[0] == "4") EXPECT_EQ(std::stod(row[2]), 1.0);
    if (row[0] == "1") EXPECT_LE(std::stod(row[2]), 1e-12);
  }
  std::filesystem::remove_all(dir);
}

TEST(PlotData, UnwritableDirectory) {
  const auto file = std::filesystem::temp_directory_path() / "tsirelson_not_a_dir";
  std::ofstream(file) << "x";
  EXPECT_THROW(emit_plot_data(builtin_scenario("c3_half_atoms"), small(1000), (file / "sub").string()), IoError);
  std::filesystem::remove(file);
}
