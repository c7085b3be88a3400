#pragma once

// Regime-aware test battery over a scenario, and report/plot-data writers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsirelson/scenario.hpp"

namespace tsirelson {

struct SuiteOptions {
  std::optional<std::int64_t> depth;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> pmax;
  std::optional<Anchor> anchor;
  unsigned workers = 0;
};

struct TestResult {
  std::string name;
  double statistic = 0.0;
  // "<=": pass iff statistic <= threshold; ">": pass iff statistic > threshold
  // (expected-failure exhibits and negative controls).
  std::string relation = "<=";
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct RunReport {
  std::string scenario;
  std::string verdict;  // "C1", "C2", "C3(p)"
  std::int64_t p_mu = 0;
  bool certified = false;
  std::int64_t depth = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<TestResult> tests;
  bool pass = false;
  double wall_seconds = 0.0;
};

RunReport run_suite(const Scenario& scenario, const SuiteOptions& options = {});

// Deterministic renderings; wall time is included only on request.
std::string render_text(const RunReport& report, bool include_timing = false);
std::string render_csv(const RunReport& report);

// Writes ecf_decay.csv, convpower.csv and histogram.csv into out_dir.
// Throws IoError if the directory cannot be written.
void emit_plot_data(const Scenario& scenario, const SuiteOptions& options, const std::string& out_dir);

}  // namespace tsirelson
