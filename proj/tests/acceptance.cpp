// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "support.hpp"
#include "tsirelson/classifier.hpp"
#include "tsirelson/scenario.hpp"
#include "tsirelson/simulator.hpp"
#include "tsirelson/stats.hpp"
#include "tsirelson/suite.hpp"

using namespace tsirelson;
using namespace tsirelson::testing;
using Case = TrichotomyResult::Case;

namespace {

constexpr std::int64_t kSamples = 100000;
constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome trichotomy() {
  Outcome o;
  struct Expect {
    std::string name;
    MeasureSequence seq;
    Case which;
    std::int64_t p_mu;
  };
  std::vector<Expect> cases{
      {"iid WG(0,0.5)", iid(TorusMeasure::wrapped_gaussian(0, 0.5)), Case::C1, 0},
      {"iid Dirac(1/3)", iid(TorusMeasure::dirac(Rational(1, 3))), Case::C2, 1},
      {"iid coin", iid(coin()), Case::C3, 2},
      {"WG Geometric(1/4,1/2)", gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5}), Case::C2, 1},
  };
  // Scaled densities: the roulette plus a few random piecewise densities.
  cases.push_back({"roulette", roulette(), Case::C1, 0});
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const int pieces = 2 + trial;
    std::vector<double> breaks{0.0}, dens;
    double acc = 0.0;
    std::vector<double> widths;
    for (int i = 0; i < pieces; ++i) widths.push_back(unit(rng));
    for (double w : widths) acc += w;
    double mass = 0.0;
    for (int i = 0; i < pieces; ++i) {
      breaks.push_back(i + 1 == pieces ? 1.0 : breaks.back() + widths[i] / acc);
      dens.push_back(unit(rng));
      mass += dens.back() * (breaks[i + 1] - breaks[i]);
    }
    for (double& d : dens) d /= mass;
    cases.push_back({"scaled density #" + std::to_string(trial),
                     MeasureSequence({}, TailRule::scaled_density(TorusMeasure::piecewise(breaks, dens))), Case::C1, 0});
  }
  double slowest = 0.0;
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = classify(c.seq);
    const double t = seconds_since(start);
    slowest = std::max(slowest, t);
    o.require(r.which == c.which && r.evidence.p_mu == c.p_mu, c.name + " -> " + r.label());
    if (c.which == Case::C1) o.require(r.evidence.all_frequencies_certified, c.name + " certified");
    o.require(t < 1.0, c.name + " runtime");
  }
  o.detail << "cases=" << cases.size() << " slowest=" << slowest << "s";
  return o;
}

Outcome c1_uniformity_independence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto e = simulate({iid(TorusMeasure::wrapped_gaussian(0, 0.5)), 30, anchors::Deterministic{}, kSamples, kSeed, 0});
  const auto theta = e.states_at(0);
  double max_ecf = 0.0;
  for (std::int64_t p = 1; p <= 5; ++p) max_ecf = std::max(max_ecf, std::abs(ecf(theta, p)));
  NoiseColumns noise;
  const std::vector<std::int64_t> pq{1, 2}, js{0, -5, -10};
  for (auto j : js) noise.emplace(j, e.noise_at(j));
  const auto cross = independence(theta, noise, pq, pq, js);
  const double t = seconds_since(start);
  o.require(max_ecf <= 0.0127, "ECF");
  o.require(cross.max_modulus() <= 0.0127, "cross-characters");
  o.require(t < 10.0, "runtime");
  o.detail << "max_ecf=" << max_ecf << " max_cross=" << cross.max_modulus() << " <= 0.0127 time=" << t << "s";
  return o;
}

Outcome c2_strong_limit() {
  Outcome o;
  const auto seq = gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5});
  const auto a = strong_limit(seq, TorusPoint{}, 20, kSamples, kSeed);
  const auto b = strong_limit(seq, TorusPoint{}, 30, kSamples, kSeed);
  std::int64_t exceed = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) exceed += circular_distance(a.samples[i], b.samples[i]) > 0.01;
  const double frac = static_cast<double>(exceed) / kSamples;
  o.require(frac <= 0.005, "exceedance");
  o.detail << "exceedance=" << frac << " <= 0.005 (chebyshev " << a.bound(0.01).value_or(NAN) << ")";
  return o;
}

Outcome c3_measurability() {
  Outcome o;
  const auto hit = measurability_check(iid(coin()), 2, 30, kSamples, kSeed, TorusPoint{});
  const auto control = measurability_check(iid(coin()), 2, 30, kSamples, kSeed, TorusPoint{}, pt(1, 4));
  o.require(hit.pass && hit.max_discrepancy <= 1e-9, "anchors 0 vs 1/2");
  o.require(!control.pass, "negative control");
  o.detail << "discrepancy=" << hit.max_discrepancy << " <= 1e-9 control=" << control.max_discrepancy << " (must fail)";
  return o;
}

Outcome exact_oracle() {
  Outcome o;
  const double bound = 3.0 * std::sqrt(8.0 / kSamples);
  double worst = 0.0;
  int runs = 0;
  for (const auto& name : builtin_names()) {
    const auto s = builtin_scenario(name);
    const auto q = common_cyclic_order(s.sequence, 12);
    if (!q || 8 % *q != 0) continue;
    for (std::int64_t a : {0, 3}) {
      const auto e = simulate({s.sequence, 12, anchors::Deterministic{pt(a, 8)}, kSamples, kSeed, 0});
      const auto exact = exact_state_law(s.sequence, 12, at(a, 8), 8);
      const double tv = total_variation(exact, empirical_cyclic_law(e.states_at(0), 8));
      worst = std::max(worst, tv);
      o.require(tv <= bound, name);
      ++runs;
    }
  }
  o.require(runs > 0, "no scenario on (1/8)Z");
  o.detail << "runs=" << runs << " max_tv=" << worst << " <= " << bound;
  return o;
}

TorusMeasure random_measure(std::mt19937_64& rng, int kind) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind) {
    case 0:
      return TorusMeasure::dirac(u(rng));
    case 1: {
      std::vector<Atom> atoms;
      const int n = 2 + static_cast<int>(rng() % 4);
      std::vector<double> w(n);
      double total = 0.0;
      for (auto& x : w) total += (x = 0.1 + u(rng));
      const auto offset = static_cast<std::int64_t>(rng() % 12);
      for (int i = 0; i < n; ++i) {
        // Even slots on distinct twelfths, odd slots at generic reals.
        const Location loc = i % 2 ? Location::real(u(rng)) : at((offset + 5 * i) % 12, 12);
        atoms.push_back({loc, w[i] / total});
      }
      return TorusMeasure::atoms(atoms);
    }
    case 2:
      return TorusMeasure::wrapped_gaussian(u(rng), 0.01 + 0.2 * u(rng));
    default:
      return TorusMeasure::uniform();
  }
}

Outcome convolution_theorem() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  // Supported pairs: atomic with atomic, Dirac with anything, WG with WG, Uniform with anything.
  const std::array<std::pair<int, int>, 10> kinds{{{1, 1}, {0, 1}, {2, 2}, {0, 2}, {3, 1}, {1, 0}, {2, 0}, {3, 2}, {1, 1}, {2, 2}}};
  double worst = 0.0;
  for (const auto& [ka, kb] : kinds) {
    auto a = random_measure(rng, ka);
    auto b = random_measure(rng, kb);
    const auto c = convolve(a, b);
    for (std::int64_t p = -10; p <= 10; ++p) {
      const double err = std::abs(fourier(c, p).value - fourier(a, p).value * fourier(b, p).value);
      worst = std::max(worst, err);
    }
  }
  o.require(worst <= 1e-10, "error");
  o.detail << "pairs=10 max_err=" << worst << " <= 1e-10";
  return o;
}

Outcome stromberg() {
  Outcome o;
  const auto irr = convolution_power(irrational_coin(), 10000, 10);
  std::int64_t slowest = 0;
  for (std::int64_t p = 1; p <= 10; ++p) {
    const auto n = irr.first_below(p, 1e-3);
    o.require(n.has_value(), "row " + std::to_string(p));
    if (n) slowest = std::max(slowest, *n);
  }
  o.require(irr.verdict == ConvolutionPowerTable::Verdict::ConvergesToHaar, "irrational verdict");
  const auto c = convolution_power(coin(), 10000, 10);
  bool constant = true;
  for (std::int64_t n = 1; n <= 10000; ++n) constant = constant && c.entry(2, n) == 1.0;
  o.require(constant, "coin row 2");
  o.require(c.verdict == ConvolutionPowerTable::Verdict::DoesNotConverge, "coin verdict");
  o.detail << "irrational rows below 1e-3 by n=" << slowest << ", coin row 2 exactly 1, verdicts "
           << to_string(irr.verdict) << "/" << to_string(c.verdict);
  return o;
}

Outcome skeleton_criterion() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto sk = skeleton({12, kSamples, kSeed, 0});
  const auto theta = sk.frac_eta_at(0);
  double max_ecf = 0.0;
  for (std::int64_t p = 1; p <= 5; ++p) max_ecf = std::max(max_ecf, std::abs(ecf(theta, p)));
  NoiseColumns noise;
  const std::vector<std::int64_t> pq{1, 2}, js{0, -3, -6};
  for (auto j : js) noise.emplace(j, sk.xi_at(j));
  const auto cross = independence(theta, noise, pq, pq, js);
  const double t = seconds_since(start);
  o.require(max_ecf <= 0.0127, "ECF");
  o.require(cross.max_modulus() <= 0.0127, "cross-characters");
  o.require(t < 10.0, "runtime");
  o.detail << "max_ecf=" << max_ecf << " max_cross=" << cross.max_modulus() << " <= 0.0127 time=" << t << "s";
  return o;
}

Outcome pathwise_algebra() {
  Outcome o;
  const std::vector<std::string> required{"pathwise_recursion", "pathwise_telescope", "noise_recovery",
                                          "translate_equals_shifted_anchor", "mixture_ecf_distance"};
  double worst_mixture = 0.0;
  for (const auto& name : builtin_names()) {
    const auto r = run_suite(builtin_scenario(name));
    for (const auto& want : required) {
      bool found = false;
      for (const auto& t : r.tests) {
        if (t.name != want) continue;
        found = true;
        o.require(t.pass, name + ":" + want);
        if (want == "mixture_ecf_distance") {
          o.require(t.threshold <= 2.0 * 4.0 / std::sqrt(static_cast<double>(r.samples)) + 1e-15,
                    name + ": mixture threshold");
          worst_mixture = std::max(worst_mixture, t.statistic / t.threshold);
        }
      }
      o.require(found, name + ":" + want + " missing");
    }
  }
  o.detail << "scenarios=" << builtin_names().size() << " worst mixture distance/threshold=" << worst_mixture;
  return o;
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return "<popen failed>";
  std::array<char, 4096> buf;
  while (const std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) == 2) out += "<cli error>";
  return out;
}

Outcome reproducibility(const std::string& cli) {
  Outcome o;
  int compared = 0;
  for (const auto& name : builtin_names()) {
    const std::string base = cli + " suite --builtin " + name + " --seed 42";
    const auto one = capture("TSIRELSON_WORKERS=1 " + base);
    const auto again = capture("TSIRELSON_WORKERS=1 " + base);
    const auto eight = capture("TSIRELSON_WORKERS=8 " + base);
    o.require(one.find("<cli error>") == std::string::npos && !one.empty(), name + " ran");
    o.require(one == again, name + " repeat");
    o.require(one == eight, name + " workers 1 vs 8");
    ++compared;
  }
  o.detail << "scenarios=" << compared << " byte-identical across repeats and workers 1 vs 8";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : TSIRELSON_CLI_PATH;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"trichotomy", trichotomy},
      {"c1_uniformity_independence", c1_uniformity_independence},
      {"c2_strong_limit_cauchy", c2_strong_limit},
      {"c3_measurability", c3_measurability},
      {"exact_oracle_tv", exact_oracle},
      {"convolution_theorem", convolution_theorem},
      {"stromberg_decay", stromberg},
      {"skeleton", skeleton_criterion},
      {"pathwise_algebra", pathwise_algebra},
      {"reproducibility", [&] { return reproducibility(cli); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
  }
  std::cout << (failures ? "FAIL" : "PASS") << " acceptance: " << (criteria.size() - failures) << "/" << criteria.size()
            << std::endl;
  return failures ? 1 : 0;
}
