#pragma once

// Pass/fail statistics on torus samples built on empirical characteristic
// functions. Every report is a pure function of its inputs.
//
// Threshold: under uniformity the ECF mean (1/n) sum e(p theta_i) is
// asymptotically complex Gaussian with total variance 1/n, so
// P(|ECF| > 4/sqrt(n)) ~ exp(-16) per frequency.

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tsirelson/measure.hpp"
#include "tsirelson/sequence.hpp"
#include "tsirelson/simulator.hpp"

namespace tsirelson {

double ecf_threshold(std::size_t n);
std::complex<double> ecf(std::span<const TorusPoint> samples, std::int64_t p);

// prod_{k=from}^{to} |fourier(mu_k, p)|: the modulus of the ECF of eta_to for
// a chain started deterministically just before `from`.
double window_bias(const MeasureSequence& seq, std::int64_t from, std::int64_t to, std::int64_t p);

struct EcfEntry {
  std::int64_t p;
  std::complex<double> mean;
  double modulus;
  bool pass;
};

struct EcfReport {
  std::size_t n = 0;
  double threshold = 0.0;  // 4/sqrt(n) + bias
  double bias = 0.0;
  std::vector<EcfEntry> entries;
  bool pass = true;

  double max_modulus() const;
};

// Throws TooFewSamples for n < 100.
EcfReport uniformity(std::span<const TorusPoint> samples, std::int64_t p_max, double bias = 0.0);

struct CrossCharEntry {
  std::int64_t p, q, j;
  double modulus;
  double threshold;
  bool pass;
};

struct CrossCharReport {
  std::vector<CrossCharEntry> entries;
  bool pass = true;

  double max_modulus() const;
};

using NoiseColumns = std::map<std::int64_t, std::vector<TorusPoint>>;

// |(1/n) sum e(p theta_i - q xi_{j,i})| for every (p, q, j). Throws
// ShapeMismatch on misaligned inputs.
CrossCharReport independence(std::span<const TorusPoint> theta, const NoiseColumns& noise,
                             std::span<const std::int64_t> p_list, std::span<const std::int64_t> q_list,
                             std::span<const std::int64_t> j_list, double bias = 0.0);

// Joint characters e(p theta - sum_m q_m xi_{j_m}) over up to three noise
// indices at a time; a strictly stronger (still partial) independence probe.
struct JointTerm {
  std::int64_t j;
  std::int64_t q;
};
struct JointCharEntry {
  std::int64_t p;
  std::vector<JointTerm> terms;
  double modulus;
  double threshold;
  bool pass;
};
struct JointCharReport {
  std::vector<JointCharEntry> entries;
  bool pass = true;
};
JointCharReport joint_independence(std::span<const TorusPoint> theta, const NoiseColumns& noise,
                                   std::span<const std::int64_t> p_list, std::span<const std::int64_t> j_list,
                                   std::int64_t max_order = 3, double bias = 0.0);

struct BucketReport {
  std::int64_t p = 0;
  std::vector<std::int64_t> counts;
  double chi_square = 0.0;
  double critical_value = 0.0;  // at significance 1e-3, p-1 degrees of freedom
  bool pass = false;
};

// Chi-square test of floor(p theta) against uniform on {0..p-1}. Needs p >= 2
// and n >= 100 p.
BucketReport bucket_uniformity(std::span<const TorusPoint> samples, std::int64_t p);

struct MeasurabilityReport {
  std::int64_t p = 0;
  TorusPoint anchor;
  TorusPoint shifted_anchor;
  double max_discrepancy = 0.0;  // over all k and samples
  bool pass = false;             // max_discrepancy <= 1e-9
};

// Runs two chains sharing a seed, anchored at v and v + shift, and compares
// frac(p eta_k). shift defaults to 1/p. Throws NotC3 unless classify gives C3(p).
MeasurabilityReport measurability_check(const MeasureSequence& seq, std::int64_t p, std::int64_t depth,
                                        std::int64_t samples, std::uint64_t seed, TorusPoint v,
                                        std::optional<TorusPoint> shift = std::nullopt, unsigned workers = 0,
                                        std::int64_t scan_bound = kDefaultScanBound);

double two_sample_ecf_distance(std::span<const TorusPoint> a, std::span<const TorusPoint> b, std::int64_t p_max);

// Empirical law on (1/q)Z, each sample rounded to the nearest grid point.
CyclicDistribution empirical_cyclic_law(std::span<const TorusPoint> samples, std::int64_t q);

// In the uniqueness regime: eta_0 is a function of (eta_j, xi_{j+1..0}) for
// every j (pathwise determinism), and yet eta_0 is independent of the noise.
struct NonInterchangeWitness {
  bool pathwise_determinism = true;
  CrossCharReport independence;

  bool holds() const { return pathwise_determinism && independence.pass; }
};

NonInterchangeWitness non_interchange_witness(const ChainEnsemble& ensemble, std::span<const std::int64_t> j_list,
                                              double bias = 0.0);

}  // namespace tsirelson
