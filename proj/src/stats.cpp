#include "tsirelson/stats.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

constexpr double kMeasurabilityTolerance = 1e-9;
// 2^-40: points this close below a bucket edge count as on it. Grid values
// such as k/3 are rounded in fixed point and drift by a few ulps in sums.
constexpr std::uint64_t kEdgeSnap = std::uint64_t{1} << 24;

const std::vector<TorusPoint>& noise_column(const NoiseColumns& noise, std::int64_t j, std::size_t n) {
  const auto it = noise.find(j);
  if (it == noise.end()) throw ShapeMismatch("no noise samples at index " + std::to_string(j));
  if (it->second.size() != n) throw ShapeMismatch("noise at index " + std::to_string(j) + " has wrong length");
  return it->second;
}

double mean_modulus(std::span<const TorusPoint> theta, std::int64_t p,
                    const std::vector<std::pair<const std::vector<TorusPoint>*, std::int64_t>>& terms) {
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t i = 0; i < theta.size(); ++i) {
    TorusPoint x = theta[i].scaled(p);
    for (const auto& [column, q] : terms) x = x - (*column)[i].scaled(q);
    sum += character(x, 1);
  }
  return std::abs(sum / static_cast<double>(theta.size()));
}

}  // namespace

double ecf_threshold(std::size_t n) { return 4.0 / std::sqrt(static_cast<double>(n)); }

std::complex<double> ecf(std::span<const TorusPoint> samples, std::int64_t p) {
  if (samples.empty()) throw TooFewSamples("ecf of an empty sample");
  std::complex<double> sum{0.0, 0.0};
  for (const auto& x : samples) sum += character(x, p);
  return sum / static_cast<double>(samples.size());
}

double window_bias(const MeasureSequence& seq, std::int64_t from, std::int64_t to, std::int64_t p) {
  double product = 1.0;
  for (std::int64_t k = from; k <= to && product > 0.0; ++k) product *= std::abs(fourier(seq.measure_at(k), p).value);
  return std::min(product, 1.0);
}

double EcfReport::max_modulus() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.modulus);
  return m;
}

EcfReport uniformity(std::span<const TorusPoint> samples, std::int64_t p_max, double bias) {
  if (samples.size() < 100) throw TooFewSamples("uniformity needs n >= 100, got " + std::to_string(samples.size()));
  if (p_max < 1) throw InvalidArgument("uniformity needs p_max >= 1");
  EcfReport report;
  report.n = samples.size();
  report.bias = bias;
  report.threshold = ecf_threshold(report.n) + bias;
  for (std::int64_t p = 1; p <= p_max; ++p) {
    const auto mean = ecf(samples, p);
    const double modulus = std::abs(mean);
    const bool pass = modulus <= report.threshold;
    report.entries.push_back({p, mean, modulus, pass});
    report.pass = report.pass && pass;
  }
  return report;
}

double CrossCharReport::max_modulus() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.modulus);
  return m;
}

CrossCharReport independence(std::span<const TorusPoint> theta, const NoiseColumns& noise,
                             std::span<const std::int64_t> p_list, std::span<const std::int64_t> q_list,
                             std::span<const std::int64_t> j_list, double bias) {
  if (theta.empty()) throw TooFewSamples("independence of an empty sample");
  const double threshold = ecf_threshold(theta.size()) + bias;
  CrossCharReport report;
  for (auto j : j_list) {
    const auto& column = noise_column(noise, j, theta.size());
    for (auto p : p_list) {
      for (auto q : q_list) {
        const double modulus = mean_modulus(theta, p, {{&column, q}});
        const bool pass = modulus <= threshold;
        report.entries.push_back({p, q, j, modulus, threshold, pass});
        report.pass = report.pass && pass;
      }
    }
  }
  return report;
}

JointCharReport joint_independence(std::span<const TorusPoint> theta, const NoiseColumns& noise,
                                   std::span<const std::int64_t> p_list, std::span<const std::int64_t> j_list,
                                   std::int64_t max_order, double bias) {
  if (theta.empty()) throw TooFewSamples("joint independence of an empty sample");
  const double threshold = ecf_threshold(theta.size()) + bias;
  JointCharReport report;
  const std::size_t m = j_list.size();
  // All subsets of j_list with 2..max_order elements, unit frequencies.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    const auto order = std::popcount(mask);
    if (order < 2 || order > max_order) continue;
    std::vector<JointTerm> terms;
    std::vector<std::pair<const std::vector<TorusPoint>*, std::int64_t>> columns;
    for (std::size_t b = 0; b < m; ++b) {
      if (!(mask >> b & 1u)) continue;
      terms.push_back({j_list[b], 1});
      columns.emplace_back(&noise_column(noise, j_list[b], theta.size()), 1);
    }
    for (auto p : p_list) {
      const double modulus = mean_modulus(theta, p, columns);
      const bool pass = modulus <= threshold;
      report.entries.push_back({p, terms, modulus, threshold, pass});
      report.pass = report.pass && pass;
    }
  }
  return report;
}

BucketReport bucket_uniformity(std::span<const TorusPoint> samples, std::int64_t p) {
  if (p < 2) throw InvalidArgument("bucket_uniformity needs p >= 2");
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(100 * p)) {
    throw TooFewSamples("bucket_uniformity needs n >= 100 p, got " + std::to_string(n));
  }
  BucketReport report;
  report.p = p;
  report.counts.assign(static_cast<std::size_t>(p), 0);
  for (const auto& x : samples) {
    const auto bucket = static_cast<std::size_t>(
        ((static_cast<unsigned __int128>(x.raw() + kEdgeSnap) * static_cast<std::uint64_t>(p)) >> 64));
    ++report.counts[bucket];
  }
  const double expected = static_cast<double>(n) / static_cast<double>(p);
  for (auto c : report.counts) {
    const double d = static_cast<double>(c) - expected;
    report.chi_square += d * d / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(p - 1));
  report.critical_value = boost::math::quantile(boost::math::complement(dist, 1e-3));
  report.pass = report.chi_square <= report.critical_value;
  return report;
}

MeasurabilityReport measurability_check(const MeasureSequence& seq, std::int64_t p, std::int64_t depth,
                                        std::int64_t samples, std::uint64_t seed, TorusPoint v,
                                        std::optional<TorusPoint> shift, unsigned workers, std::int64_t scan_bound) {
  const auto verdict = classify(seq, scan_bound);
  if (verdict.which != TrichotomyResult::Case::C3 || verdict.p != p) {
    throw NotC3("measurability check at p = " + std::to_string(p) + " needs C3(" + std::to_string(p) +
                "), classified " + verdict.label());
  }
  MeasurabilityReport report;
  report.p = p;
  report.anchor = v;
  report.shifted_anchor = v + shift.value_or(TorusPoint::from_rational(Rational(1, p)));

  ChainConfig config{seq, depth, anchors::Deterministic{report.anchor}, samples, seed, workers};
  const ChainEnsemble a = simulate(config);
  config.anchor = anchors::Deterministic{report.shifted_anchor};
  const ChainEnsemble b = simulate(config);

  for (std::size_t i = 0; i < a.samples(); ++i) {
    for (std::int64_t k = -depth - 1; k <= 0; ++k) {
      const double d = circular_distance(a.state(i, k).scaled(p), b.state(i, k).scaled(p));
      report.max_discrepancy = std::max(report.max_discrepancy, d);
    }
  }
  report.pass = report.max_discrepancy <= kMeasurabilityTolerance;
  return report;
}

double two_sample_ecf_distance(std::span<const TorusPoint> a, std::span<const TorusPoint> b, std::int64_t p_max) {
  double distance = 0.0;
  for (std::int64_t p = 1; p <= p_max; ++p) distance = std::max(distance, std::abs(ecf(a, p) - ecf(b, p)));
  return distance;
}

CyclicDistribution empirical_cyclic_law(std::span<const TorusPoint> samples, std::int64_t q) {
  if (samples.empty()) throw TooFewSamples("empirical law of an empty sample");
  if (q < 1) throw InvalidArgument("cyclic order must be positive");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(q), 0);
  const auto half_cell = static_cast<unsigned __int128>(1) << 63;
  for (const auto& x : samples) {
    // round(q x) mod q
    const auto scaled = static_cast<unsigned __int128>(x.raw()) * static_cast<std::uint64_t>(q) + half_cell;
    ++counts[static_cast<std::size_t>(scaled >> 64) % static_cast<std::size_t>(q)];
  }
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    weights[i] = static_cast<double>(counts[i]) / static_cast<double>(samples.size());
  }
  // Renormalize so the weights sum to 1 within rounding.
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return CyclicDistribution(std::move(weights));
}

NonInterchangeWitness non_interchange_witness(const ChainEnsemble& e, std::span<const std::int64_t> j_list,
                                              double bias) {
  NonInterchangeWitness witness;
  const std::int64_t depth = e.depth();
  for (std::size_t i = 0; i < e.samples() && witness.pathwise_determinism; ++i) {
    // eta_0 = eta_j + sum_{j < k <= 0} xi_k, for every j in the window.
    TorusPoint forward = e.state(i, 0);
    for (std::int64_t j = 0; j >= -depth - 1; --j) {
      if (e.state(i, j) != forward) {
        witness.pathwise_determinism = false;
        break;
      }
      if (j >= -depth) forward = forward - e.noise(i, j);
    }
  }
  NoiseColumns noise;
  for (auto j : j_list) noise.emplace(j, e.noise_at(j));
  const std::vector<std::int64_t> freqs{1, 2};
  const auto theta = e.states_at(0);
  witness.independence = independence(theta, noise, freqs, freqs, j_list, bias);
  return witness;
}

}  // namespace tsirelson
