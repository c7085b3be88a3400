#pragma once

// Seeded Monte Carlo for the recursion eta_k = xi_k + eta_{k-1} on [-N, 0].
//
// Every random draw is addressed by (seed, sample, lane), see random.hpp, so
// results are bit-identical for any worker count, and two runs that share a
// seed share their noise wherever their index windows overlap.

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tsirelson/classifier.hpp"
#include "tsirelson/measure.hpp"
#include "tsirelson/sequence.hpp"

namespace tsirelson {

namespace anchors {
struct Deterministic {
  TorusPoint v;
};
struct UniformLaw {};
struct Law {
  TorusMeasure mu;
};
}  // namespace anchors
using Anchor = std::variant<anchors::Deterministic, anchors::UniformLaw, anchors::Law>;

std::string describe(const Anchor& a);

// Worker count from TSIRELSON_WORKERS, else the hardware concurrency.
unsigned default_workers();

struct ChainConfig {
  MeasureSequence seq;
  std::int64_t depth = 30;  // simulate xi_{-N}..xi_0
  Anchor anchor = anchors::Deterministic{};
  std::int64_t samples = 100000;
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0: default_workers()
};

// Row-major n x width grid of torus points.
class TorusMatrix {
 public:
  TorusMatrix() = default;
  TorusMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  TorusPoint& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  TorusPoint at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const TorusPoint> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<TorusPoint> column(std::size_t c) const;

  friend bool operator==(const TorusMatrix&, const TorusMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<TorusPoint> data_;
};

class ChainEnsemble {
 public:
  ChainEnsemble(ChainConfig config, TorusMatrix noise, TorusMatrix states);

  const ChainConfig& config() const { return config_; }
  std::int64_t depth() const { return config_.depth; }
  std::size_t samples() const { return noise_.rows(); }

  // k in [-N, 0].
  TorusPoint noise(std::size_t i, std::int64_t k) const { return noise_.at(i, noise_column(k)); }
  // k in [-N-1, 0]; k = -N-1 is the anchor draw.
  TorusPoint state(std::size_t i, std::int64_t k) const { return states_.at(i, state_column(k)); }
  TorusPoint anchor_draw(std::size_t i) const { return states_.at(i, 0); }

  std::vector<TorusPoint> states_at(std::int64_t k) const { return states_.column(state_column(k)); }
  std::vector<TorusPoint> noise_at(std::int64_t k) const { return noise_.column(noise_column(k)); }

  const TorusMatrix& noise_matrix() const { return noise_; }
  const TorusMatrix& state_matrix() const { return states_; }

  // Adds g to every state, including the anchor draws; noise is untouched.
  ChainEnsemble translated(TorusPoint g) const;

 private:
  std::size_t noise_column(std::int64_t k) const;
  std::size_t state_column(std::int64_t k) const;

  ChainConfig config_;
  TorusMatrix noise_;   // columns: xi_{-N} .. xi_0
  TorusMatrix states_;  // columns: eta_{-N-1} .. eta_0
};

ChainEnsemble simulate(const ChainConfig& config);

inline ChainEnsemble translate(const ChainEnsemble& ensemble, TorusPoint g) { return ensemble.translated(g); }

struct PathwiseReport {
  bool recursion = true;       // eta_k == xi_k + eta_{k-1}, exactly
  bool telescope = true;       // eta_0 == anchor + sum xi, within 1e-9
  bool noise_recovery = true;  // eta_k - eta_{k-1} == xi_k, exactly
  double max_telescope_error = 0.0;

  bool all() const { return recursion && telescope && noise_recovery; }
};

PathwiseReport check_pathwise(const ChainEnsemble& ensemble);

struct MixturePair {
  ChainEnsemble anchored_by_law;  // simulate(anchor = Law(mu_V))
  ChainEnsemble mixed;            // v ~ mu_V, then a Deterministic(v) path
};

MixturePair mixture_check(const MeasureSequence& seq, const TorusMeasure& mu_v, std::int64_t depth,
                          std::int64_t samples, std::uint64_t seed, unsigned workers = 0);

struct StrongLimit {
  std::vector<TorusPoint> samples;
  std::int64_t truncation = 0;
  // Sum of variances of the discarded noise xi_j, j < -L, when known in
  // closed form.
  std::optional<double> tail_variance;

  // Chebyshev bound on P(|discarded displacement| > eps) for the real-line lift.
  std::optional<double> bound(double eps) const;
};

// Samples of frac(sum_{j=-L}^{0} xi_j + alpha_{-L} + g). alpha is the
// centering when the family has one, zero otherwise. Throws NotC2.
StrongLimit strong_limit(const MeasureSequence& seq, TorusPoint g, std::int64_t truncation, std::int64_t samples,
                         std::uint64_t seed, unsigned workers = 0, std::int64_t scan_bound = kDefaultScanBound);

struct CenteredProducts {
  std::vector<TorusPoint> samples;
  bool centered = false;  // false: no constructive centering, zero used
};

// Samples of frac(xi_k + ... + xi_l + centering(seq, l)), l < k <= 0.
CenteredProducts centered_products(const MeasureSequence& seq, std::int64_t k, std::int64_t l,
                                   std::int64_t samples, std::uint64_t seed, unsigned workers = 0);

class ConvolutionPowerTable {
 public:
  enum class Verdict { ConvergesToHaar, DoesNotConverge, Inconclusive };

  std::int64_t n_max = 0;
  std::int64_t p_max = 0;
  std::vector<double> modulus;         // |fourier(nu, p)|, index p-1
  std::vector<bool> unit_modulus;      // arithmetic_structure says |.| = 1
  std::vector<bool> strictly_less;     // certified |.| < 1
  Verdict verdict = Verdict::Inconclusive;

  // |fourier(nu, p)|^n
  double entry(std::int64_t p, std::int64_t n) const;
  // Smallest n <= n_max with entry < threshold, if any.
  std::optional<std::int64_t> first_below(std::int64_t p, double threshold) const;
};

const char* to_string(ConvolutionPowerTable::Verdict v);

ConvolutionPowerTable convolution_power(const TorusMeasure& nu, std::int64_t n_max, std::int64_t p_max);

// Tsirelson skeleton on the grid t_k = 2^k.
struct SkeletonConfig {
  std::int64_t depth = 12;  // K: {eta_{-K}} = 0, steps k = -K+1 .. 0
  std::int64_t samples = 100000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
};

double skeleton_time(std::int64_t k);
// Variance of xi_k = (B_{t_{k+1}} - B_{t_k}) / (t_{k+1} - t_k).
double skeleton_noise_variance(std::int64_t k);

class SkeletonEnsemble {
 public:
  SkeletonEnsemble(SkeletonConfig config, std::vector<double> increments, std::vector<double> xi,
                   TorusMatrix frac_eta);

  const SkeletonConfig& config() const { return config_; }
  std::size_t samples() const { return frac_eta_.rows(); }

  // k in [-K+1, 0].
  double increment(std::size_t i, std::int64_t k) const { return increments_[i * steps() + step(k)]; }
  double xi(std::size_t i, std::int64_t k) const { return xi_[i * steps() + step(k)]; }
  // {eta_k}, k in [-K, 0].
  TorusPoint frac_eta(std::size_t i, std::int64_t k) const;
  std::vector<TorusPoint> frac_eta_at(std::int64_t k) const;
  std::vector<TorusPoint> xi_at(std::int64_t k) const;

 private:
  std::size_t steps() const { return static_cast<std::size_t>(config_.depth); }
  std::size_t step(std::int64_t k) const;

  SkeletonConfig config_;
  std::vector<double> increments_;
  std::vector<double> xi_;
  TorusMatrix frac_eta_;
};

SkeletonEnsemble skeleton(const SkeletonConfig& config);

// Exact law of eta_0 on (1/q)Z when every mu_k over the window and the anchor
// lie on the grid. Throws NotSupportedOnCyclicGrid otherwise.
CyclicDistribution exact_state_law(const MeasureSequence& seq, std::int64_t depth, const Location& anchor,
                                   std::int64_t q);

// Smallest q <= max_order such that every mu_k for k in [-depth, 0] is atomic
// on (1/q)Z, or nullopt.
std::optional<std::int64_t> common_cyclic_order(const MeasureSequence& seq, std::int64_t depth,
                                                std::int64_t max_order = 1024);

}  // namespace tsirelson
