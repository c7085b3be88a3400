#include "tsirelson/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

unsigned resolve_workers(unsigned requested) { return requested > 0 ? requested : default_workers(); }

// Runs body(begin, end) over contiguous chunks of [0, n). Each sample's draws
// depend only on its index, so the split never changes results.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t, std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back(body, begin, end);
  }
  for (auto& t : threads) t.join();
}

void require_positive(std::int64_t value, const char* what) {
  if (value < 1) throw InvalidArgument(std::string(what) + " must be >= 1");
}

std::vector<TorusMeasure> window(const MeasureSequence& seq, std::int64_t from, std::int64_t to) {
  std::vector<TorusMeasure> out;
  out.reserve(static_cast<std::size_t>(to - from + 1));
  for (std::int64_t k = from; k <= to; ++k) out.push_back(seq.measure_at(k));
  return out;
}

TorusPoint draw_anchor(const Anchor& a, std::uint64_t seed, std::size_t i) {
  return std::visit(Overloaded{
                        [](const anchors::Deterministic& d) { return d.v; },
                        [&](const anchors::UniformLaw&) {
                          Stream rng(seed, i, lanes::kAnchor);
                          return TorusPoint::from_raw(rng.next_u64());
                        },
                        [&](const anchors::Law& l) {
                          Stream rng(seed, i, lanes::kAnchor);
                          return sample(l.mu, rng);
                        },
                    },
                    a);
}

// Fills one path: states row gets eta_{-N-1} = start, then the recursion.
void run_path(const std::vector<TorusMeasure>& laws, std::int64_t depth, std::uint64_t seed, std::size_t i,
              TorusPoint start, TorusMatrix& noise, TorusMatrix& states) {
  TorusPoint eta = start;
  states.at(i, 0) = eta;
  for (std::int64_t k = -depth; k <= 0; ++k) {
    const auto column = static_cast<std::size_t>(k + depth);
    Stream rng(seed, i, lanes::noise(k));
    const TorusPoint xi = sample(laws[column], rng);
    eta = xi + eta;
    noise.at(i, column) = xi;
    states.at(i, column + 1) = eta;
  }
}

TorusPoint noise_sum(const std::vector<TorusMeasure>& laws, std::int64_t from, std::uint64_t seed, std::size_t i) {
  TorusPoint sum{};
  for (std::int64_t k = from; k <= 0; ++k) {
    Stream rng(seed, i, lanes::noise(k));
    sum += sample(laws[static_cast<std::size_t>(k - from)], rng);
  }
  return sum;
}

std::optional<double> variance_of(const TorusMeasure& mu) {
  if (mu.as<Dirac>()) return 0.0;
  if (const auto* a = mu.as<Atoms>(); a && a->atoms.size() == 1) return 0.0;
  if (const auto* g = mu.as<WrappedGaussian>()) return g->variance;
  return std::nullopt;
}

// Denominator of the smallest grid (1/q)Z containing x, if it is exact.
std::optional<std::int64_t> grid_denominator(const Location& x) {
  if (x.exact) return x.exact->den();
  if (x.point.raw() == 0) return 1;
  const int zeros = std::countr_zero(x.point.raw());
  if (zeros < 44) return std::nullopt;  // finer than 2^-20 is not a practical grid
  return std::int64_t{1} << (64 - zeros);
}

}  // namespace

unsigned default_workers() {
  if (const char* env = std::getenv("TSIRELSON_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string describe(const Anchor& a) {
  return std::visit(Overloaded{
                        [](const anchors::Deterministic& d) {
                          std::ostringstream os;
                          os.precision(17);
                          os << "det:" << d.v.value();
                          return os.str();
                        },
                        [](const anchors::UniformLaw&) { return std::string("uniform"); },
                        [](const anchors::Law& l) { return "law:" + l.mu.describe(); },
                    },
                    a);
}

std::vector<TorusPoint> TorusMatrix::column(std::size_t c) const {
  std::vector<TorusPoint> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

ChainEnsemble::ChainEnsemble(ChainConfig config, TorusMatrix noise, TorusMatrix states)
    : config_(std::move(config)), noise_(std::move(noise)), states_(std::move(states)) {
  const auto width = static_cast<std::size_t>(config_.depth + 1);
  if (noise_.cols() != width || states_.cols() != width + 1 || noise_.rows() != states_.rows()) {
    throw ShapeMismatch("chain ensemble: noise/state shapes do not match the depth");
  }
}

std::size_t ChainEnsemble::noise_column(std::int64_t k) const {
  if (k > 0 || k < -config_.depth) throw IndexOutOfDomain("noise index " + std::to_string(k) + " outside window");
  return static_cast<std::size_t>(k + config_.depth);
}

std::size_t ChainEnsemble::state_column(std::int64_t k) const {
  if (k > 0 || k < -config_.depth - 1) {
    throw IndexOutOfDomain("state index " + std::to_string(k) + " outside window");
  }
  return static_cast<std::size_t>(k + config_.depth + 1);
}

ChainEnsemble ChainEnsemble::translated(TorusPoint g) const {
  ChainConfig config = config_;
  config.anchor = std::visit(Overloaded{
                                 [&](const anchors::Deterministic& d) -> Anchor { return anchors::Deterministic{d.v + g}; },
                                 [](const anchors::UniformLaw& u) -> Anchor { return u; },
                                 [&](const anchors::Law& l) -> Anchor {
                                   return anchors::Law{convolve(l.mu, TorusMeasure::dirac(Location{g, std::nullopt}))};
                                 },
                             },
                             config_.anchor);
  TorusMatrix states = states_;
  for (std::size_t i = 0; i < states.rows(); ++i) {
    for (std::size_t c = 0; c < states.cols(); ++c) states.at(i, c) += g;
  }
  return ChainEnsemble(std::move(config), noise_, std::move(states));
}

ChainEnsemble simulate(const ChainConfig& config) {
  require_positive(config.depth, "depth");
  require_positive(config.samples, "samples");
  const auto n = static_cast<std::size_t>(config.samples);
  const auto laws = window(config.seq, -config.depth, 0);
  TorusMatrix noise(n, static_cast<std::size_t>(config.depth + 1));
  TorusMatrix states(n, static_cast<std::size_t>(config.depth + 2));
  parallel_for(n, resolve_workers(config.workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      run_path(laws, config.depth, config.seed, i, draw_anchor(config.anchor, config.seed, i), noise, states);
    }
  });
  return ChainEnsemble(config, std::move(noise), std::move(states));
}

PathwiseReport check_pathwise(const ChainEnsemble& e) {
  PathwiseReport report;
  const std::int64_t depth = e.depth();
  for (std::size_t i = 0; i < e.samples(); ++i) {
    TorusPoint telescope = e.anchor_draw(i);
    for (std::int64_t k = -depth; k <= 0; ++k) {
      const TorusPoint xi = e.noise(i, k);
      const TorusPoint prev = e.state(i, k - 1);
      const TorusPoint cur = e.state(i, k);
      if (cur != xi + prev) report.recursion = false;
      if (cur - prev != xi) report.noise_recovery = false;
      telescope += xi;
    }
    const double err = circular_distance(telescope, e.state(i, 0));
    report.max_telescope_error = std::max(report.max_telescope_error, err);
  }
  report.telescope = report.max_telescope_error <= 1e-9;
  return report;
}

MixturePair mixture_check(const MeasureSequence& seq, const TorusMeasure& mu_v, std::int64_t depth,
                          std::int64_t samples, std::uint64_t seed, unsigned workers) {
  ChainConfig config{seq, depth, anchors::Law{mu_v}, samples, seed, workers};
  ChainEnsemble by_law = simulate(config);

  // Same law, assembled as a mixture of deterministic-anchor paths driven by
  // an independent seed.
  require_positive(depth, "depth");
  require_positive(samples, "samples");
  const std::uint64_t mixed_seed = mix_seed(seed, 1);
  const auto n = static_cast<std::size_t>(samples);
  const auto laws = window(seq, -depth, 0);
  TorusMatrix noise(n, static_cast<std::size_t>(depth + 1));
  TorusMatrix states(n, static_cast<std::size_t>(depth + 2));
  parallel_for(n, resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream pick(mixed_seed, i, lanes::kMixture);
      const TorusPoint v = sample(mu_v, pick);
      run_path(laws, depth, mixed_seed, i, draw_anchor(anchors::Deterministic{v}, mixed_seed, i), noise, states);
    }
  });
  ChainConfig mixed_config = config;
  mixed_config.seed = mixed_seed;
  return {std::move(by_law), ChainEnsemble(std::move(mixed_config), std::move(noise), std::move(states))};
}

std::optional<double> StrongLimit::bound(double eps) const {
  if (!tail_variance) return std::nullopt;
  if (!(eps > 0.0)) throw InvalidArgument("strong limit bound needs eps > 0");
  return std::min(1.0, *tail_variance / (eps * eps));
}

StrongLimit strong_limit(const MeasureSequence& seq, TorusPoint g, std::int64_t truncation, std::int64_t samples,
                         std::uint64_t seed, unsigned workers, std::int64_t scan_bound) {
  require_positive(samples, "samples");
  if (truncation < 0) throw InvalidArgument("truncation must be >= 0");
  const auto verdict = classify(seq, scan_bound);
  if (verdict.which != TrichotomyResult::Case::C2) {
    throw NotC2("strong_limit needs a C2 sequence, classified " + verdict.label());
  }
  const TorusPoint alpha = verdict.centering ? verdict.centering->at(-truncation) : TorusPoint{};
  const auto laws = window(seq, -truncation, 0);

  StrongLimit out;
  out.truncation = truncation;
  out.samples.resize(static_cast<std::size_t>(samples));
  parallel_for(out.samples.size(), resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.samples[i] = noise_sum(laws, -truncation, seed, i) + alpha + g;
  });

  // Discarded indices j < -L: explicit prefix entries, then the tail rule.
  double discarded = 0.0;
  bool known = true;
  for (std::int64_t j = -truncation - 1; j > seq.tail_start() - 1 && known; --j) {
    const auto v = variance_of(seq.measure_at(j));
    if (v) {
      discarded += *v;
    } else {
      known = false;
    }
  }
  if (known) {
    const std::int64_t first_tail = std::min(-truncation - 1, seq.tail_start());
    std::visit(Overloaded{
                   [&](const IidTail& iid) {
                     const auto v = variance_of(iid.law);
                     if (!v) {
                       known = false;
                     } else if (*v > 0.0) {
                       discarded = std::numeric_limits<double>::infinity();
                     }
                   },
                   [&](const WrappedGaussianTail& wg) { discarded += variance_tail_sum(wg.variances, first_tail); },
                   [&](const ScaledDensityTail&) { known = false; },
               },
               seq.tail().variant());
  }
  if (known) out.tail_variance = discarded;
  return out;
}

CenteredProducts centered_products(const MeasureSequence& seq, std::int64_t k, std::int64_t l, std::int64_t samples,
                                   std::uint64_t seed, unsigned workers) {
  require_positive(samples, "samples");
  if (k > 0 || l >= k) throw InvalidArgument("centered_products needs l < k <= 0");
  CenteredProducts out;
  TorusPoint alpha{};
  try {
    alpha = centering(seq, l);
    out.centered = true;
  } catch (const NoConstructiveCentering&) {
    out.centered = false;
  }
  const auto laws = window(seq, l, k);
  out.samples.resize(static_cast<std::size_t>(samples));
  parallel_for(out.samples.size(), resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TorusPoint sum = alpha;
      for (std::int64_t j = l; j <= k; ++j) {
        Stream rng(seed, i, lanes::noise(j));
        sum += sample(laws[static_cast<std::size_t>(j - l)], rng);
      }
      out.samples[i] = sum;
    }
  });
  return out;
}

double ConvolutionPowerTable::entry(std::int64_t p, std::int64_t n) const {
  if (p < 1 || p > p_max || n < 1 || n > n_max) throw IndexOutOfDomain("convolution power entry out of range");
  return std::pow(modulus[static_cast<std::size_t>(p - 1)], static_cast<double>(n));
}

std::optional<std::int64_t> ConvolutionPowerTable::first_below(std::int64_t p, double threshold) const {
  const double m = modulus.at(static_cast<std::size_t>(p - 1));
  if (m < threshold) return 1;
  if (m >= 1.0 || m <= 0.0) return m <= 0.0 ? std::optional<std::int64_t>(1) : std::nullopt;
  const auto n = static_cast<std::int64_t>(std::ceil(std::log(threshold) / std::log(m)));
  // Guard the boundary against rounding in the logarithms.
  std::int64_t candidate = std::max<std::int64_t>(1, n - 1);
  while (candidate <= n_max && std::pow(m, static_cast<double>(candidate)) >= threshold) ++candidate;
  if (candidate > n_max) return std::nullopt;
  return candidate;
}

const char* to_string(ConvolutionPowerTable::Verdict v) {
  switch (v) {
    case ConvolutionPowerTable::Verdict::ConvergesToHaar:
      return "converges_to_haar";
    case ConvolutionPowerTable::Verdict::DoesNotConverge:
      return "does_not_converge";
    case ConvolutionPowerTable::Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

ConvolutionPowerTable convolution_power(const TorusMeasure& nu, std::int64_t n_max, std::int64_t p_max) {
  require_positive(n_max, "n_max");
  require_positive(p_max, "p_max");
  ConvolutionPowerTable table;
  table.n_max = n_max;
  table.p_max = p_max;
  bool all_decay = true;
  bool some_unit = false;
  for (std::int64_t p = 1; p <= p_max; ++p) {
    const auto structure = arithmetic_structure(nu, p);
    const double m = std::min(1.0, std::abs(fourier(nu, p).value));
    table.modulus.push_back(structure.modulus_one() ? 1.0 : m);
    table.unit_modulus.push_back(structure.modulus_one());
    table.strictly_less.push_back(!structure.modulus_one() && structure.exact);
    some_unit = some_unit || structure.modulus_one();
    const bool decays = table.strictly_less.back() || table.first_below(p, 1e-6).has_value();
    all_decay = all_decay && decays;
  }
  if (some_unit) {
    table.verdict = ConvolutionPowerTable::Verdict::DoesNotConverge;
  } else if (all_decay) {
    table.verdict = ConvolutionPowerTable::Verdict::ConvergesToHaar;
  }
  return table;
}

double skeleton_time(std::int64_t k) { return std::ldexp(1.0, static_cast<int>(k)); }

double skeleton_noise_variance(std::int64_t k) { return 1.0 / (skeleton_time(k + 1) - skeleton_time(k)); }

SkeletonEnsemble::SkeletonEnsemble(SkeletonConfig config, std::vector<double> increments, std::vector<double> xi,
                                   TorusMatrix frac_eta)
    : config_(config), increments_(std::move(increments)), xi_(std::move(xi)), frac_eta_(std::move(frac_eta)) {}

std::size_t SkeletonEnsemble::step(std::int64_t k) const {
  if (k > 0 || k < -config_.depth + 1) throw IndexOutOfDomain("skeleton step " + std::to_string(k) + " outside grid");
  return static_cast<std::size_t>(k + config_.depth - 1);
}

TorusPoint SkeletonEnsemble::frac_eta(std::size_t i, std::int64_t k) const {
  if (k > 0 || k < -config_.depth) throw IndexOutOfDomain("skeleton state " + std::to_string(k) + " outside grid");
  return frac_eta_.at(i, static_cast<std::size_t>(k + config_.depth));
}

std::vector<TorusPoint> SkeletonEnsemble::frac_eta_at(std::int64_t k) const {
  std::vector<TorusPoint> out(samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = frac_eta(i, k);
  return out;
}

std::vector<TorusPoint> SkeletonEnsemble::xi_at(std::int64_t k) const {
  std::vector<TorusPoint> out(samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = TorusPoint::from_real(xi(i, k));
  return out;
}

SkeletonEnsemble skeleton(const SkeletonConfig& config) {
  if (config.depth < 2) throw InvalidArgument("skeleton depth K must be >= 2");
  require_positive(config.samples, "samples");
  const auto n = static_cast<std::size_t>(config.samples);
  const auto steps = static_cast<std::size_t>(config.depth);
  std::vector<double> increments(n * steps);
  std::vector<double> xi(n * steps);
  TorusMatrix frac_eta(n, steps + 1);
  parallel_for(n, resolve_workers(config.workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TorusPoint state{};  // {eta_{-K}} = 0
      frac_eta.at(i, 0) = state;
      for (std::int64_t k = -config.depth + 1; k <= 0; ++k) {
        const auto s = static_cast<std::size_t>(k + config.depth - 1);
        const double dt = skeleton_time(k + 1) - skeleton_time(k);
        Stream rng(config.seed, i, lanes::noise(k));
        const double db = std::sqrt(dt) * rng.normal();
        increments[i * steps + s] = db;
        xi[i * steps + s] = db / dt;
        // {eta_k} = {xi_k + {eta_{k-1}}}
        state = TorusPoint::from_real(xi[i * steps + s]) + state;
        frac_eta.at(i, s + 1) = state;
      }
    }
  });
  return SkeletonEnsemble(config, std::move(increments), std::move(xi), std::move(frac_eta));
}

CyclicDistribution exact_state_law(const MeasureSequence& seq, std::int64_t depth, const Location& anchor,
                                   std::int64_t q) {
  require_positive(depth, "depth");
  const auto start = cyclic_index(anchor, q);
  if (!start) throw NotSupportedOnCyclicGrid("anchor is not on the (1/" + std::to_string(q) + ")Z grid");
  CyclicDistribution law = CyclicDistribution::delta(static_cast<std::size_t>(q), *start);
  for (std::int64_t k = -depth; k <= 0; ++k) law = cyclic_convolve(law, to_cyclic(seq.measure_at(k), q));
  return law;
}

std::optional<std::int64_t> common_cyclic_order(const MeasureSequence& seq, std::int64_t depth,
                                                std::int64_t max_order) {
  std::int64_t q = 1;
  for (std::int64_t k = -depth; k <= 0; ++k) {
    const TorusMeasure mu = seq.measure_at(k);
    std::vector<Location> support;
    if (const auto* d = mu.as<Dirac>()) {
      support.push_back(d->at);
    } else if (const auto* a = mu.as<Atoms>()) {
      for (const auto& atom : a->atoms) support.push_back(atom.location);
    } else {
      return std::nullopt;
    }
    for (const auto& x : support) {
      const auto den = grid_denominator(x);
      if (!den) return std::nullopt;
      q = std::lcm(q, *den);
      if (q > max_order) return std::nullopt;
    }
  }
  return q;
}

}  // namespace tsirelson
