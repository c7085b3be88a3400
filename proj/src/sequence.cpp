#include "tsirelson/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroFactor = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// sum_{n >= m} n^{-s} for s > 1, m >= 1.
// sum_{n >= m} n^{-s} for s > 1: terms below 64 are summed directly, smallest
// first, and the rest by Euler-Maclaurin through B_10 (error below 64^{-s-11}).
double zeta_tail(double s, std::int64_t m) {
  constexpr std::int64_t kDirect = 64;
  const std::int64_t start = std::max(m, kDirect);
  double head = 0.0;
  for (std::int64_t n = start - 1; n >= m; --n) head += std::pow(static_cast<double>(n), -s);
  const double x = static_cast<double>(start);
  // B_2k / (2k)!
  constexpr double kBernoulli[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0};
  double tail = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  double rising = s;  // s (s+1) ... (s+2k-2)
  for (int k = 1; k <= 5; ++k) {
    tail += kBernoulli[k - 1] * rising * std::pow(x, -s - 2.0 * k + 1.0);
    rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
  }
  return head + tail;
}

double geometric_term(const variances::Geometric& g, std::int64_t j) {
  return g.c * std::pow(g.r, static_cast<double>(-j));
}

}  // namespace

TailRule TailRule::wrapped_gaussian(MeanRule means, VarianceRule variances) {
  std::visit(Overloaded{
                 [](const variances::Geometric& g) {
                   if (!(g.c > 0.0) || !(g.r > 0.0 && g.r < 1.0)) {
                     throw ValidationError("geometric variances need c > 0 and 0 < r < 1");
                   }
                 },
                 [](const variances::PowerLaw& pl) {
                   if (!(pl.c > 0.0) || !(pl.s > 0.0)) throw ValidationError("power-law variances need c > 0, s > 0");
                 },
                 [](const variances::Constant& c) {
                   if (!(c.c > 0.0)) throw ValidationError("constant variance needs c > 0");
                 },
             },
             variances);
  std::visit(Overloaded{
                 [](const means::Zero&) {},
                 [](const auto& m) {
                   if (!std::isfinite(m.m)) throw ValidationError("mean rule needs a finite m");
                 },
             },
             means);
  return TailRule(WrappedGaussianTail{means, variances});
}

TailRule TailRule::scaled_density(TorusMeasure density) {
  if (!density.as<PiecewiseDensity>()) {
    throw ValidationError("scaled_density tail needs a piecewise density, got " + density.describe());
  }
  return TailRule(ScaledDensityTail{std::move(density)});
}

double mean_at(const MeanRule& rule, std::int64_t j) {
  return std::visit(Overloaded{
                        [](const means::Zero&) { return 0.0; },
                        [](const means::Constant& c) { return c.m; },
                        [&](const means::Alternating& a) { return (j % 2 == 0) ? a.m : -a.m; },
                    },
                    rule);
}

double variance_at(const VarianceRule& rule, std::int64_t j) {
  return std::visit(Overloaded{
                        [&](const variances::Geometric& g) { return geometric_term(g, j); },
                        [&](const variances::PowerLaw& pl) {
                          const double n = static_cast<double>(std::max<std::int64_t>(1, -j));
                          return pl.c / std::pow(n, pl.s);
                        },
                        [](const variances::Constant& c) { return c.c; },
                    },
                    rule);
}

bool variances_summable(const VarianceRule& rule) {
  return std::visit(Overloaded{
                        [](const variances::Geometric&) { return true; },
                        [](const variances::PowerLaw& pl) { return pl.s > 1.0; },
                        [](const variances::Constant&) { return false; },
                    },
                    rule);
}

double variance_tail_sum(const VarianceRule& rule, std::int64_t first) {
  if (first > 0) throw IndexOutOfDomain("variance_tail_sum: first index must be <= 0");
  if (!variances_summable(rule)) return kInf;
  return std::visit(Overloaded{
                        [&](const variances::Geometric& g) { return geometric_term(g, first) / (1.0 - g.r); },
                        [&](const variances::PowerLaw& pl) {
                          double sum = 0.0;
                          std::int64_t m = -first;
                          if (m == 0) {
                            sum += pl.c;  // j = 0 term
                            m = 1;
                          }
                          return sum + pl.c * zeta_tail(pl.s, m);
                        },
                        [](const variances::Constant&) { return kInf; },
                    },
                    rule);
}

TorusMeasure scaled_pushforward(const PiecewiseDensity& density, std::int64_t k) {
  if (k == 0) return TorusMeasure::dirac(Rational(0, 1));
  const std::int64_t n = k < 0 ? -k : k;
  const double kd = static_cast<double>(n);

  std::vector<double> cuts{0.0, 1.0};
  for (double b : density.breaks) {
    const double y = kd * b - std::floor(kd * b);
    if (y > 0.0 && y < 1.0) cuts.push_back(y);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-15; }), cuts.end());
  cuts.back() = 1.0;

  // g(y) = (1/n) sum_m f((y + m)/n): count the m landing in each original piece.
  std::vector<double> values;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double y = 0.5 * (cuts[c] + cuts[c + 1]);
    double g = 0.0;
    for (std::size_t i = 0; i < density.densities.size(); ++i) {
      const double count =
          std::ceil(kd * density.breaks[i + 1] - y) - std::ceil(kd * density.breaks[i] - y);
      g += density.densities[i] * count;
    }
    values.push_back(g / kd);
  }

  // Renormalize away the rounding in the cut positions.
  double mass = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) mass += values[c] * (cuts[c + 1] - cuts[c]);
  for (double& v : values) v /= mass;

  if (k < 0) {
    // frac(-x) reflects the circle: y -> 1 - y.
    std::vector<double> reflected{0.0};
    for (std::size_t c = cuts.size() - 1; c-- > 1;) reflected.push_back(1.0 - cuts[c]);
    reflected.push_back(1.0);
    std::reverse(values.begin(), values.end());
    return TorusMeasure::piecewise(std::move(reflected), std::move(values));
  }
  return TorusMeasure::piecewise(std::move(cuts), std::move(values));
}

MeasureSequence::MeasureSequence(std::vector<TorusMeasure> prefix, TailRule tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail)) {}

std::optional<std::int64_t> MeasureSequence::prefix_depth() const {
  if (prefix_.empty()) return std::nullopt;
  return -static_cast<std::int64_t>(prefix_.size()) + 1;
}

TorusMeasure MeasureSequence::measure_at(std::int64_t k) const {
  if (k > 0) throw IndexOutOfDomain("measure_at: index " + std::to_string(k) + " is positive");
  const auto offset = static_cast<std::uint64_t>(-k);
  if (offset < prefix_.size()) return prefix_[offset];
  return std::visit(Overloaded{
                        [](const IidTail& iid) { return iid.law; },
                        [&](const WrappedGaussianTail& wg) {
                          return TorusMeasure::wrapped_gaussian(mean_at(wg.means, k), variance_at(wg.variances, k));
                        },
                        [&](const ScaledDensityTail& sd) {
                          return scaled_pushforward(*sd.density.as<PiecewiseDensity>(), k);
                        },
                    },
                    tail_.variant());
}

const char* to_string(LogProductVerdict::Status status) {
  switch (status) {
    case LogProductVerdict::Status::Finite:
      return "finite";
    case LogProductVerdict::Status::Infinite:
      return "infinite";
    case LogProductVerdict::Status::InfinitelyManyZeroFactors:
      return "infinitely_many_zero_factors";
  }
  return "?";
}

double riemann_lebesgue_constant(const PiecewiseDensity& density) {
  const auto& d = density.densities;
  double jumps = std::abs(d.front() - d.back());
  for (std::size_t i = 1; i < d.size(); ++i) jumps += std::abs(d[i] - d[i - 1]);
  return jumps / (2.0 * std::numbers::pi);
}

LogProductVerdict tail_log_product(const MeasureSequence& seq, std::int64_t p) {
  if (p < 1) throw InvalidArgument("tail_log_product: need p >= 1");
  using Status = LogProductVerdict::Status;

  double prefix_sum = 0.0;
  std::int64_t zeros = 0;
  for (const auto& mu : seq.prefix()) {
    const double modulus = std::abs(fourier(mu, p).value);
    if (modulus <= kZeroFactor) {
      ++zeros;
    } else {
      prefix_sum += -std::log(std::min(modulus, 1.0));
    }
  }

  return std::visit(
      Overloaded{
          [&](const IidTail& iid) -> LogProductVerdict {
            const auto structure = arithmetic_structure(iid.law, p);
            if (structure.modulus_one()) return {Status::Finite, prefix_sum, zeros, structure.exact};
            const double modulus = std::abs(fourier(iid.law, p).value);
            const Status status = modulus <= kZeroFactor ? Status::InfinitelyManyZeroFactors : Status::Infinite;
            return {status, kInf, zeros, structure.exact};
          },
          [&](const WrappedGaussianTail& wg) -> LogProductVerdict {
            if (!variances_summable(wg.variances)) return {Status::Infinite, kInf, zeros, true};
            const double pd = static_cast<double>(p);
            const double tail =
                2.0 * std::numbers::pi * std::numbers::pi * pd * pd * variance_tail_sum(wg.variances, seq.tail_start());
            return {Status::Finite, prefix_sum + tail, zeros, true};
          },
          [&](const ScaledDensityTail& sd) -> LogProductVerdict {
            // |fourier(mu_j, p)| = |density^(j p)| <= C / |j p| <= 1/2 for all
            // |j| >= 2C/p, so -log terms exceed log 2 infinitely often.
            const double c = riemann_lebesgue_constant(*sd.density.as<PiecewiseDensity>());
            const Status status = c == 0.0 ? Status::InfinitelyManyZeroFactors : Status::Infinite;
            return {status, kInf, zeros, true};
          },
      },
      seq.tail().variant());
}

}  // namespace tsirelson
