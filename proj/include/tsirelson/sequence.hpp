#pragma once

// The evolution law (mu_k)_{k <= 0}: an explicit prefix mu_0, mu_{-1}, ...,
// mu_{-K} followed by a tail rule from a few analytically summable families.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tsirelson/measure.hpp"

namespace tsirelson {

namespace means {
struct Zero {};
struct Constant {
  double m;
};
// m_j = (-1)^j m.
struct Alternating {
  double m;
};
}  // namespace means
using MeanRule = std::variant<means::Zero, means::Constant, means::Alternating>;

namespace variances {
// sigma_j^2 = c r^|j|.
struct Geometric {
  double c, r;
};
// sigma_j^2 = c / max(1, |j|)^s.
struct PowerLaw {
  double c, s;
};
struct Constant {
  double c;
};
}  // namespace variances
using VarianceRule = std::variant<variances::Geometric, variances::PowerLaw, variances::Constant>;

struct IidTail {
  TorusMeasure law;
};

struct WrappedGaussianTail {
  MeanRule means;
  VarianceRule variances;
};

// mu_j is the law of frac(j * gamma), gamma having the given piecewise density.
struct ScaledDensityTail {
  TorusMeasure density;
};

class TailRule {
 public:
  using Variant = std::variant<IidTail, WrappedGaussianTail, ScaledDensityTail>;

  static TailRule iid(TorusMeasure law) { return TailRule(IidTail{std::move(law)}); }
  // Validates c > 0, 0 < r < 1 and s > 0.
  static TailRule wrapped_gaussian(MeanRule means, VarianceRule variances);
  // Requires a PiecewiseDensity measure.
  static TailRule scaled_density(TorusMeasure density);

  const Variant& variant() const { return variant_; }
  template <class T>
  const T* as() const { return std::get_if<T>(&variant_); }

 private:
  explicit TailRule(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

double mean_at(const MeanRule& rule, std::int64_t j);
double variance_at(const VarianceRule& rule, std::int64_t j);
// Sum of sigma_j^2 over j <= first (first <= 0), in closed form; +inf when the
// series diverges.
double variance_tail_sum(const VarianceRule& rule, std::int64_t first);
bool variances_summable(const VarianceRule& rule);

// Law of frac(k * gamma) for gamma with piecewise-constant density; k != 0.
TorusMeasure scaled_pushforward(const PiecewiseDensity& density, std::int64_t k);

class MeasureSequence {
 public:
  // prefix[i] is mu_{-i}; the tail applies to k <= -prefix.size(). An empty
  // prefix means the tail rule covers every index.
  MeasureSequence(std::vector<TorusMeasure> prefix, TailRule tail);

  TorusMeasure measure_at(std::int64_t k) const;

  const std::vector<TorusMeasure>& prefix() const { return prefix_; }
  const TailRule& tail() const { return tail_; }
  // Most negative prefix index, or nullopt when the prefix is empty.
  std::optional<std::int64_t> prefix_depth() const;
  // First index governed by the tail rule.
  std::int64_t tail_start() const { return -static_cast<std::int64_t>(prefix_.size()); }

 private:
  std::vector<TorusMeasure> prefix_;
  TailRule tail_;
};

struct LogProductVerdict {
  enum class Status { Finite, Infinite, InfinitelyManyZeroFactors };
  Status status;
  // Sum over j <= 0 of -log|fourier(mu_j, p)|, skipping zero factors. Only
  // meaningful for Finite; +inf otherwise.
  double tail_log_sum;
  std::int64_t zero_factor_count;
  bool certified;

  bool finite() const { return status == Status::Finite; }
};

const char* to_string(LogProductVerdict::Status status);

// Decides whether prod_{j <= k} |fourier(mu_j, p)| > 0 for some k.
LogProductVerdict tail_log_product(const MeasureSequence& seq, std::int64_t p);

// Bound C with |fourier(density, t)| <= C / |t| for t != 0: the total jump
// of the density around the circle divided by 2 pi.
double riemann_lebesgue_constant(const PiecewiseDensity& density);

}  // namespace tsirelson
