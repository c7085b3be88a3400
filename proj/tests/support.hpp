#pragma once

#include <cmath>
#include <vector>

#include "tsirelson/measure.hpp"
#include "tsirelson/sequence.hpp"

namespace tsirelson::testing {

inline Location at(std::int64_t num, std::int64_t den) { return Location::rational(Rational(num, den)); }

inline TorusPoint pt(std::int64_t num, std::int64_t den) { return TorusPoint::from_rational(Rational(num, den)); }

inline TorusMeasure coin() { return TorusMeasure::atoms({{at(0, 1), 0.5}, {at(1, 2), 0.5}}); }

inline TorusMeasure irrational_coin() {
  return TorusMeasure::atoms({{at(0, 1), 0.5}, {Location::real(std::sqrt(2.0) - 1.0), 0.5}});
}

inline MeasureSequence iid(TorusMeasure law) { return MeasureSequence({}, TailRule::iid(std::move(law))); }

inline MeasureSequence gaussian_tail(MeanRule means, VarianceRule variances) {
  return MeasureSequence({}, TailRule::wrapped_gaussian(means, variances));
}

inline MeasureSequence roulette() {
  return MeasureSequence({}, TailRule::scaled_density(TorusMeasure::piecewise({0.0, 0.5, 1.0}, {1.5, 0.5})));
}

inline std::vector<TorusPoint> uniform_draws(std::size_t n, std::uint64_t seed) {
  std::vector<TorusPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stream s(seed, i, 7);
    out[i] = TorusPoint::from_raw(s.next_u64());
  }
  return out;
}

}  // namespace tsirelson::testing
