#pragma once

// Points of the one-dimensional torus T = R/Z, written additively.
//
// A TorusPoint stores its coordinate in 64-bit fixed point: raw / 2^64. Addition
// and integer scaling are then exact wrap-around arithmetic on uint64, so
// pathwise identities of the recursion (telescoping, noise recovery, translation
// of the anchor) hold bit for bit instead of up to rounding.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tsirelson {

// Exact rational number num/den with den > 0 and gcd(num, den) = 1.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  // Accepts "a", "-a", "a/b". Throws ParseError on anything else.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }

  // Representative in [0, 1).
  Rational frac() const;

  // Overflow-checked arithmetic; nullopt when the result leaves int64.
  static std::optional<Rational> checked_add(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_sub(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_mul(const Rational& a, std::int64_t k);

  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

class TorusPoint {
 public:
  constexpr TorusPoint() = default;

  static constexpr TorusPoint from_raw(std::uint64_t raw) { return TorusPoint(raw); }
  // frac(x); non-finite input is rejected with InvalidArgument.
  static TorusPoint from_real(double x);
  // Nearest fixed-point grid point to frac(r).
  static TorusPoint from_rational(const Rational& r);

  constexpr std::uint64_t raw() const { return raw_; }
  // Value in [0, 1); never returns 1.0.
  double value() const { return static_cast<double>(raw_ >> 11) * 0x1p-53; }
  // Signed representative in [-1/2, 1/2).
  double centered() const { return static_cast<double>(static_cast<std::int64_t>(raw_)) * 0x1p-64; }

  constexpr TorusPoint operator+(TorusPoint o) const { return TorusPoint(raw_ + o.raw_); }
  constexpr TorusPoint operator-(TorusPoint o) const { return TorusPoint(raw_ - o.raw_); }
  constexpr TorusPoint operator-() const { return TorusPoint(0 - raw_); }
  constexpr TorusPoint& operator+=(TorusPoint o) {
    raw_ += o.raw_;
    return *this;
  }
  // p * x mod 1, exact.
  constexpr TorusPoint scaled(std::int64_t p) const {
    return TorusPoint(raw_ * static_cast<std::uint64_t>(p));
  }

  friend constexpr bool operator==(TorusPoint, TorusPoint) = default;

 private:
  constexpr explicit TorusPoint(std::uint64_t raw) : raw_(raw) {}
  std::uint64_t raw_ = 0;
};

// Length of the shorter arc between a and b, in [0, 1/2].
double circular_distance(TorusPoint a, TorusPoint b);

// exp(2 i pi p x), with p * x reduced exactly before the trigonometry.
std::complex<double> character(TorusPoint x, std::int64_t p);

// A torus location that may carry an exact rational tag. The fixed-point
// point is always present; the tag, when set, is authoritative for exact
// decisions (arithmetic structure, cyclic-grid membership).
struct Location {
  TorusPoint point;
  std::optional<Rational> exact;

  static Location real(double x) { return {TorusPoint::from_real(x), std::nullopt}; }
  static Location rational(const Rational& r) {
    return {TorusPoint::from_rational(r), r.frac()};
  }

  friend bool operator==(const Location&, const Location&) = default;
};

// Sum of two locations; the rational tag survives when both are tagged and
// the sum fits in int64.
Location add(const Location& a, const Location& b);

}  // namespace tsirelson
