#include "tsirelson/torus.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError("not an exact rational: '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) return std::nullopt;
  return static_cast<std::int64_t>(v);
}

std::optional<Rational> make_checked(__int128 num, __int128 den) {
  // Reduce in 128 bits before narrowing.
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  auto n = narrow(num);
  auto d = narrow(den);
  if (!n || !d) return std::nullopt;
  return Rational(*n, *d);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text, whole), 1);
  const auto num = parse_int(trim(text.substr(0, slash)), whole);
  const auto den = parse_int(trim(text.substr(slash + 1)), whole);
  if (den == 0) throw ParseError("zero denominator in '" + std::string(whole) + "'");
  return Rational(num, den);
}

Rational Rational::frac() const {
  std::int64_t r = num_ % den_;
  if (r < 0) r += den_;
  return Rational(r, den_);
}

std::optional<Rational> Rational::checked_add(const Rational& a, const Rational& b) {
  return make_checked(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                      static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_sub(const Rational& a, const Rational& b) {
  return make_checked(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                      static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_mul(const Rational& a, std::int64_t k) {
  return make_checked(static_cast<__int128>(a.num_) * k, a.den_);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

TorusPoint TorusPoint::from_real(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("torus point from non-finite value");
  double f = x - std::floor(x);
  if (!(f < 1.0)) f = 0.0;
  return TorusPoint(static_cast<std::uint64_t>(std::ldexp(f, 64)));
}

TorusPoint TorusPoint::from_rational(const Rational& r) {
  const Rational f = r.frac();
  using u128 = unsigned __int128;
  const u128 den = static_cast<u128>(f.den());
  const u128 scaled = ((static_cast<u128>(f.num()) << 64) + den / 2) / den;
  return TorusPoint(static_cast<std::uint64_t>(scaled));  // 2^64 wraps to 0
}

double circular_distance(TorusPoint a, TorusPoint b) {
  return std::abs((a - b).centered());
}

std::complex<double> character(TorusPoint x, std::int64_t p) {
  const double angle = 2.0 * std::numbers::pi * x.scaled(p).centered();
  return {std::cos(angle), std::sin(angle)};
}

Location add(const Location& a, const Location& b) {
  Location out{a.point + b.point, std::nullopt};
  if (a.exact && b.exact) {
    if (auto sum = Rational::checked_add(*a.exact, *b.exact)) {
      out.exact = sum->frac();
      out.point = TorusPoint::from_rational(*out.exact);
    }
  }
  return out;
}

}  // namespace tsirelson
