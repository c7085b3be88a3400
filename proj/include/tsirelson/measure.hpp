#pragma once

// Closed-form probability measures on the torus [0, 1).

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tsirelson/random.hpp"
#include "tsirelson/torus.hpp"

namespace tsirelson {

struct Dirac {
  Location at;
};

struct Atom {
  Location location;
  double weight;
};

struct Atoms {
  std::vector<Atom> atoms;
};

struct WrappedGaussian {
  double mean;
  double variance;  // > 0; variance 0 is constructed as a Dirac
};

struct Uniform {};

// Piecewise-constant density on [0, 1): density[i] on [breaks[i], breaks[i+1]).
struct PiecewiseDensity {
  std::vector<double> breaks;
  std::vector<double> densities;
};

class TorusMeasure {
 public:
  using Variant = std::variant<Dirac, Atoms, WrappedGaussian, Uniform, PiecewiseDensity>;

  static TorusMeasure dirac(Location at);
  static TorusMeasure dirac(double x) { return dirac(Location::real(x)); }
  static TorusMeasure dirac(const Rational& x) { return dirac(Location::rational(x)); }
  // Validates weights (> 0, sum 1 within 1e-12) and distinct locations mod 1.
  static TorusMeasure atoms(std::vector<Atom> atoms);
  // variance 0 yields Dirac(frac(mean)).
  static TorusMeasure wrapped_gaussian(double mean, double variance);
  static TorusMeasure uniform();
  // breaks must start at 0, end at 1, increase strictly; integral 1 within 1e-12.
  static TorusMeasure piecewise(std::vector<double> breaks, std::vector<double> densities);

  const Variant& variant() const { return variant_; }
  template <class T>
  const T* as() const { return std::get_if<T>(&variant_); }

  // Short human-readable description, e.g. "wrapped_gaussian(0,0.5)".
  std::string describe() const;

 private:
  explicit TorusMeasure(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

struct FourierCoefficient {
  std::int64_t p;
  std::complex<double> value;
};

// Integral of exp(2 i pi p x) against mu. Exactly 1 at p = 0.
FourierCoefficient fourier(const TorusMeasure& mu, std::int64_t p);

TorusPoint sample(const TorusMeasure& mu, Stream& rng);

// Law of the sum mod 1 of independent draws. Supported pairs: Atoms/Dirac with
// Atoms/Dirac, Dirac with anything, WrappedGaussian with WrappedGaussian, and
// Uniform with anything. Other pairs throw IncompatiblePair.
TorusMeasure convolve(const TorusMeasure& mu, const TorusMeasure& nu);

struct ArithmeticStructure {
  // Set iff |fourier(mu, p)| = 1; mu is then carried by phase/p + (1/p)Z
  // where phase = frac(p x) for any support point x.
  std::optional<TorusPoint> phase;
  // True when decided by exact rational arithmetic or by the variant's form
  // rather than by a floating-point tolerance.
  bool exact;

  bool modulus_one() const { return phase.has_value(); }
};

ArithmeticStructure arithmetic_structure(const TorusMeasure& mu, std::int64_t p);

// Circular mean direction arg(fourier(mu, 1)) / 2pi; nullopt when the first
// Fourier coefficient vanishes (no canonical mean).
std::optional<Location> circular_mean(const TorusMeasure& mu);

// Weight vector of a measure carried by {0, 1/q, ..., (q-1)/q}.
class CyclicDistribution {
 public:
  explicit CyclicDistribution(std::vector<double> weights);
  static CyclicDistribution delta(std::size_t q, std::size_t at);

  std::size_t order() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

CyclicDistribution to_cyclic(const TorusMeasure& mu, std::int64_t q);
CyclicDistribution cyclic_convolve(const CyclicDistribution& a, const CyclicDistribution& b);
// Grid index of a location on (1/q)Z, or nullopt if it is not exactly on it.
std::optional<std::size_t> cyclic_index(const Location& x, std::int64_t q);
double total_variation(const CyclicDistribution& a, const CyclicDistribution& b);

}  // namespace tsirelson
