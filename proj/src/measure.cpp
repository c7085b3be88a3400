#include "tsirelson/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kMergeTolerance = 1e-12;
constexpr double kModulusOneTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_location(const Location& a, const Location& b) {
  if (a.exact && b.exact) return *a.exact == *b.exact;
  return circular_distance(a.point, b.point) <= kMergeTolerance;
}

std::string location_text(const Location& x) {
  if (x.exact) return x.exact->to_string();
  std::ostringstream os;
  os.precision(17);
  os << x.point.value();
  return os.str();
}

// Treat a one-atom Atoms as the Dirac it is.
std::optional<Location> point_mass(const TorusMeasure& mu) {
  if (const auto* d = mu.as<Dirac>()) return d->at;
  if (const auto* a = mu.as<Atoms>(); a && a->atoms.size() == 1) return a->atoms.front().location;
  return std::nullopt;
}

std::vector<Atom> atoms_of(const TorusMeasure& mu) {
  if (const auto* d = mu.as<Dirac>()) return {Atom{d->at, 1.0}};
  return mu.as<Atoms>()->atoms;
}

TorusMeasure shift(const TorusMeasure& mu, const Location& by) {
  return std::visit(
      Overloaded{
          [&](const Dirac& d) { return TorusMeasure::dirac(add(d.at, by)); },
          [&](const Atoms& a) {
            std::vector<Atom> out = a.atoms;
            for (auto& atom : out) atom.location = add(atom.location, by);
            return TorusMeasure::atoms(std::move(out));
          },
          [&](const WrappedGaussian& g) {
            const double mean = (TorusPoint::from_real(g.mean) + by.point).value();
            return TorusMeasure::wrapped_gaussian(mean, g.variance);
          },
          [&](const Uniform&) { return TorusMeasure::uniform(); },
          [&](const PiecewiseDensity& pd) {
            struct Segment {
              double lo, hi, density;
            };
            const double offset = by.point.value();
            std::vector<Segment> segments;
            for (std::size_t i = 0; i < pd.densities.size(); ++i) {
              double lo = pd.breaks[i] + offset;
              double hi = pd.breaks[i + 1] + offset;
              if (lo >= 1.0) {
                lo -= 1.0;
                hi -= 1.0;
              }
              if (hi > 1.0) {
                segments.push_back({lo, 1.0, pd.densities[i]});
                segments.push_back({0.0, hi - 1.0, pd.densities[i]});
              } else {
                segments.push_back({lo, hi, pd.densities[i]});
              }
            }
            std::sort(segments.begin(), segments.end(),
                      [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
            std::vector<double> breaks{0.0};
            std::vector<double> densities;
            for (const auto& s : segments) {
              if (s.hi - s.lo <= 0.0) continue;
              densities.push_back(s.density);
              breaks.push_back(s.hi);
            }
            breaks.back() = 1.0;
            return TorusMeasure::piecewise(std::move(breaks), std::move(densities));
          },
      },
      mu.variant());
}

}  // namespace

TorusMeasure TorusMeasure::dirac(Location at) {
  if (at.exact) at = Location::rational(*at.exact);
  return TorusMeasure(Dirac{at});
}

TorusMeasure TorusMeasure::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("atoms: empty support");
  double total = 0.0;
  for (auto& atom : atoms) {
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw ValidationError("atoms: weights must be positive");
    }
    if (atom.location.exact) atom.location = Location::rational(*atom.location.exact);
    total += atom.weight;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "atoms: weights sum to " << total << ", not 1";
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (same_location(atoms[i].location, atoms[j].location)) {
        throw ValidationError("atoms: locations must be distinct mod 1");
      }
    }
  }
  return TorusMeasure(Atoms{std::move(atoms)});
}

TorusMeasure TorusMeasure::wrapped_gaussian(double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0) {
    throw ValidationError("wrapped_gaussian: need finite mean and variance >= 0");
  }
  if (variance == 0.0) return dirac(mean);
  return TorusMeasure(WrappedGaussian{mean, variance});
}

TorusMeasure TorusMeasure::uniform() { return TorusMeasure(Uniform{}); }

TorusMeasure TorusMeasure::piecewise(std::vector<double> breaks, std::vector<double> densities) {
  if (breaks.size() < 2 || densities.size() + 1 != breaks.size()) {
    throw ValidationError("piecewise: need n+1 breakpoints for n densities");
  }
  if (breaks.front() != 0.0 || breaks.back() != 1.0) {
    throw ValidationError("piecewise: breakpoints must start at 0 and end at 1");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) throw ValidationError("piecewise: breakpoints must increase");
    if (!(densities[i] >= 0.0) || !std::isfinite(densities[i])) {
      throw ValidationError("piecewise: densities must be nonnegative");
    }
    mass += densities[i] * (breaks[i + 1] - breaks[i]);
  }
  if (std::abs(mass - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "piecewise: density integrates to " << mass << ", not 1";
    throw ValidationError(os.str());
  }
  return TorusMeasure(PiecewiseDensity{std::move(breaks), std::move(densities)});
}

std::string TorusMeasure::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Dirac& d) { os << "dirac(" << location_text(d.at) << ")"; },
                 [&](const Atoms& a) {
                   os << "atoms{";
                   for (std::size_t i = 0; i < a.atoms.size(); ++i) {
                     if (i) os << ",";
                     os << "(" << location_text(a.atoms[i].location) << "," << a.atoms[i].weight << ")";
                   }
                   os << "}";
                 },
                 [&](const WrappedGaussian& g) { os << "wrapped_gaussian(" << g.mean << "," << g.variance << ")"; },
                 [&](const Uniform&) { os << "uniform"; },
                 [&](const PiecewiseDensity& pd) { os << "piecewise(" << pd.densities.size() << " pieces)"; },
             },
             variant_);
  return os.str();
}

FourierCoefficient fourier(const TorusMeasure& mu, std::int64_t p) {
  if (p == 0) return {0, {1.0, 0.0}};
  const std::complex<double> value = std::visit(
      Overloaded{
          [&](const Dirac& d) { return character(d.at.point, p); },
          [&](const Atoms& a) {
            std::complex<double> sum{0.0, 0.0};
            for (const auto& atom : a.atoms) sum += atom.weight * character(atom.location.point, p);
            return sum;
          },
          [&](const WrappedGaussian& g) {
            const double pd = static_cast<double>(p);
            const double modulus = std::exp(-2.0 * std::numbers::pi * std::numbers::pi * pd * pd * g.variance);
            return modulus * character(TorusPoint::from_real(g.mean), p);
          },
          [&](const Uniform&) { return std::complex<double>{0.0, 0.0}; },
          [&](const PiecewiseDensity& pd) {
            // d * (e(p b) - e(p a)) / (2 i pi p) on each piece.
            std::complex<double> sum{0.0, 0.0};
            std::complex<double> left = character(TorusPoint::from_real(pd.breaks.front()), p);
            for (std::size_t i = 0; i < pd.densities.size(); ++i) {
              const double b = pd.breaks[i + 1];
              const std::complex<double> right =
                  b == 1.0 ? std::complex<double>{1.0, 0.0} : character(TorusPoint::from_real(b), p);
              sum += pd.densities[i] * (right - left);
              left = right;
            }
            return sum / std::complex<double>(0.0, 2.0 * std::numbers::pi * static_cast<double>(p));
          },
      },
      mu.variant());
  return {p, value};
}

TorusPoint sample(const TorusMeasure& mu, Stream& rng) {
  return std::visit(
      Overloaded{
          [&](const Dirac& d) { return d.at.point; },
          [&](const Atoms& a) {
            const double u = rng.uniform();
            double cumulative = 0.0;
            for (const auto& atom : a.atoms) {
              cumulative += atom.weight;
              if (u < cumulative) return atom.location.point;
            }
            return a.atoms.back().location.point;
          },
          [&](const WrappedGaussian& g) {
            return TorusPoint::from_real(g.mean) + TorusPoint::from_real(std::sqrt(g.variance) * rng.normal());
          },
          [&](const Uniform&) { return TorusPoint::from_raw(rng.next_u64()); },
          [&](const PiecewiseDensity& pd) {
            const double u = rng.uniform();
            double cumulative = 0.0;
            for (std::size_t i = 0; i < pd.densities.size(); ++i) {
              const double width = pd.breaks[i + 1] - pd.breaks[i];
              const double mass = pd.densities[i] * width;
              if (mass > 0.0 && u < cumulative + mass) {
                const double x = pd.breaks[i] + std::min((u - cumulative) / pd.densities[i], width);
                return TorusPoint::from_real(x);
              }
              cumulative += mass;
            }
            // u landed in the rounding gap above the total mass.
            for (std::size_t i = pd.densities.size(); i-- > 0;) {
              if (pd.densities[i] > 0.0) return TorusPoint::from_real(pd.breaks[i + 1] - 1e-15);
            }
            return TorusPoint{};
          },
      },
      mu.variant());
}

TorusMeasure convolve(const TorusMeasure& mu, const TorusMeasure& nu) {
  if (mu.as<Uniform>() || nu.as<Uniform>()) return TorusMeasure::uniform();
  if (auto x = point_mass(mu)) return shift(nu, *x);
  if (auto y = point_mass(nu)) return shift(mu, *y);

  if (mu.as<Atoms>() && nu.as<Atoms>()) {
    std::vector<Atom> merged;
    for (const auto& a : atoms_of(mu)) {
      for (const auto& b : atoms_of(nu)) {
        const Location at = add(a.location, b.location);
        const double w = a.weight * b.weight;
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const Atom& m) { return same_location(m.location, at); });
        if (it != merged.end()) {
          it->weight += w;
        } else {
          merged.push_back({at, w});
        }
      }
    }
    return TorusMeasure::atoms(std::move(merged));
  }
  const auto* g = mu.as<WrappedGaussian>();
  const auto* h = nu.as<WrappedGaussian>();
  if (g && h) {
    const double mean = (TorusPoint::from_real(g->mean) + TorusPoint::from_real(h->mean)).value();
    return TorusMeasure::wrapped_gaussian(mean, g->variance + h->variance);
  }
  throw IncompatiblePair("no closed form for convolve(" + mu.describe() + ", " + nu.describe() + ")");
}

ArithmeticStructure arithmetic_structure(const TorusMeasure& mu, std::int64_t p) {
  if (p < 1) throw InvalidArgument("arithmetic_structure: need p >= 1");
  if (auto x = point_mass(mu)) {
    if (x->exact) {
      if (auto px = Rational::checked_mul(*x->exact, p)) {
        return {TorusPoint::from_rational(*px), true};
      }
    }
    return {x->point.scaled(p), true};
  }
  if (const auto* a = mu.as<Atoms>()) {
    const auto& atoms = a->atoms;
    const bool all_exact =
        std::all_of(atoms.begin(), atoms.end(), [](const Atom& atom) { return atom.location.exact.has_value(); });
    if (all_exact) {
      bool on_coset = true;
      bool overflow = false;
      for (std::size_t i = 1; i < atoms.size() && on_coset; ++i) {
        auto diff = Rational::checked_sub(*atoms[i].location.exact, *atoms[0].location.exact);
        auto scaled = diff ? Rational::checked_mul(*diff, p) : std::nullopt;
        if (!scaled) {
          overflow = true;
          break;
        }
        on_coset = scaled->is_integer();
      }
      if (!overflow) {
        if (!on_coset) return {std::nullopt, true};
        auto px = Rational::checked_mul(*atoms[0].location.exact, p);
        return {px ? TorusPoint::from_rational(*px) : atoms[0].location.point.scaled(p), true};
      }
    }
    if (std::abs(fourier(mu, p).value) >= 1.0 - kModulusOneTolerance) {
      return {atoms[0].location.point.scaled(p), false};
    }
    return {std::nullopt, false};
  }
  // Wrapped Gaussians with positive variance, Haar measure and densities all
  // have |fourier| < 1 at every p != 0.
  return {std::nullopt, true};
}

std::optional<Location> circular_mean(const TorusMeasure& mu) {
  if (auto x = point_mass(mu)) return x;
  if (const auto* g = mu.as<WrappedGaussian>()) return Location::real(g->mean);
  const auto first = fourier(mu, 1).value;
  if (std::abs(first) <= 1e-12) return std::nullopt;
  return Location::real(std::arg(first) / (2.0 * std::numbers::pi));
}

CyclicDistribution::CyclicDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("cyclic distribution: order must be positive");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ValidationError("cyclic distribution: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance) throw ValidationError("cyclic distribution: weights must sum to 1");
}

CyclicDistribution CyclicDistribution::delta(std::size_t q, std::size_t at) {
  std::vector<double> w(q, 0.0);
  w.at(at % q) = 1.0;
  return CyclicDistribution(std::move(w));
}

std::optional<std::size_t> cyclic_index(const Location& x, std::int64_t q) {
  if (q < 1) throw InvalidArgument("cyclic grid order must be positive");
  if (x.exact) {
    const Rational r = x.exact->frac();
    if (q % r.den() != 0) return std::nullopt;
    return static_cast<std::size_t>(r.num() * (q / r.den()));
  }
  // Exactly representable grid points, e.g. dyadic reals.
  if (x.point.scaled(q).raw() != 0) return std::nullopt;
  const auto index = static_cast<std::size_t>(
      (static_cast<unsigned __int128>(x.point.raw()) * static_cast<std::uint64_t>(q)) >> 64);
  return index;
}

CyclicDistribution to_cyclic(const TorusMeasure& mu, std::int64_t q) {
  if (!mu.as<Dirac>() && !mu.as<Atoms>()) {
    throw NotSupportedOnCyclicGrid("to_cyclic: " + mu.describe() + " is not an atomic measure");
  }
  std::vector<double> weights(static_cast<std::size_t>(q), 0.0);
  for (const auto& atom : atoms_of(mu)) {
    const auto index = cyclic_index(atom.location, q);
    if (!index) {
      throw NotSupportedOnCyclicGrid("to_cyclic: atom " + location_text(atom.location) + " is off the (1/" +
                                     std::to_string(q) + ")Z grid");
    }
    weights[*index] += atom.weight;
  }
  return CyclicDistribution(std::move(weights));
}

CyclicDistribution cyclic_convolve(const CyclicDistribution& a, const CyclicDistribution& b) {
  if (a.order() != b.order()) throw ShapeMismatch("cyclic_convolve: orders differ");
  const std::size_t q = a.order();
  std::vector<double> out(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < q; ++j) out[(i + j) % q] += a[i] * b[j];
  }
  return CyclicDistribution(std::move(out));
}

double total_variation(const CyclicDistribution& a, const CyclicDistribution& b) {
  if (a.order() != b.order()) throw ShapeMismatch("total_variation: orders differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.order(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace tsirelson
