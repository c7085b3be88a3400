#include "tsirelson/classifier.hpp"

#include <numeric>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// count * x mod 1, exact for rational-tagged locations.
TorusPoint repeated(const Location& x, std::int64_t count) {
  if (x.exact) {
    if (auto product = Rational::checked_mul(*x.exact, count)) return TorusPoint::from_rational(*product);
  }
  return x.point.scaled(count);
}

bool tail_excludes_every_frequency(const TailRule& tail) {
  return std::visit(Overloaded{
                        [](const IidTail& iid) {
                          const auto& law = iid.law;
                          return law.as<Uniform>() != nullptr || law.as<WrappedGaussian>() != nullptr ||
                                 law.as<PiecewiseDensity>() != nullptr;
                        },
                        [](const WrappedGaussianTail& wg) { return !variances_summable(wg.variances); },
                        [](const ScaledDensityTail&) { return true; },
                    },
                    tail.variant());
}

// Per-index mean of an iid tail law, if it has one in closed form.
std::optional<Location> iid_mean(const TorusMeasure& law) {
  if (const auto* d = law.as<Dirac>()) return d->at;
  if (const auto* a = law.as<Atoms>(); a && a->atoms.size() == 1) return a->atoms.front().location;
  if (const auto* g = law.as<WrappedGaussian>()) return Location::real(g->mean);
  return std::nullopt;
}

}  // namespace

Membership membership(const MeasureSequence& seq, std::int64_t p) {
  auto verdict = tail_log_product(seq, p);
  return {verdict.finite(), verdict};
}

SubgroupEvidence compute_p_mu(const MeasureSequence& seq, std::int64_t scan_bound) {
  if (scan_bound < 1) throw InvalidArgument("compute_p_mu: scan bound must be >= 1");
  SubgroupEvidence evidence;
  evidence.scan_bound = scan_bound;
  evidence.fully_certified = true;
  for (std::int64_t p = 1; p <= scan_bound; ++p) {
    const auto m = membership(seq, p);
    evidence.per_p.emplace(p, m.verdict);
    evidence.fully_certified = evidence.fully_certified && m.verdict.certified;
    if (m.member) evidence.members.push_back(p);
  }
  evidence.p_mu = evidence.members.empty() ? 0 : evidence.members.front();

  if (evidence.p_mu > 0) {
    std::vector<std::int64_t> expected;
    for (std::int64_t p = evidence.p_mu; p <= scan_bound; p += evidence.p_mu) expected.push_back(p);
    if (expected != evidence.members) {
      throw SubgroupViolation("scanned members are not a subgroup: expected multiples of " +
                              std::to_string(evidence.p_mu));
    }
    for (auto a : evidence.members) {
      for (auto b : evidence.members) {
        if (std::gcd(a, b) % evidence.p_mu != 0) throw SubgroupViolation("gcd closure fails");
      }
    }
  }
  evidence.all_frequencies_certified = evidence.members.empty() && tail_excludes_every_frequency(seq.tail());
  return evidence;
}

bool has_constructive_centering(const MeasureSequence& seq) {
  try {
    (void)centering(seq, seq.tail_start() - 1);
    return true;
  } catch (const NoConstructiveCentering&) {
    return false;
  }
}

TorusPoint centering(const MeasureSequence& seq, std::int64_t l) {
  if (l > 0) throw IndexOutOfDomain("centering: index must be <= 0");
  TorusPoint sum{};
  const std::int64_t tail_start = seq.tail_start();
  for (std::int64_t j = 0; j >= l && j > tail_start; --j) {
    const auto mean = circular_mean(seq.prefix()[static_cast<std::size_t>(-j)]);
    if (!mean) {
      throw NoConstructiveCentering("prefix measure at " + std::to_string(j) + " has no circular mean");
    }
    sum += mean->point;
  }
  if (l <= tail_start) {
    const std::int64_t count = tail_start - l + 1;
    sum += std::visit(
        Overloaded{
            [&](const IidTail& iid) {
              const auto mean = iid_mean(iid.law);
              if (!mean) {
                throw NoConstructiveCentering("no closed-form centering for iid tail " + iid.law.describe());
              }
              return repeated(*mean, count);
            },
            [&](const WrappedGaussianTail& wg) {
              return std::visit(Overloaded{
                                    [](const means::Zero&) { return TorusPoint{}; },
                                    [&](const means::Constant& c) {
                                      return TorusPoint::from_real(c.m).scaled(count);
                                    },
                                    [&](const means::Alternating&) {
                                      TorusPoint s{};
                                      for (std::int64_t j = tail_start; j >= l; --j) {
                                        s += TorusPoint::from_real(mean_at(wg.means, j));
                                      }
                                      return s;
                                    },
                                },
                                wg.means);
            },
            [](const ScaledDensityTail&) -> TorusPoint {
              throw NoConstructiveCentering("no closed-form centering for scaled-density tails");
            },
        },
        seq.tail().variant());
  }
  return -sum;
}

CenteringSpec::CenteringSpec(MeasureSequence seq) : seq_(std::move(seq)) {}

TorusPoint CenteringSpec::at(std::int64_t l) const { return centering(seq_, l); }

std::string TrichotomyResult::label() const {
  switch (which) {
    case Case::C1:
      return "C1";
    case Case::C2:
      return "C2";
    case Case::C3:
      return "C3(" + std::to_string(p) + ")";
  }
  return "?";
}

TrichotomyResult classify(const MeasureSequence& seq, std::int64_t scan_bound) {
  TrichotomyResult result{TrichotomyResult::Case::C1, 0, std::nullopt, compute_p_mu(seq, scan_bound)};
  const std::int64_t p_mu = result.evidence.p_mu;
  if (p_mu == 1) {
    result.which = TrichotomyResult::Case::C2;
    if (has_constructive_centering(seq)) result.centering.emplace(seq);
  } else if (p_mu >= 2) {
    result.which = TrichotomyResult::Case::C3;
    result.p = p_mu;
  }
  return result;
}

}  // namespace tsirelson
