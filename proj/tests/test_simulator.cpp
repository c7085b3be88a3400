#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tsirelson/errors.hpp"
#include "tsirelson/simulator.hpp"
#include "tsirelson/stats.hpp"

using namespace tsirelson;
using namespace tsirelson::testing;
using std::numbers::pi;

namespace {

ChainConfig config(MeasureSequence seq, std::int64_t depth, Anchor anchor, std::int64_t n, unsigned workers = 1) {
  return {std::move(seq), depth, std::move(anchor), n, 42, workers};
}

MeasureSequence geometric() { return gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5}); }

}  // namespace

TEST(Simulate, IdentityEvolutionKeepsAnchor) {
  const auto e = simulate(config(iid(TorusMeasure::dirac(0.0)), 8, anchors::Deterministic{TorusPoint::from_real(0.4)}, 50));
  for (std::size_t i = 0; i < e.samples(); ++i) {
    for (std::int64_t k = -9; k <= 0; ++k) ASSERT_EQ(e.state(i, k), TorusPoint::from_real(0.4));
  }
}

TEST(Simulate, DeterministicRotation) {
  const auto e = simulate(config(iid(TorusMeasure::dirac(Rational(1, 3))), 5, anchors::Deterministic{}, 10));
  for (std::size_t i = 0; i < e.samples(); ++i) EXPECT_LE(circular_distance(e.state(i, 0), TorusPoint{}), 1e-15);
}

TEST(Simulate, UniformAnchorGivesHaarAtEveryIndex) {
  for (const auto& seq : {geometric(), iid(coin()), iid(TorusMeasure::dirac(Rational(1, 3)))}) {
    const auto e = simulate(config(seq, 6, anchors::UniformLaw{}, 100000, 0));
    for (std::int64_t k = -7; k <= 0; ++k) EXPECT_TRUE(uniformity(e.states_at(k), 5).pass) << k;
  }
}

TEST(Simulate, LawAnchorDrawsFromLaw) {
  const auto e = simulate(config(iid(TorusMeasure::dirac(0.0)), 2, anchors::Law{coin()}, 2000));
  std::size_t halves = 0;
  for (std::size_t i = 0; i < e.samples(); ++i) {
    const auto a = e.anchor_draw(i);
    ASSERT_TRUE(a == TorusPoint{} || a == pt(1, 2));
    halves += a == pt(1, 2);
  }
  EXPECT_NEAR(static_cast<double>(halves) / 2000.0, 0.5, 4.0 * 0.5 / std::sqrt(2000.0));
}

TEST(Simulate, WorkerCountDoesNotChangeResults) {
  for (const Anchor& anchor : {Anchor{anchors::Deterministic{TorusPoint::from_real(0.2)}}, Anchor{anchors::UniformLaw{}},
                               Anchor{anchors::Law{TorusMeasure::wrapped_gaussian(0.1, 0.3)}}}) {
    const auto one = simulate(config(geometric(), 12, anchor, 3001, 1));
    for (unsigned w : {2u, 3u, 8u}) {
      const auto many = simulate(config(geometric(), 12, anchor, 3001, w));
      EXPECT_EQ(one.noise_matrix(), many.noise_matrix()) << w;
      EXPECT_EQ(one.state_matrix(), many.state_matrix()) << w;
    }
  }
}

TEST(Simulate, DepthsShareNoiseOnOverlap) {
  const auto shallow = simulate(config(iid(irrational_coin()), 10, anchors::Deterministic{}, 500));
  const auto deep = simulate(config(iid(irrational_coin()), 25, anchors::Deterministic{}, 500));
  for (std::size_t i = 0; i < 500; ++i) {
    for (std::int64_t k = -10; k <= 0; ++k) ASSERT_EQ(shallow.noise(i, k), deep.noise(i, k));
  }
}

TEST(Pathwise, InvariantsHoldOnEveryFamily) {
  const std::vector<MeasureSequence> seqs{
      geometric(), iid(coin()), iid(irrational_coin()), roulette(),
      MeasureSequence({TorusMeasure::dirac(0.1)}, TailRule::iid(TorusMeasure::uniform())),
      gaussian_tail(means::Alternating{0.2}, variances::PowerLaw{0.5, 1.0})};
  for (const auto& seq : seqs) {
    const auto e = simulate(config(seq, 20, anchors::UniformLaw{}, 2000, 0));
    const auto r = check_pathwise(e);
    EXPECT_TRUE(r.all());
    EXPECT_LE(r.max_telescope_error, 1e-9);
    for (std::size_t i = 0; i < e.samples(); ++i) {
      for (std::int64_t k = -20; k <= 0; ++k) {
        ASSERT_EQ(e.state(i, k) - e.state(i, k - 1), e.noise(i, k));
      }
    }
  }
}

TEST(Translate, SpecExamples) {
  const auto v = TorusPoint::from_real(0.15);
  const auto g = TorusPoint::from_real(0.7);
  const auto h = pt(3, 7);
  const auto e = simulate(config(geometric(), 10, anchors::Deterministic{v}, 1000));
  EXPECT_EQ(translate(e, TorusPoint{}).state_matrix(), e.state_matrix());
  const auto direct = simulate(config(geometric(), 10, anchors::Deterministic{v + g}, 1000));
  EXPECT_EQ(translate(e, g).state_matrix(), direct.state_matrix());
  EXPECT_EQ(translate(e, g).noise_matrix(), e.noise_matrix());
  EXPECT_EQ(translate(translate(e, g), h).state_matrix(), translate(e, g + h).state_matrix());
  const auto* echo = std::get_if<anchors::Deterministic>(&translate(e, g).config().anchor);
  ASSERT_NE(echo, nullptr);
  EXPECT_EQ(echo->v, v + g);
}

TEST(Mixture, SpecExamples) {
  const std::size_t n = 50000;
  const double tol = 8.0 / std::sqrt(static_cast<double>(n));
  const auto v = TorusMeasure::dirac(0.37);
  auto pair = mixture_check(geometric(), v, 20, n, 7);
  EXPECT_LE(two_sample_ecf_distance(pair.anchored_by_law.states_at(0), pair.mixed.states_at(0), 3), tol);

  pair = mixture_check(iid(TorusMeasure::dirac(Rational(1, 3))), TorusMeasure::uniform(), 20, n, 7);
  EXPECT_TRUE(uniformity(pair.anchored_by_law.states_at(0), 5).pass);
  EXPECT_TRUE(uniformity(pair.mixed.states_at(0), 5).pass);

  pair = mixture_check(iid(TorusMeasure::dirac(Rational(1, 3))), coin(), 20, n, 7);
  EXPECT_LE(two_sample_ecf_distance(pair.anchored_by_law.states_at(0), pair.mixed.states_at(0), 3), tol);
  // Different draws, same law.
  EXPECT_NE(pair.anchored_by_law.state_matrix(), pair.mixed.state_matrix());
}

TEST(StrongLimit, SpecExamples) {
  const auto none = strong_limit(iid(TorusMeasure::dirac(Rational(1, 3))), TorusPoint{}, 10, 100, 1);
  ASSERT_TRUE(none.bound(0.01).has_value());
  EXPECT_EQ(*none.bound(0.01), 0.0);

  const auto l20 = strong_limit(geometric(), TorusPoint{}, 20, 1000, 1);
  ASSERT_TRUE(l20.tail_variance.has_value());
  EXPECT_NEAR(*l20.tail_variance, 0.25 * std::ldexp(1.0, -20), 1e-20);
  EXPECT_NEAR(*l20.bound(0.01), 2.384185791015625e-3, 1e-15);
  const auto l30 = strong_limit(geometric(), TorusPoint{}, 30, 1000, 1);
  EXPECT_NEAR(*l30.tail_variance / *l20.tail_variance, std::ldexp(1.0, -10), 1e-15);

  EXPECT_THROW(strong_limit(iid(coin()), TorusPoint{}, 10, 100, 1), NotC2);
  EXPECT_THROW(strong_limit(iid(TorusMeasure::wrapped_gaussian(0, 0.5)), TorusPoint{}, 10, 100, 1), NotC2);
}

TEST(StrongLimit, CauchyFrequencyWithinChebyshevBound) {
  const std::int64_t n = 100000;
  const auto a = strong_limit(geometric(), TorusPoint{}, 20, n, 42, 0);
  const auto b = strong_limit(geometric(), TorusPoint{}, 30, n, 42, 0);
  std::int64_t exceed = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) exceed += circular_distance(a.samples[i], b.samples[i]) > 0.01;
  EXPECT_LE(static_cast<double>(exceed) / n, *a.bound(0.01));
}

TEST(StrongLimit, TranslationByG) {
  const auto g = TorusPoint::from_real(0.3);
  const auto a = strong_limit(geometric(), TorusPoint{}, 15, 200, 3);
  const auto b = strong_limit(geometric(), g, 15, 200, 3);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(b.samples[i], a.samples[i] + g);
}

TEST(StrongLimit, CenteringRemovesDrift) {
  const auto drift = gaussian_tail(means::Constant{0.1}, variances::Geometric{0.25, 0.5});
  const auto a = strong_limit(drift, TorusPoint{}, 20, 20000, 5, 0);
  const auto b = strong_limit(drift, TorusPoint{}, 27, 20000, 5, 0);
  std::int64_t exceed = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) exceed += circular_distance(a.samples[i], b.samples[i]) > 0.01;
  EXPECT_LE(static_cast<double>(exceed) / 20000.0, *a.bound(0.01) + 4.0 * std::sqrt(*a.bound(0.01) / 20000.0));
}

TEST(CenteredProducts, SpecExamples) {
  const auto rot = centered_products(iid(TorusMeasure::dirac(Rational(1, 3))), 0, -7, 100, 1);
  EXPECT_TRUE(rot.centered);
  for (const auto& x : rot.samples) EXPECT_LE(circular_distance(x, TorusPoint{}), 1e-15);

  const std::size_t n = 100000;
  const double tau = 4.0 / std::sqrt(static_cast<double>(n));
  for (double variance : {0.5, 0.02}) {
    const auto seq = gaussian_tail(means::Zero{}, variances::Constant{variance});
    for (std::int64_t l : {-1, -3, -8}) {
      const auto c = centered_products(seq, 0, l, n, 11, 0);
      const double predicted = std::exp(-2.0 * pi * pi * variance * static_cast<double>(-l + 1));
      EXPECT_NEAR(std::abs(ecf(c.samples, 1)), predicted, tau) << variance << " " << l;
    }
  }

  const auto deep = centered_products(geometric(), 0, -20, n, 13, 0);
  const auto deeper = centered_products(geometric(), 0, -30, n, 13, 0);
  const double tail_std = std::sqrt(variance_tail_sum(variances::Geometric{0.25, 0.5}, -21));
  EXPECT_LE(two_sample_ecf_distance(deep.samples, deeper.samples, 3), 2.0 * pi * tail_std * 3.0 + 2.0 * tau);
}

TEST(CenteredProducts, FlagsMissingCentering) {
  const auto c = centered_products(iid(irrational_coin()), 0, -5, 10, 1);
  EXPECT_FALSE(c.centered);
}

TEST(ConvolutionPower, SpecExamples) {
  const auto u = convolution_power(TorusMeasure::uniform(), 50, 5);
  for (std::int64_t p = 1; p <= 5; ++p) EXPECT_EQ(u.entry(p, 1), 0.0);
  EXPECT_EQ(u.verdict, ConvolutionPowerTable::Verdict::ConvergesToHaar);

  const auto c = convolution_power(coin(), 1000, 10);
  for (std::int64_t n = 1; n <= 1000; ++n) ASSERT_EQ(c.entry(2, n), 1.0);
  EXPECT_EQ(c.verdict, ConvolutionPowerTable::Verdict::DoesNotConverge);

  const auto irr = convolution_power(irrational_coin(), 10000, 10);
  EXPECT_EQ(irr.verdict, ConvolutionPowerTable::Verdict::ConvergesToHaar);
  for (std::int64_t p = 1; p <= 10; ++p) {
    ASSERT_TRUE(irr.first_below(p, 1e-3).has_value()) << p;
    // Geometric decay: each row is a power of its first entry.
    EXPECT_NEAR(irr.entry(p, 7), std::pow(irr.entry(p, 1), 7), 1e-15);
  }
}

TEST(Skeleton, GridArithmetic) {
  EXPECT_EQ(skeleton_time(0), 1.0);
  EXPECT_EQ(skeleton_time(-1), 0.5);
  EXPECT_EQ(skeleton_time(1), 2.0);
  EXPECT_EQ(skeleton_noise_variance(-1), 2.0);
  EXPECT_EQ(skeleton_noise_variance(0), 1.0);
  EXPECT_EQ(skeleton_noise_variance(-4), 16.0);
  EXPECT_THROW(skeleton({1, 100, 1, 1}), InvalidArgument);
}

TEST(Skeleton, UniformAndIndependentOfNoise) {
  const auto sk = skeleton({12, 100000, 42, 0});
  const auto theta = sk.frac_eta_at(0);
  EXPECT_TRUE(uniformity(theta, 5).pass);
  NoiseColumns noise;
  const std::vector<std::int64_t> lags{0, -3, -6}, freqs{1, 2};
  for (auto j : lags) noise.emplace(j, sk.xi_at(j));
  const auto cross = independence(theta, noise, freqs, freqs, lags, 1e-12);
  EXPECT_TRUE(cross.pass) << cross.max_modulus();
}

TEST(Skeleton, IncrementsHaveGridVarianceAndRecursionHolds) {
  const auto sk = skeleton({6, 40000, 9, 0});
  for (std::int64_t k = -5; k <= 0; ++k) {
    double sq = 0.0;
    for (std::size_t i = 0; i < sk.samples(); ++i) {
      const double dt = skeleton_time(k + 1) - skeleton_time(k);
      ASSERT_NEAR(sk.xi(i, k), sk.increment(i, k) / dt, 1e-12);
      sq += sk.xi(i, k) * sk.xi(i, k);
    }
    const double var = skeleton_noise_variance(k);
    EXPECT_NEAR(sq / 40000.0, var, 4.0 * var * std::sqrt(2.0 / 40000.0)) << k;
  }
  for (std::size_t i = 0; i < sk.samples(); ++i) {
    EXPECT_EQ(sk.frac_eta(i, -6), TorusPoint{});
    for (std::int64_t k = -5; k <= 0; ++k) {
      ASSERT_LE(circular_distance(sk.frac_eta(i, k), sk.frac_eta(i, k - 1) + TorusPoint::from_real(sk.xi(i, k))), 1e-12);
    }
  }
}

TEST(ExactStateLaw, MatchesHandConvolution) {
  const auto law = TorusMeasure::atoms({{at(0, 1), 0.5}, {at(1, 8), 0.25}, {at(3, 8), 0.25}});
  const auto seq = iid(law);
  auto expected = CyclicDistribution::delta(8, 2);  // anchor 1/4
  for (int k = 0; k <= 4; ++k) expected = cyclic_convolve(expected, to_cyclic(law, 8));
  EXPECT_LE(total_variation(exact_state_law(seq, 4, at(1, 4), 8), expected), 1e-15);
  EXPECT_THROW(exact_state_law(seq, 4, at(1, 3), 8), NotSupportedOnCyclicGrid);
  EXPECT_THROW(exact_state_law(geometric(), 4, at(0, 1), 8), NotSupportedOnCyclicGrid);
}

TEST(ExactStateLaw, EmpiricalLawWithinTotalVariationBound) {
  const auto seq = iid(TorusMeasure::atoms({{at(0, 1), 0.5}, {at(1, 8), 0.25}, {at(3, 8), 0.25}}));
  const std::int64_t n = 100000;
  const auto e = simulate(config(seq, 12, anchors::Deterministic{pt(5, 8)}, n, 0));
  const auto exact = exact_state_law(seq, 12, at(5, 8), 8);
  EXPECT_LE(total_variation(exact, empirical_cyclic_law(e.states_at(0), 8)), 3.0 * std::sqrt(8.0 / n));
}

TEST(CommonCyclicOrder, Detection) {
  EXPECT_EQ(common_cyclic_order(iid(TorusMeasure::atoms({{at(0, 1), 0.5}, {at(1, 8), 0.25}, {at(3, 8), 0.25}})), 12), 8);
  EXPECT_EQ(common_cyclic_order(iid(TorusMeasure::dirac(Rational(1, 3))), 5), 3);
  const MeasureSequence mixed({TorusMeasure::dirac(Rational(1, 4))}, TailRule::iid(TorusMeasure::dirac(Rational(1, 6))));
  EXPECT_EQ(common_cyclic_order(mixed, 5), 12);
  EXPECT_FALSE(common_cyclic_order(geometric(), 5).has_value());
  EXPECT_FALSE(common_cyclic_order(iid(irrational_coin()), 5).has_value());
}

TEST(Anchor, Describe) {
  EXPECT_EQ(describe(anchors::UniformLaw{}), "uniform");
  EXPECT_EQ(describe(anchors::Deterministic{pt(1, 4)}), "det:0.25");
}
