#include <gtest/gtest.h>

#include <chrono>
#include <numeric>

#include "support.hpp"
#include "tsirelson/classifier.hpp"
#include "tsirelson/errors.hpp"

using namespace tsirelson;
using namespace tsirelson::testing;
using Case = TrichotomyResult::Case;

TEST(Membership, SpecExamples) {
  const auto wg = iid(TorusMeasure::wrapped_gaussian(0.0, 0.5));
  for (std::int64_t p = 1; p <= 10; ++p) EXPECT_FALSE(membership(wg, p).member) << p;
  EXPECT_TRUE(membership(iid(TorusMeasure::dirac(Rational(1, 3))), 1).member);
  EXPECT_FALSE(membership(iid(coin()), 1).member);
  EXPECT_TRUE(membership(iid(coin()), 2).member);
}

TEST(ComputePMu, SpecExamples) {
  const auto c = compute_p_mu(iid(coin()), 64);
  EXPECT_EQ(c.p_mu, 2);
  ASSERT_EQ(c.members.size(), 32u);
  for (std::size_t i = 0; i < c.members.size(); ++i) EXPECT_EQ(c.members[i], 2 * static_cast<std::int64_t>(i + 1));
  EXPECT_TRUE(c.fully_certified);

  const auto g = compute_p_mu(gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5}), 64);
  EXPECT_EQ(g.p_mu, 1);
  EXPECT_EQ(g.members.size(), 64u);

  const auto irr = compute_p_mu(iid(irrational_coin()), 64);
  EXPECT_EQ(irr.p_mu, 0);
  EXPECT_TRUE(irr.members.empty());
  EXPECT_FALSE(irr.all_frequencies_certified);
  EXPECT_FALSE(irr.fully_certified);
}

TEST(ComputePMu, CertificationBeyondScanBound) {
  EXPECT_TRUE(compute_p_mu(iid(TorusMeasure::wrapped_gaussian(0, 0.5))).all_frequencies_certified);
  EXPECT_TRUE(compute_p_mu(gaussian_tail(means::Zero{}, variances::PowerLaw{0.5, 1.0})).all_frequencies_certified);
  EXPECT_TRUE(compute_p_mu(roulette()).all_frequencies_certified);
  EXPECT_TRUE(compute_p_mu(iid(TorusMeasure::uniform())).all_frequencies_certified);
  // Rational atoms are always arithmetic: a period beyond the bound is reported as p_mu = 0, uncertified.
  const auto fine = iid(TorusMeasure::atoms({{at(0, 1), 0.5}, {at(1, 101), 0.5}}));
  const auto e = compute_p_mu(fine, 64);
  EXPECT_EQ(e.p_mu, 0);
  EXPECT_FALSE(e.all_frequencies_certified);
  EXPECT_EQ(compute_p_mu(fine, 101).p_mu, 101);
}

TEST(ComputePMu, SubgroupLaw) {
  const std::vector<MeasureSequence> seqs{
      iid(coin()), iid(TorusMeasure::atoms({{at(1, 6), 0.5}, {at(5, 6), 0.5}})),
      iid(TorusMeasure::atoms({{at(0, 1), 0.25}, {at(1, 4), 0.25}, {at(3, 4), 0.5}})),
      MeasureSequence({TorusMeasure::uniform()}, TailRule::iid(TorusMeasure::dirac(Rational(2, 7))))};
  for (const auto& seq : seqs) {
    const auto e = compute_p_mu(seq, 48);
    for (auto p : e.members) {
      for (auto q : e.members) {
        EXPECT_TRUE(std::binary_search(e.members.begin(), e.members.end(), std::gcd(p, q)));
      }
    }
  }
}

TEST(Classify, SpecExamples) {
  EXPECT_EQ(classify(iid(TorusMeasure::wrapped_gaussian(0, 0.5))).which, Case::C1);
  const auto c2 = classify(iid(TorusMeasure::dirac(Rational(1, 3))));
  EXPECT_EQ(c2.which, Case::C2);
  ASSERT_TRUE(c2.centering.has_value());
  for (std::int64_t l = 0; l >= -7; --l) {
    EXPECT_LE(circular_distance(c2.centering->at(l), pt(-(-l + 1), 3)), 1e-15) << l;
  }
  const auto c3 = classify(iid(coin()));
  EXPECT_EQ(c3.which, Case::C3);
  EXPECT_EQ(c3.p, 2);
  EXPECT_EQ(c3.label(), "C3(2)");
  EXPECT_EQ(classify(gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5})).which, Case::C2);
  EXPECT_EQ(classify(roulette()).which, Case::C1);
}

TEST(Classify, PrefixInvariance) {
  const std::vector<MeasureSequence> bases{iid(coin()), iid(TorusMeasure::dirac(Rational(1, 3))), roulette(),
                                           gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5})};
  for (const auto& base : bases) {
    const MeasureSequence changed({TorusMeasure::wrapped_gaussian(0.3, 0.05), TorusMeasure::dirac(0.61)}, base.tail());
    EXPECT_EQ(classify(base).evidence.p_mu, classify(changed).evidence.p_mu);
  }
}

TEST(Classify, GaussianTailsFollowTheVarianceDichotomy) {
  const std::vector<VarianceRule> rules{variances::Geometric{0.25, 0.5}, variances::Geometric{2.0, 0.9},
                                        variances::PowerLaw{0.5, 2.0},   variances::PowerLaw{0.5, 1.01},
                                        variances::PowerLaw{0.5, 1.0},   variances::PowerLaw{0.1, 0.5},
                                        variances::Constant{0.5}};
  for (const auto& rule : rules) {
    for (const MeanRule& m : {MeanRule{means::Zero{}}, MeanRule{means::Constant{0.1}}, MeanRule{means::Alternating{0.3}}}) {
      const auto r = classify(gaussian_tail(m, rule));
      EXPECT_NE(r.which, Case::C3);
      EXPECT_EQ(r.which == Case::C2, variances_summable(rule));
    }
  }
}

TEST(Classify, FastEnough) {
  const auto start = std::chrono::steady_clock::now();
  classify(roulette());
  classify(iid(irrational_coin()));
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(Centering, SpecExamples) {
  EXPECT_EQ(centering(gaussian_tail(means::Zero{}, variances::Geometric{0.25, 0.5}), -9), TorusPoint{});
  EXPECT_LE(circular_distance(centering(iid(TorusMeasure::dirac(Rational(1, 3))), -2), TorusPoint{}), 1e-15);
  EXPECT_LE(circular_distance(centering(gaussian_tail(means::Constant{0.1}, variances::Geometric{0.25, 0.5}), -4),
                              pt(1, 2)),
            1e-12);
}

TEST(Centering, AlternatingMeansAndPrefix) {
  const auto alt = gaussian_tail(means::Alternating{0.1}, variances::Geometric{0.25, 0.5});
  // m_0 = 0.1, m_-1 = -0.1, m_-2 = 0.1: partial sums alternate between 0.1 and 0.
  EXPECT_LE(circular_distance(centering(alt, -2), TorusPoint::from_real(-0.1)), 1e-12);
  EXPECT_LE(circular_distance(centering(alt, -3), TorusPoint{}), 1e-12);
  const MeasureSequence seq({TorusMeasure::wrapped_gaussian(0.25, 0.1)}, TailRule::iid(TorusMeasure::dirac(Rational(1, 8))));
  // -(0.25 + 3/8)
  EXPECT_LE(circular_distance(centering(seq, -3), TorusPoint::from_real(-0.625)), 1e-12);
}

TEST(Centering, NoConstructiveFormula) {
  EXPECT_THROW(centering(iid(irrational_coin()), -3), NoConstructiveCentering);
  EXPECT_THROW(centering(roulette(), -3), NoConstructiveCentering);
  const MeasureSequence zero_mean_prefix({coin()}, TailRule::iid(TorusMeasure::dirac(0.0)));
  EXPECT_THROW(centering(zero_mean_prefix, -2), NoConstructiveCentering);
  EXPECT_FALSE(has_constructive_centering(iid(irrational_coin())));
  EXPECT_TRUE(has_constructive_centering(iid(TorusMeasure::dirac(0.2))));
}
