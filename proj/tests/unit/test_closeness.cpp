#include <gtest/gtest.h>

#include "cfluct/closeness.hpp"
#include "cfluct/errors.hpp"
#include "cfluct/random.hpp"

using namespace cfluct;

namespace {

CapacityMeasure summary(double p1, double p2, std::size_t d) {
  return CapacityMeasure::from_summary({{p1, p2, 1.0 - p1 - p2}, d, d});
}

}  // namespace

TEST(Criterion, DefaultValues) {
  const auto c = ClosenessCriterion::default_criterion();
  EXPECT_EQ(c.forward.at(0.01), 2.0);
  EXPECT_EQ(c.backward.at(0.01), 3.0);
  EXPECT_NO_THROW(c.check());
  ClosenessCriterion bad{{{0.01, -1.0}}, {{0.01, 1.0}}};
  EXPECT_THROW(bad.check(), DomainError);
  ClosenessCriterion empty{{}, {{0.01, 1.0}}};
  EXPECT_THROW(empty.check(), DomainError);
}

TEST(Closeness, ReflexiveAndSymmetric) {
  Rng rng(3);
  const ClosenessCriterion tight{{{0.01, 0.0}, {0.3, 0.0}}, {{0.01, 0.0}}};
  for (int k = 0; k < 10; ++k) {
    const auto a = random_amplitudes(rng);
    const auto b = random_amplitudes(rng);
    const auto z = summary(a.probability(0), a.probability(1), 4);
    const auto w = summary(b.probability(0), b.probability(1), 4);
    EXPECT_TRUE(are_close(z, z, tight).close);
    EXPECT_EQ(are_close(z, w, tight).close, are_close(w, z, tight).close);
  }
}

TEST(Closeness, LargeWireGapIsNotClose) {
  const auto c = ClosenessCriterion::default_criterion();
  const ClosenessReport r = are_close(summary(1.0, 0.0, 16), summary(0.0, 0.0, 16), c);
  EXPECT_FALSE(r.close);
  ASSERT_FALSE(r.entries.empty());
  EXPECT_EQ(r.entries[0].capacity_z, 4.0);
  EXPECT_EQ(r.entries[0].capacity_w, 0.0);
  EXPECT_FALSE(r.entries[0].within);
}

TEST(Closeness, SmallWiresAlwaysCloseUnderDefault) {
  const auto c = ClosenessCriterion::default_criterion();
  EXPECT_TRUE(are_close(summary(1.0, 0.0, 2), summary(0.0, 1.0, 2), c).close);
}

TEST(Closeness, RejectsUnequalDimensions) {
  const auto c = ClosenessCriterion::default_criterion();
  EXPECT_THROW(are_close(summary(0.5, 0.2, 2), summary(0.5, 0.2, 4), c), DimError);
}

TEST(Closeness, ProcessOverloadMatchesSummaries) {
  const auto c = ClosenessCriterion{{{0.01, 0.0}}, {{0.01, 0.0}}};
  const auto pz = build_harmonic_reduced(HarmonicCleanModel(AmplitudeVector3::from_probabilities(0.999, 0, 0.001), 2));
  const auto pw = build_harmonic_reduced(HarmonicCleanModel(AmplitudeVector3::from_probabilities(0.4, 0.3, 0.3), 2));
  const ClosenessReport a = are_close(pz, pw, c);
  const ClosenessReport b = are_close(summary(0.999, 0, 2), summary(0.4, 0.3, 2), c);
  EXPECT_EQ(a.close, b.close);
  EXPECT_EQ(a.method_z, CapacityMethod::closed_form);
}

TEST(Closeness, SectorRestrictionMatchesTrivialSector) {
  Rng rng(6);
  const auto c = ClosenessCriterion{{{0.05, 0.0}, {0.4, 0.0}}, {{0.05, 0.0}}};
  const auto a = random_sectored_amplitudes(rng);
  const auto b = random_sectored_amplitudes(rng);
  const auto wa = build_sectored_harmonic_reduced(a, 2, 2);
  const auto wb = build_sectored_harmonic_reduced(b, 2, 2);
  const auto [mla, mva] = marginal_probabilities(a);
  const auto [mlb, mvb] = marginal_probabilities(b);
  EXPECT_EQ(are_close_in_sector(wa, wb, Sector::massless, c).close,
            are_close(summary(mla[0], mla[1], 2), summary(mlb[0], mlb[1], 2), c).close);
  EXPECT_EQ(are_close_in_sector(wa, wb, Sector::massive, c).close,
            are_close(summary(mva[0], mva[1], 2), summary(mvb[0], mvb[1], 2), c).close);
}

TEST(Calibration, InheritsOrStaysUncalibrated) {
  const auto typical = SectoredAmplitudes::from_exact(typical_example_table());
  const TypicalityVerdict v = classify(typical, Condition::V);
  const auto [ml, mv] = marginal_probabilities(typical);
  const auto ref = CapacityMeasure::from_summary({ml, 2, 2});
  const auto tight = ClosenessCriterion{{{0.4, 0.0}}, {{0.4, 0.0}}};
  const CalibratedVerdict same = calibrate_typicality(ref, ref, v, tight);
  EXPECT_EQ(same.status, CalibrationStatus::typical);
  EXPECT_NE(same.provenance.find("inherited"), std::string::npos);
  const CalibratedVerdict far = calibrate_typicality(summary(0, 0, 2), ref, v, tight);
  EXPECT_EQ(far.status, CalibrationStatus::uncalibrated);
}

TEST(SelfTest, CoarseCriterionIsRejected) {
  // At d = 2 the default thresholds exceed every possible gap, so every
  // sample counts as close to the reference.
  const auto typical = SectoredAmplitudes::from_exact(typical_example_table());
  const ThresholdSelfTest t =
      threshold_self_test(ClosenessCriterion::default_criterion(), typical, 2, 2, Condition::V);
  EXPECT_EQ(t.samples, 100u);
  EXPECT_EQ(t.close_to_reference, 100u);
  EXPECT_GT(t.disagreeing, 0u);
  EXPECT_FALSE(t.accepted());
}

TEST(SelfTest, IsDeterministicPerSeed) {
  const auto typical = SectoredAmplitudes::from_exact(typical_example_table());
  const auto c = ClosenessCriterion{{{0.01, 0.0}, {0.3, 0.0}}, {{0.01, 0.0}}};
  const ThresholdSelfTest a = threshold_self_test(c, typical, 4, 4, Condition::V, {}, 40, 9);
  const ThresholdSelfTest b = threshold_self_test(c, typical, 4, 4, Condition::V, {}, 40, 9);
  EXPECT_EQ(a.close_to_reference, b.close_to_reference);
  EXPECT_EQ(a.disagreeing, b.disagreeing);
  EXPECT_LE(a.disagreeing, a.close_to_reference);
}
