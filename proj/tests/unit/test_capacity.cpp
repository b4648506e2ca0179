#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cfluct/capacity.hpp"
#include "cfluct/clean_models.hpp"
#include "cfluct/errors.hpp"
#include "cfluct/random.hpp"

using namespace cfluct;

namespace {

ProcessMatrix harmonic(double p1, double p2, double p3, std::size_t d) {
  return build_harmonic_reduced(HarmonicCleanModel(AmplitudeVector3::from_probabilities(p1, p2, p3), d));
}

// Independent brute-force search over m using the fidelity formula.
std::size_t brute_dimension(double p, double eps, std::size_t d) {
  std::size_t best = 1;
  for (std::size_t m = 1; m <= d; ++m) {
    const double f = p + (1.0 - p) / static_cast<double>(m * m);
    if (f >= 1.0 - eps - kFidelitySlack) best = m;
  }
  return best;
}

}  // namespace

TEST(ClosedForm, WorkedExamples) {
  EXPECT_DOUBLE_EQ(q_ent_closed_form({0.99, 0.02, 4}), 2.0);
  EXPECT_DOUBLE_EQ(q_ent_closed_form({0.5, 0.0, 4}), 0.0);
  EXPECT_DOUBLE_EQ(q_ent_closed_form({0.5, 0.4, 4}), 1.0);
  EXPECT_DOUBLE_EQ(q_ent_closed_form({1.0, 0.0, 3}), std::log2(3.0));
  EXPECT_DOUBLE_EQ(q_ent_closed_form({0.0, 0.0, 3}), 0.0);
}

TEST(ClosedForm, MatchesBruteForceOnGrid) {
  std::size_t mismatches = 0;
  for (int pi = 0; pi <= 100; ++pi)
    for (int ei = 0; ei <= 100; ++ei)
      for (std::size_t d : {2u, 3u, 4u, 7u}) {
        const double p = pi / 100.0;
        const double eps = ei / 100.0;
        if (q_ent_dimension({p, eps, d}) != brute_dimension(p, eps, d)) ++mismatches;
      }
  EXPECT_EQ(mismatches, 0u);
}

TEST(ClosedForm, MonotoneInPAndEps) {
  for (std::size_t d : {2u, 4u})
    for (int pi = 0; pi < 20; ++pi)
      for (int ei = 0; ei < 20; ++ei) {
        const double p = pi / 20.0;
        const double eps = ei / 20.0;
        const double c = q_ent_closed_form({p, eps, d});
        EXPECT_LE(c, q_ent_closed_form({p + 0.05, eps, d}));
        EXPECT_LE(c, q_ent_closed_form({p, eps + 0.05, d}));
        EXPECT_LE(c, std::log2(static_cast<double>(d)));
      }
}

TEST(ClosedForm, ZeroThreshold) {
  EXPECT_NEAR(q_ent_zero_threshold(0.3), 0.6, 1e-15);
  EXPECT_THROW(q_ent_zero_threshold(0.8), DomainError);
  for (int pi = 0; pi <= 20; ++pi)
    for (int ei = 0; ei < 15; ++ei) {
      const double p = pi / 20.0;
      const double eps = ei / 20.0;
      const bool zero = q_ent_closed_form({p, eps, 2}) == 0.0;
      const double t = q_ent_zero_threshold(eps);
      if (std::abs(p - t) > 1e-9) EXPECT_EQ(zero, p < t) << p << " " << eps;
    }
}

TEST(ClosedForm, RejectsBadQuery) {
  EXPECT_THROW(q_ent_closed_form({1.2, 0.0, 2}), DomainError);
  EXPECT_THROW(q_ent_closed_form({0.5, -0.1, 2}), DomainError);
  EXPECT_THROW(q_ent_closed_form({0.5, 0.1, 0}), DimError);
}

TEST(Oracle, HarmonicFidelityIsExact) {
  for (std::size_t d : {2u, 3u}) {
    const ProcessMatrix w = harmonic(0.3, 0.5, 0.2, d);
    for (std::size_t m = 1; m <= d; ++m) {
      EXPECT_NEAR(fidelity_oracle(w, Direction::forward, m), harmonic_probe_fidelity(0.3, m), 1e-9);
      EXPECT_NEAR(fidelity_oracle(w, Direction::backward, m), harmonic_probe_fidelity(0.5, m), 1e-9);
    }
  }
}

TEST(Oracle, IndependentOfInitialState) {
  Rng rng(12);
  const HarmonicCleanModel m(AmplitudeVector3::from_probabilities(0.6, 0.1, 0.3), 2, 3, random_unit_vector(12, rng));
  const ProcessMatrix w = build_harmonic_reduced(m);
  EXPECT_NEAR(fidelity_oracle(w, Direction::forward, 2), harmonic_probe_fidelity(0.6, 2), 1e-9);
}

TEST(Oracle, RejectsOversizedProbe) {
  const ProcessMatrix w = harmonic(1, 0, 0, 2);
  EXPECT_EQ(probe_limit(w, Direction::forward), 2u);
  EXPECT_THROW(fidelity_oracle(w, Direction::forward, 3), DimError);
}

TEST(Fit, RecoversHarmonicParameters) {
  Rng rng(14);
  for (int k = 0; k < 5; ++k) {
    const HarmonicCleanModel m(random_amplitudes(rng), 2, 2, random_unit_vector(8, rng));
    const auto s = fit_harmonic(build_harmonic_reduced(m));
    ASSERT_TRUE(s.has_value());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s->p[i], m.alpha.probability(i), 1e-9);
  }
}

TEST(Fit, RejectsPartialSwap) {
  // A maximally mixed rho with N = id would happen to be harmonic.
  Rng rng(15);
  PartialSwapModel m;
  m.p = 0.5;
  m.wire_dim = 2;
  m.rho = random_density_matrix(4, 4, rng);
  m.channel_n = {Matrix::Identity(2, 2)};
  const ProcessMatrix w = build_partial_swap(m);
  EXPECT_FALSE(fit_harmonic(w).has_value());
  EXPECT_THROW(CapacityMeasure::from_process(w, false), ModelClassError);
  const CapacityMeasure s = CapacityMeasure::from_process(w, true);
  EXPECT_EQ(s.method(), CapacityMethod::probe_staircase);
  EXPECT_EQ(s.capacity(Direction::backward, 0.1), 0.0);
}

TEST(Measure, StaircaseAgreesWithClosedForm) {
  const ProcessMatrix w = harmonic(0.7, 0.2, 0.1, 2);
  const CapacityMeasure closed = CapacityMeasure::from_process(w, false);
  const CapacityMeasure stair = CapacityMeasure::staircase(w);
  EXPECT_EQ(closed.method(), CapacityMethod::closed_form);
  for (double eps : eps_grid(0.0, 0.74, 0.01))
    for (Direction d : {Direction::forward, Direction::backward})
      EXPECT_EQ(closed.capacity(d, eps), stair.capacity(d, eps)) << eps;
}

TEST(Grid, ParsesAndRounds) {
  const auto g = parse_eps_grid("0:0.75:0.05");
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g[3], 0.15);
  EXPECT_EQ(g.back(), 0.75);
  EXPECT_THROW(parse_eps_grid("0:x:0.1"), ParseError);
  EXPECT_THROW(parse_eps_grid("0:1"), ParseError);
  EXPECT_THROW(eps_grid(0.5, 0.1, 0.1), DomainError);
}

TEST(Curves, CsvRoundTrip) {
  const CapacityMeasure m = CapacityMeasure::from_summary({{0.3, 0.4, 0.3}, 4, 4});
  const auto g = eps_grid(0.0, 0.75, 0.05);
  const std::vector<CapacityCurve> curves{generate_curve(m, Direction::forward, g),
                                          generate_curve(m, Direction::backward, g)};
  std::stringstream ss;
  write_curves_csv(ss, curves);
  EXPECT_EQ(ss.str().substr(0, 29), "direction,eps,capacity_bits\nf");
  const auto back = read_curves_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t c = 0; c < 2; ++c) {
    ASSERT_EQ(back[c].points.size(), g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(back[c].points[i].eps, g[i], 1e-12);
      EXPECT_NEAR(back[c].points[i].bits, curves[c].points[i].bits, 1e-11);
    }
  }
  std::istringstream bad("direction,eps,capacity_bits\nforward,0.1\n");
  EXPECT_THROW(read_curves_csv(bad), InversionError);
}

TEST(Inversion, RecoversParametersAndDimension) {
  Rng rng(5);
  const auto g = eps_grid(0.0, 1.0, 1e-3);
  for (int k = 0; k < 5; ++k) {
    const auto a = random_amplitudes(rng);
    const std::array<double, 3> p{a.probability(0), a.probability(1), a.probability(2)};
    const CapacityMeasure m = CapacityMeasure::from_summary({p, 4, 4});
    const InversionResult r =
        invert_capacity_curves(generate_curve(m, Direction::forward, g), generate_curve(m, Direction::backward, g));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.p[i], p[i], 2e-3);
    ASSERT_TRUE(r.forward_dim.has_value());
    EXPECT_EQ(*r.forward_dim, 4u);
    EXPECT_EQ(r.backward_dim.value_or(0), 4u);
    EXPECT_NEAR(r.abs_alpha[0], std::sqrt(r.p[0]), 1e-15);
  }
}

TEST(Inversion, RejectsInconsistentCurve) {
  CapacityCurve f{Direction::forward, {{0.0, 1.0}, {0.1, 0.0}}};
  CapacityCurve b{Direction::backward, {{0.0, 0.0}, {0.1, 0.0}}};
  EXPECT_THROW(invert_capacity_curves(f, b), InversionError);
}

TEST(Inversion, NoConnectionLeavesDimsUndetermined) {
  const CapacityMeasure m = CapacityMeasure::from_summary({{0.0, 0.0, 1.0}, 2, 2});
  const auto g = eps_grid(0.0, 0.7, 0.01);
  const InversionResult r =
      invert_capacity_curves(generate_curve(m, Direction::forward, g), generate_curve(m, Direction::backward, g));
  EXPECT_NEAR(r.p[2], 1.0, 1e-12);
  EXPECT_FALSE(r.forward_dim.has_value());
}

TEST(Axioms, HoldOnRandomHarmonicModels) {
  Rng rng(20);
  const auto eps = eps_grid(0.0, 0.7, 0.1);
  for (int k = 0; k < 2; ++k) {
    const ProcessMatrix w = build_harmonic_reduced(HarmonicCleanModel(random_amplitudes(rng), 2));
    std::vector<LocalOperationPair> ops;
    for (int j = 0; j < 2; ++j) ops.push_back(random_local_operations(2, rng));
    const AxiomReport r = axiom_suite(w, ops, eps);
    EXPECT_TRUE(r.ok());
    EXPECT_GT(r.checks, 0u);
  }
}

TEST(Axioms, RejectEpsAboveThreeQuarters) {
  const ProcessMatrix w = harmonic(1, 0, 0, 2);
  const std::vector<double> eps{0.75};
  EXPECT_THROW(axiom_suite(w, {}, eps), DomainError);
}

TEST(Direction, Parses) {
  EXPECT_EQ(parse_direction("backward"), Direction::backward);
  EXPECT_THROW((void)parse_direction("sideways"), ParseError);
}
