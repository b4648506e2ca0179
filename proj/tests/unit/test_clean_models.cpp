#include <gtest/gtest.h>

#include <cmath>

#include "cfluct/clean_models.hpp"
#include "cfluct/errors.hpp"
#include "cfluct/random.hpp"
#include "oracles.hpp"

using namespace cfluct;

TEST(Amplitudes, RejectsDenormalized) {
  EXPECT_THROW(AmplitudeVector3(0.9, 0, 0), NormError);
  EXPECT_NO_THROW(AmplitudeVector3(cplx(0, 1), 0, 0));
  const auto a = AmplitudeVector3::from_probabilities(0.2, 0.3, 0.5);
  EXPECT_NEAR(a.probability(1), 0.3, 1e-15);
}

TEST(Harmonic, BranchReductionsAreTheWi) {
  Rng rng(2);
  const std::size_t d = 2;
  const HarmonicCleanModel m(AmplitudeVector3(1, 0, 0), d, 2, random_unit_vector(8, rng));
  const LabeledVector psi = m.psi_vector();
  const std::vector<std::string> env{"e1", "e2", "e3"};
  for (int i = 1; i <= 3; ++i) {
    const LabeledOperator reduced = harmonic_branch_vector(i, psi, d).reduced(env);
    EXPECT_LT(max_abs_diff(reduced, build_w_i(i, psi, d).op()), 1e-13) << "branch " << i;
  }
}

TEST(Harmonic, PurifiedReducesToMixture) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const HarmonicCleanModel m(random_amplitudes(rng), 2, 2, random_unit_vector(8, rng));
    const ProcessMatrix g = build_harmonic_purified(m);
    EXPECT_EQ(g.parties().size(), 3u);
    const ProcessMatrix ab = discard_party(g, "G");
    EXPECT_LT(max_abs_diff(ab.op(), build_harmonic_reduced(m).op()), 1e-10);
  }
}

TEST(Harmonic, W1HasIdentityWireExplicitly) {
  // rho^{a1} (x) Phi^{a2 b1} (x) pi^{b2} built by hand.
  const std::size_t d = 2;
  const HarmonicCleanModel m(AmplitudeVector3(1, 0, 0), d);
  oracle::Mat rho = oracle::Mat::Zero(2, 2);
  rho(0, 0) = 1.0;
  oracle::Mat phi = oracle::Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi(i * 2 + i, j * 2 + j) = 0.5;
  const oracle::Mat expected = oracle::kron(oracle::kron(rho, phi), oracle::Mat::Identity(2, 2) / 2.0);
  const LabeledOperator w = build_harmonic_reduced(m).op();
  const std::vector<std::string> order{"a1", "a2", "b1", "b2"};
  EXPECT_LT((permute(w, order).matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Harmonic, RejectsBadInitialState) {
  EXPECT_THROW(HarmonicCleanModel(AmplitudeVector3(1, 0, 0), 2, 1, Vector::Ones(3)), DimError);
  EXPECT_THROW(HarmonicCleanModel(AmplitudeVector3(1, 0, 0), 2, 1, Vector::Ones(4)), NormError);
}

namespace {

std::array<PartySpec, 2> ab() { return harmonic_parties(2); }

std::vector<CleanBranch> two_branches(CausalRelation first) {
  const LabeledVector psi = HarmonicCleanModel(AmplitudeVector3(1, 0, 0), 2).psi_vector();
  return {CleanBranch{harmonic_branch_vector(1, psi, 2), first},
          CleanBranch{harmonic_branch_vector(3, psi, 2), CausalRelation::no_relation}};
}

}  // namespace

TEST(CleanGeneral, BuildsFromDeclaredBranches) {
  const auto branches = two_branches(CausalRelation::a_before_b);
  const std::vector<cplx> amps{std::sqrt(0.5), cplx(0, std::sqrt(0.5))};
  const ProcessMatrix w = build_clean_general(amps, branches, ab());
  EXPECT_TRUE(validate_process(w).valid());
  const HarmonicCleanModel h(AmplitudeVector3(std::sqrt(0.5), 0, cplx(0, std::sqrt(0.5))), 2);
  EXPECT_LT(max_abs_diff(discard_party(w, "G").op(), build_harmonic_reduced(h).op()), 1e-12);
}

TEST(CleanGeneral, RejectsMislabeledBranch) {
  const auto branches = two_branches(CausalRelation::b_before_a);
  const std::vector<cplx> amps{std::sqrt(0.5), std::sqrt(0.5)};
  EXPECT_THROW(build_clean_general(amps, branches, ab()), BranchRelationError);
}

TEST(CleanGeneral, RejectsDenormalizedAmplitudes) {
  const auto branches = two_branches(CausalRelation::a_before_b);
  const std::vector<cplx> amps{0.5, 0.5};
  EXPECT_THROW(build_clean_general(amps, branches, ab()), NormError);
}

namespace {

// Analytic endpoint processes on (a1, a2, b1, b2).
oracle::Mat swap_endpoint(double p, const Matrix& rho, const std::vector<Matrix>& n) {
  const oracle::Mat pi = oracle::Mat::Identity(2, 2) / 2.0;
  if (p == 0.0) {
    // rho on (a1, b1), pi on a2 and b2: kron order (a1, b1, a2, b2) -> (a1, a2, b1, b2).
    const oracle::Mat x = oracle::kron(oracle::kron(rho, pi), pi);
    return oracle::permute(x, {2, 2, 2, 2}, {0, 2, 1, 3});
  }
  const oracle::Mat rho_a1 = oracle::partial_trace(rho, {2, 2}, {1});
  oracle::Mat phi = oracle::Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi(i * 2 + i, j * 2 + j) = 0.5;
  oracle::Mat wire = oracle::Mat::Zero(4, 4);
  for (const auto& k : n) {
    const oracle::Mat big = oracle::kron(oracle::Mat::Identity(2, 2), k);
    wire += big * phi * big.adjoint();
  }
  return oracle::kron(oracle::kron(rho_a1, wire), pi);
}

}  // namespace

TEST(PartialSwap, EndpointsMatchAnalyticProcesses) {
  Rng rng(31);
  PartialSwapModel m;
  m.wire_dim = 2;
  m.rho = random_density_matrix(4, 4, rng);
  m.channel_n = random_channel(2, 2, 2, rng);
  const std::vector<std::string> order{"a1", "a2", "b1", "b2"};
  for (double p : {0.0, 1.0}) {
    m.p = p;
    const LabeledOperator w = permute(build_partial_swap(m).op(), order);
    EXPECT_LT((w.matrix() - swap_endpoint(p, m.rho, m.channel_n)).cwiseAbs().maxCoeff(), 1e-10) << "p = " << p;
  }
}

TEST(PartialSwap, UnitaryIsUnitary) {
  for (double p : {0.0, 0.3, 1.0}) {
    const Matrix v = partial_swap_unitary(p, 3);
    EXPECT_LT((v.adjoint() * v - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PartialSwap, RejectsBadParameters) {
  PartialSwapModel m;
  m.p = 1.5;
  m.rho = Matrix::Identity(4, 4) / 4.0;
  m.channel_n = {Matrix::Identity(2, 2)};
  EXPECT_THROW(build_partial_swap(m), DomainError);
  m.p = 0.5;
  m.channel_n = {Matrix::Identity(2, 2) * 0.5};
  EXPECT_THROW(build_partial_swap(m), NormError);
}
