#include "cfluct/sectors.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "cfluct/errors.hpp"

namespace cfluct {

double ExactProbability::value() const {
  if (n <= 0) throw DomainError("exact probability needs a positive denominator");
  return static_cast<double>(k) / static_cast<double>(n) - static_cast<double>(m) * 1e-10;
}

namespace {

void check_table(const Matrix3c& a, const Matrix3d& p) {
  if (a(0, 1) != cplx(0.0) || a(1, 0) != cplx(0.0))
    throw ConstraintViolation(fmt::format("amplitudes for opposite orders in the two sectors must vanish, got "
                                          "a12 = {:.3g}, a21 = {:.3g}",
                                          std::abs(a(0, 1)), std::abs(a(1, 0))));
  if ((p.array() < 0.0).any()) throw NormError("negative probability in the sector table");
  const double total = p.sum();
  if (std::abs(total - 1.0) > kNormTol)
    throw NormError(fmt::format("sector probabilities sum to {:.15g}, expected 1", total));
}

}  // namespace

SectoredAmplitudes::SectoredAmplitudes(const Matrix3c& a) : a_(a), p_(a.cwiseAbs2()) { check_table(a_, p_); }

SectoredAmplitudes::SectoredAmplitudes(const Matrix3c& a, const Matrix3d& p) : a_(a), p_(p) { check_table(a_, p_); }

SectoredAmplitudes SectoredAmplitudes::from_probabilities(const Matrix3d& p) {
  if ((p.array() < 0.0).any()) throw NormError("negative probability in the sector table");
  const Matrix3c a = p.cwiseSqrt().cast<cplx>();
  return {a, p};
}

SectoredAmplitudes SectoredAmplitudes::from_exact(const ExactTable& table) {
  Matrix3d p;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p(i, j) = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value();
  return from_probabilities(p);
}

std::pair<Probabilities3, Probabilities3> marginal_probabilities(const SectoredAmplitudes& amps) {
  const Matrix3d& p = amps.probabilities();
  Probabilities3 ml{}, mv{};
  for (int i = 0; i < 3; ++i) {
    ml[static_cast<std::size_t>(i)] = p.row(i).sum();
    mv[static_cast<std::size_t>(i)] = p.col(i).sum();
  }
  return {ml, mv};
}

ExactTable typical_example_table() {
  return {{{{{1, 3, 1}, {0, 1, 0}, {1, 6, 1}}},
           {{{0, 1, 0}, {1, 3, 1}, {1, 6, 1}}},
           {{{0, 1, -1}, {0, 1, -1}, {0, 1, -2}}}}};
}

ExactTable atypical_example_table() {
  return {{{{{0, 1, -1}, {0, 1, 0}, {1, 2, 3}}},
           {{{0, 1, 0}, {0, 1, -1}, {1, 2, 3}}},
           {{{0, 1, -1}, {0, 1, -1}, {0, 1, -2}}}}};
}

HarmonicLabels sector_labels(Sector s) {
  return HarmonicLabels::with_suffix(s == Sector::massless ? "_ml" : "_mv");
}

std::array<PartySpec, 2> sectored_parties(std::size_t massless_dim, std::size_t massive_dim) {
  const HarmonicLabels ml = sector_labels(Sector::massless);
  const HarmonicLabels mv = sector_labels(Sector::massive);
  return {PartySpec::sectored("A", {ml.a1, massless_dim}, {mv.a1, massive_dim}, {ml.a2, massless_dim},
                              {mv.a2, massive_dim}),
          PartySpec::sectored("B", {ml.b1, massless_dim}, {mv.b1, massive_dim}, {ml.b2, massless_dim},
                              {mv.b2, massive_dim})};
}

namespace {

PartySpec restrict_party(const PartySpec& p, Sector keep) {
  if (!p.is_sectored()) throw SectorError(fmt::format("party {} is not sectored", p.name));
  PartySpec out{p.name, {}, {}, {}, {}};
  for (std::size_t k = 0; k < p.inputs.size(); ++k)
    if (p.input_sectors[k] == keep) out.inputs.push_back(p.inputs[k]);
  for (std::size_t k = 0; k < p.outputs.size(); ++k)
    if (p.output_sectors[k] == keep) out.outputs.push_back(p.outputs[k]);
  return out;
}

std::vector<std::string> dropped_labels(const PartySpec& p, Sector keep) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < p.inputs.size(); ++k)
    if (p.input_sectors[k] != keep) out.push_back(p.inputs[k].name);
  for (std::size_t k = 0; k < p.outputs.size(); ++k)
    if (p.output_sectors[k] != keep) out.push_back(p.outputs[k].name);
  return out;
}

LabeledVector initial_state(std::size_t d, const std::optional<Vector>& psi) {
  std::size_t e3 = 1;
  if (psi) {
    const auto n = static_cast<std::size_t>(psi->size());
    if (n % (d * d) != 0) throw DimError(fmt::format("initial state length {} is not a multiple of {}", n, d * d));
    e3 = n / (d * d);
  }
  return HarmonicCleanModel(AmplitudeVector3(1.0, 0.0, 0.0), d, e3, psi).psi_vector();
}

constexpr std::array<CausalRelation, 3> kHarmonicRelations{CausalRelation::a_before_b, CausalRelation::b_before_a,
                                                           CausalRelation::no_relation};

}  // namespace

SectorBranches harmonic_sector_branches(std::size_t massless_dim, std::size_t massive_dim,
                                        const std::optional<Vector>& psi_massless,
                                        const std::optional<Vector>& psi_massive) {
  const LabeledVector psi_ml = initial_state(massless_dim, psi_massless);
  const LabeledVector psi_mv = initial_state(massive_dim, psi_massive);
  const HarmonicLabels ml = sector_labels(Sector::massless);
  const HarmonicLabels mv = sector_labels(Sector::massive);
  const auto make = [](const LabeledVector& psi, std::size_t d, const HarmonicLabels& l) {
    return std::array<CleanBranch, 3>{CleanBranch{harmonic_branch_vector(1, psi, d, l), kHarmonicRelations[0]},
                                      CleanBranch{harmonic_branch_vector(2, psi, d, l), kHarmonicRelations[1]},
                                      CleanBranch{harmonic_branch_vector(3, psi, d, l), kHarmonicRelations[2]}};
  };
  return {make(psi_ml, massless_dim, ml), make(psi_mv, massive_dim, mv)};
}

ProcessMatrix build_sectored_noninteracting(const SectoredAmplitudes& amps, const SectorBranches& branches,
                                            const std::array<PartySpec, 2>& parties) {
  const std::array<PartySpec, 2> ml_parties{restrict_party(parties[0], Sector::massless),
                                            restrict_party(parties[1], Sector::massless)};
  const std::array<PartySpec, 2> mv_parties{restrict_party(parties[0], Sector::massive),
                                            restrict_party(parties[1], Sector::massive)};
  for (const auto& b : branches.massless) check_branch(b, ml_parties);
  for (const auto& b : branches.massive) check_branch(b, mv_parties);

  const auto ml_order = branches.massless[0].vector.registry().names();
  const auto mv_order = branches.massive[0].vector.registry().names();
  const Registry g_ml{{"g_ml", 3}};
  const Registry g_mv{{"g_mv", 3}};

  Vector acc;
  Registry reg;
  bool first = true;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const cplx a = amps.amplitudes()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const std::array<LabeledVector, 4> parts{LabeledVector::basis(g_ml, i), LabeledVector::basis(g_mv, j),
                                               permute(branches.massless[i].vector, ml_order),
                                               permute(branches.massive[j].vector, mv_order)};
      const LabeledVector term = tensor(std::span<const LabeledVector>(parts));
      if (first) {
        reg = term.registry();
        acc = a * term.vector();
        first = false;
      } else {
        acc += a * term.vector();
      }
    }
  const LabeledVector v(reg, std::move(acc));

  std::vector<std::string> env;
  for (const auto& n : reg.names()) {
    if (n == "g_ml" || n == "g_mv") continue;
    bool owned = false;
    for (const auto& p : parties)
      for (const auto& own : p.label_names()) owned = owned || own == n;
    if (!owned) env.push_back(n);
  }
  PartySpec g{"G", {{"g_ml", 3}, {"g_mv", 3}}, {}, {}, {}};
  return ProcessMatrix({g, parties[0], parties[1]}, v.reduced(env));
}

ProcessMatrix build_sectored_harmonic_reduced(const SectoredAmplitudes& amps, std::size_t massless_dim,
                                              std::size_t massive_dim, const std::optional<Vector>& psi_massless,
                                              const std::optional<Vector>& psi_massive) {
  const LabeledVector psi_ml = initial_state(massless_dim, psi_massless);
  const LabeledVector psi_mv = initial_state(massive_dim, psi_massive);
  const HarmonicLabels ml = sector_labels(Sector::massless);
  const HarmonicLabels mv = sector_labels(Sector::massive);
  std::array<LabeledOperator, 3> w_ml, w_mv;
  for (int i = 0; i < 3; ++i) {
    w_ml[static_cast<std::size_t>(i)] = build_w_i(i + 1, psi_ml, massless_dim, ml).op();
    w_mv[static_cast<std::size_t>(i)] = build_w_i(i + 1, psi_mv, massive_dim, mv).op();
  }
  Matrix acc;
  Registry reg;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const LabeledOperator term = tensor(w_ml[i], w_mv[j]);
      const double p = amps.probabilities()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (i == 0 && j == 0) {
        reg = term.registry();
        acc = p * term.matrix();
      } else {
        acc += p * term.matrix();
      }
    }
  const auto parties = sectored_parties(massless_dim, massive_dim);
  return ProcessMatrix({parties[0], parties[1]}, LabeledOperator(reg, std::move(acc)));
}

ProcessMatrix reduce_sector(const ProcessMatrix& w, Sector keep) {
  std::vector<PartySpec> kept;
  std::vector<std::string> drop;
  for (const auto& p : w.parties()) {
    kept.push_back(restrict_party(p, keep));
    for (auto& n : dropped_labels(p, keep)) drop.push_back(std::move(n));
  }
  return ProcessMatrix(std::move(kept), partial_trace(w.op(), drop));
}

}  // namespace cfluct
