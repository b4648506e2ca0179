#include "cfluct/clean_models.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "cfluct/errors.hpp"

namespace cfluct {

AmplitudeVector3::AmplitudeVector3(cplx a1, cplx a2, cplx a3) : amps_{a1, a2, a3} {
  const double total = std::norm(a1) + std::norm(a2) + std::norm(a3);
  if (std::abs(total - 1.0) > kNormTol)
    throw NormError(fmt::format("amplitudes have squared norm {:.15g}, expected 1", total));
}

AmplitudeVector3 AmplitudeVector3::from_probabilities(double p1, double p2, double p3) {
  if (p1 < 0 || p2 < 0 || p3 < 0) throw NormError("probabilities must be non-negative");
  return {std::sqrt(p1), std::sqrt(p2), std::sqrt(p3)};
}

std::array<double, 3> AmplitudeVector3::probabilities() const {
  return {probability(0), probability(1), probability(2)};
}

HarmonicLabels HarmonicLabels::with_suffix(const std::string& suffix) {
  HarmonicLabels l;
  for (std::string* s : {&l.a1, &l.a2, &l.b1, &l.b2, &l.e1, &l.e2, &l.e3, &l.g}) *s += suffix;
  return l;
}

HarmonicCleanModel::HarmonicCleanModel(AmplitudeVector3 alpha_, std::size_t wire_dim_, std::size_t e3_dim_,
                                       std::optional<Vector> psi_)
    : alpha(alpha_), wire_dim(wire_dim_), e3_dim(e3_dim_) {
  const auto n = static_cast<Eigen::Index>(wire_dim * wire_dim * e3_dim);
  if (psi_) {
    psi = *psi_;
  } else {
    psi = Vector::Zero(n);
    if (n > 0) psi(0) = 1.0;
  }
  check();
}

void HarmonicCleanModel::check() const {
  if (wire_dim == 0 || e3_dim == 0) throw DimError("harmonic model dimensions must be positive");
  const auto n = static_cast<Eigen::Index>(wire_dim * wire_dim * e3_dim);
  if (psi.size() != n)
    throw DimError(fmt::format("initial state has length {}, expected {}x{}x{} = {}", psi.size(), wire_dim, wire_dim,
                               e3_dim, n));
  if (std::abs(psi.squaredNorm() - 1.0) > kNormTol) throw NormError("initial state is not normalized");
}

LabeledVector HarmonicCleanModel::psi_vector() const {
  return {Registry{{"x", wire_dim}, {"y", wire_dim}, {"e3", e3_dim}}, psi};
}

std::array<PartySpec, 2> harmonic_parties(std::size_t wire_dim, const HarmonicLabels& l) {
  return {PartySpec::simple("A", {l.a1, wire_dim}, {l.a2, wire_dim}),
          PartySpec::simple("B", {l.b1, wire_dim}, {l.b2, wire_dim})};
}

namespace {

LabeledVector wire(const std::string& x, const std::string& y, std::size_t d) {
  return LabeledVector::max_entangled(Registry{{x, d}}, Registry{{y, d}});
}

LabeledVector place_psi(const LabeledVector& psi, const std::string& x, const std::string& y,
                        const std::string& e3) {
  const auto names = psi.registry().names();
  if (names.size() != 3) throw DimError("initial state must live on three subsystems (x, y, e3)");
  const std::vector<std::pair<std::string, std::string>> renames{{names[0], "__x"}, {names[1], "__y"}, {names[2], "__e"}};
  const LabeledVector tmp = relabel(psi, renames);
  const std::vector<std::pair<std::string, std::string>> final_names{{"__x", x}, {"__y", y}, {"__e", e3}};
  return relabel(tmp, final_names);
}

std::vector<std::string> ab_order(const HarmonicLabels& l) { return {l.a1, l.a2, l.b1, l.b2}; }

}  // namespace

LabeledVector harmonic_branch_vector(int branch, const LabeledVector& psi, std::size_t d, const HarmonicLabels& l) {
  const auto& reg = psi.registry().labels();
  if (reg.size() != 3 || reg[0].dim != d || reg[1].dim != d)
    throw DimError(fmt::format("initial state must be on (x, y, e3) with |x| = |y| = {}", d));
  std::vector<LabeledVector> parts;
  switch (branch) {
    case 1:
      parts = {place_psi(psi, l.a1, l.e2, l.e3), wire(l.a2, l.b1, d), wire(l.b2, l.e1, d)};
      break;
    case 2:
      parts = {place_psi(psi, l.e1, l.b1, l.e3), wire(l.b2, l.a1, d), wire(l.a2, l.e2, d)};
      break;
    case 3:
      parts = {place_psi(psi, l.a1, l.b1, l.e3), wire(l.a2, l.e1, d), wire(l.b2, l.e2, d)};
      break;
    default:
      throw DomainError(fmt::format("harmonic branch must be 1, 2 or 3, got {}", branch));
  }
  const LabeledVector v = tensor(std::span<const LabeledVector>(parts));
  const std::vector<std::string> order{l.a1, l.a2, l.b1, l.b2, l.e1, l.e2, l.e3};
  return permute(v, order);
}

LabeledVector harmonic_vector(const HarmonicCleanModel& m, const HarmonicLabels& l) {
  m.check();
  const LabeledVector psi = m.psi_vector();
  const Registry g{{l.g, 3}};
  Vector acc;
  Registry reg;
  for (int i = 1; i <= 3; ++i) {
    const LabeledVector term = tensor(LabeledVector::basis(g, static_cast<std::size_t>(i - 1)),
                                      harmonic_branch_vector(i, psi, m.wire_dim, l));
    if (i == 1) {
      reg = term.registry();
      acc = m.alpha[0] * term.vector();
    } else {
      acc += m.alpha[static_cast<std::size_t>(i - 1)] * term.vector();
    }
  }
  return {reg, std::move(acc)};
}

ProcessMatrix build_w_i_from_marginals(int branch, const Matrix& rho_x, const Matrix& rho_y, const Matrix& rho_xy,
                                       std::size_t d, const HarmonicLabels& l) {
  const auto parties = harmonic_parties(d, l);
  const auto pi = [d](const std::string& n) { return LabeledOperator::maximally_mixed(Registry{{n, d}}); };
  std::vector<LabeledOperator> parts;
  switch (branch) {
    case 1:
      parts = {LabeledOperator(Registry{{l.a1, d}}, rho_x), wire(l.a2, l.b1, d).projector(), pi(l.b2)};
      break;
    case 2:
      parts = {LabeledOperator(Registry{{l.b1, d}}, rho_y), wire(l.a1, l.b2, d).projector(), pi(l.a2)};
      break;
    case 3:
      parts = {LabeledOperator(Registry{{l.a1, d}, {l.b1, d}}, rho_xy), pi(l.a2), pi(l.b2)};
      break;
    default:
      throw DomainError(fmt::format("harmonic branch must be 1, 2 or 3, got {}", branch));
  }
  const LabeledOperator w = tensor(std::span<const LabeledOperator>(parts));
  const auto order = ab_order(l);
  return ProcessMatrix({parties[0], parties[1]}, permute(w, order));
}

ProcessMatrix build_w_i(int branch, const LabeledVector& psi, std::size_t d, const HarmonicLabels& l) {
  const auto names = psi.registry().names();
  if (names.size() != 3) throw DimError("initial state must live on three subsystems (x, y, e3)");
  if (psi.registry().labels()[0].dim != d || psi.registry().labels()[1].dim != d)
    throw DimError(fmt::format("initial state wires must have dimension {}", d));
  const std::vector<std::string> not_x{names[1], names[2]};
  const std::vector<std::string> not_y{names[0], names[2]};
  const std::vector<std::string> not_xy{names[2]};
  return build_w_i_from_marginals(branch, psi.reduced(not_x).matrix(), psi.reduced(not_y).matrix(),
                                  psi.reduced(not_xy).matrix(), d, l);
}

ProcessMatrix build_harmonic_purified(const HarmonicCleanModel& m, const HarmonicLabels& l) {
  const LabeledVector v = harmonic_vector(m, l);
  const std::vector<std::string> env{l.e1, l.e2, l.e3};
  const LabeledOperator w = v.reduced(env);
  const auto ab = harmonic_parties(m.wire_dim, l);
  PartySpec g{"G", {{l.g, 3}}, {}, {}, {}};
  return ProcessMatrix({g, ab[0], ab[1]}, w);
}

ProcessMatrix build_harmonic_reduced(const HarmonicCleanModel& m, const HarmonicLabels& l) {
  m.check();
  const LabeledVector psi = m.psi_vector();
  const auto parties = harmonic_parties(m.wire_dim, l);
  Matrix acc;
  Registry reg;
  for (int i = 1; i <= 3; ++i) {
    const ProcessMatrix wi = build_w_i(i, psi, m.wire_dim, l);
    const double p = m.alpha.probability(static_cast<std::size_t>(i - 1));
    if (i == 1) {
      reg = wi.op().registry();
      acc = p * wi.op().matrix();
    } else {
      acc += p * wi.op().matrix();
    }
  }
  return ProcessMatrix({parties[0], parties[1]}, LabeledOperator(reg, std::move(acc)));
}

// ---------------------------------------------------------------------------
// Generic clean models

namespace {

std::vector<std::string> environment_labels(const Registry& reg, const std::array<PartySpec, 2>& parties) {
  std::vector<std::string> env;
  for (const auto& n : reg.names()) {
    bool owned = false;
    for (const auto& p : parties)
      for (const auto& own : p.label_names()) owned = owned || own == n;
    if (!owned) env.push_back(n);
  }
  return env;
}

}  // namespace

ProcessMatrix branch_process(const CleanBranch& branch, const std::array<PartySpec, 2>& parties) {
  if (std::abs(branch.vector.norm() - 1.0) > kNormTol) throw NormError("branch vector is not normalized");
  const auto env = environment_labels(branch.vector.registry(), parties);
  const LabeledOperator w = branch.vector.reduced(env);
  return ProcessMatrix({parties[0], parties[1]}, w);
}

void check_branch(const CleanBranch& branch, const std::array<PartySpec, 2>& parties) {
  const ProcessMatrix w = branch_process(branch, parties);
  if (!compatible_with(w, parties[0].name, parties[1].name, branch.relation))
    throw BranchRelationError(fmt::format("branch declared {} signals in a forbidden direction",
                                          to_string(branch.relation)));
}

LabeledVector clean_vector(std::span<const cplx> amplitudes, std::span<const CleanBranch> branches,
                           const std::string& g_label) {
  if (amplitudes.size() != branches.size() || branches.empty())
    throw DimError("one amplitude per branch is required");
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a);
  if (std::abs(total - 1.0) > kNormTol) throw NormError(fmt::format("amplitudes have squared norm {:.15g}", total));
  const Registry g{{g_label, branches.size()}};
  const auto order = branches.front().vector.registry().names();
  Vector acc;
  Registry reg;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (!branches[i].vector.registry().same_labels(branches.front().vector.registry()))
      throw DimError("all branches must live on the same subsystems");
    const LabeledVector term = tensor(LabeledVector::basis(g, i), permute(branches[i].vector, order));
    if (i == 0) {
      reg = term.registry();
      acc = amplitudes[i] * term.vector();
    } else {
      acc += amplitudes[i] * term.vector();
    }
  }
  return {reg, std::move(acc)};
}

ProcessMatrix build_clean_general(std::span<const cplx> amplitudes, std::span<const CleanBranch> branches,
                                  const std::array<PartySpec, 2>& parties, const std::string& g_label) {
  const LabeledVector v = clean_vector(amplitudes, branches, g_label);
  for (const auto& b : branches) check_branch(b, parties);
  const auto env = environment_labels(branches.front().vector.registry(), parties);
  const LabeledOperator w = v.reduced(env);
  PartySpec g{"G", {{g_label, branches.size()}}, {}, {}, {}};
  return ProcessMatrix({g, parties[0], parties[1]}, w);
}

// ---------------------------------------------------------------------------
// Partial swap

void PartialSwapModel::check() const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("partial swap parameter {} outside [0, 1]", p));
  const auto d = static_cast<Eigen::Index>(wire_dim);
  if (rho.rows() != d * d || rho.cols() != d * d) throw DimError("initial state must live on (a1, a1')");
  const LabeledOperator r(Registry{{"a1", wire_dim}, {"a1'", wire_dim}}, rho);
  if (!is_psd(r) || std::abs(r.trace() - cplx(1.0)) > kDefaultTol)
    throw NormError("initial state must be positive semidefinite with unit trace");
  Matrix tp = Matrix::Zero(d, d);
  for (const auto& k : channel_n) {
    if (k.rows() != d || k.cols() != d) throw DimError("channel N must map a2 to a wire of the same dimension");
    tp += k.adjoint() * k;
  }
  if ((tp - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kDefaultTol)
    throw NormError("channel N is not trace preserving");
}

Matrix partial_swap_unitary(double p, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix swap = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) swap(j * d + i, i * d + j) = 1.0;
  return std::sqrt(1.0 - p) * Matrix::Identity(d * d, d * d) + cplx(0.0, std::sqrt(p)) * swap;
}

ProcessMatrix build_partial_swap(const PartialSwapModel& m) {
  m.check();
  const std::size_t d = m.wire_dim;
  const LabeledOperator rho(Registry{{"a1", d}, {"a1'", d}}, m.rho);
  const LabeledOperator feed = wire("a2", "a2_in", d).projector();
  LabeledOperator x = tensor(rho, feed);

  const std::vector<std::string> n_in{"a2_in"};
  x = apply_kraus(x, m.channel_n, n_in, Registry{{"a2'", d}});

  const std::vector<Matrix> v{partial_swap_unitary(m.p, d)};
  const std::vector<std::string> v_in{"a1'", "a2'"};
  x = apply_kraus(x, v, v_in, Registry{{"b1", d}, {"e", d}});
  x = partial_trace(x, {"e"});

  const LabeledOperator w = tensor(x, LabeledOperator::maximally_mixed(Registry{{"b2", d}}));
  const std::vector<std::string> order{"a1", "a2", "b1", "b2"};
  const auto parties = harmonic_parties(d);
  return ProcessMatrix({parties[0], parties[1]}, permute(w, order));
}

}  // namespace cfluct
