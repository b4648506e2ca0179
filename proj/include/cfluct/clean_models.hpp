#pragma once

// Builders for clean models: the three-branch harmonic family (purified on
// G,A,B,E and reduced on A,B), generic clean models from declared branches,
// and the partial-swap general model.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfluct/process.hpp"
#include "cfluct/tensor.hpp"

namespace cfluct {

inline constexpr double kNormTol = 1e-10;

class AmplitudeVector3 {
 public:
  // Throws NormError unless sum |a_i|^2 = 1 within kNormTol.
  AmplitudeVector3(cplx a1, cplx a2, cplx a3);
  static AmplitudeVector3 from_probabilities(double p1, double p2, double p3);

  [[nodiscard]] cplx operator[](std::size_t i) const { return amps_.at(i); }
  [[nodiscard]] double probability(std::size_t i) const { return std::norm(amps_.at(i)); }
  [[nodiscard]] std::array<double, 3> probabilities() const;

 private:
  std::array<cplx, 3> amps_;
};

// System names of one party pair. `suffix` is appended to every name, which
// is how the two sectors keep distinct labels.
struct HarmonicLabels {
  std::string a1 = "a1", a2 = "a2", b1 = "b1", b2 = "b2";
  std::string e1 = "e1", e2 = "e2", e3 = "e3", g = "g";

  static HarmonicLabels with_suffix(const std::string& suffix);
};

struct HarmonicCleanModel {
  AmplitudeVector3 alpha;
  std::size_t wire_dim = 2;
  std::size_t e3_dim = 1;
  // Initial state on (x, y, e3) with dims (wire_dim, wire_dim, e3_dim).
  Vector psi;

  // psi defaults to |000>.
  HarmonicCleanModel(AmplitudeVector3 alpha, std::size_t wire_dim, std::size_t e3_dim = 1,
                     std::optional<Vector> psi = std::nullopt);

  // Throws DimError / NormError.
  void check() const;
  [[nodiscard]] LabeledVector psi_vector() const;
};

// Parties A (a1 -> a2) and B (b1 -> b2) with the given wire dimension.
std::array<PartySpec, 2> harmonic_parties(std::size_t wire_dim, const HarmonicLabels& labels = {});

// Normalized branch vector |w_i> on (a1,a2,b1,b2,e1,e2,e3), i in {1,2,3}:
//   1: Psi on (a1,e2,e3), Phi on (a2,b1), Phi on (b2,e1)    A->B
//   2: Psi on (e1,b1,e3), Phi on (b2,a1), Phi on (a2,e2)    A<-B
//   3: Psi on (a1,b1,e3), Phi on (a2,e1), Phi on (b2,e2)    A-B
LabeledVector harmonic_branch_vector(int branch, const LabeledVector& psi, std::size_t wire_dim,
                                     const HarmonicLabels& labels = {});

// sum_i alpha_i |i>^g |w_i> on (g, a1, a2, b1, b2, e1, e2, e3).
LabeledVector harmonic_vector(const HarmonicCleanModel& m, const HarmonicLabels& labels = {});

// W_1 = rho^{a1} (x) Phi^{a2 b1} (x) pi^{b2}, W_2 = rho^{b1} (x) Phi^{a1 b2} (x) pi^{a2},
// W_3 = rho^{a1 b1} (x) pi^{a2} (x) pi^{b2}, with rho the marginals of |Psi><Psi|.
ProcessMatrix build_w_i(int branch, const LabeledVector& psi, std::size_t wire_dim,
                        const HarmonicLabels& labels = {});

// Same, from the marginals directly; rho_x on a1, rho_y on b1, rho_xy on (a1, b1).
ProcessMatrix build_w_i_from_marginals(int branch, const Matrix& rho_x, const Matrix& rho_y, const Matrix& rho_xy,
                                       std::size_t wire_dim, const HarmonicLabels& labels = {});

// Tr_E |w><w| on G, A, B where G has the single input g.
ProcessMatrix build_harmonic_purified(const HarmonicCleanModel& m, const HarmonicLabels& labels = {});

// sum_i p_i W_i on A, B.
ProcessMatrix build_harmonic_reduced(const HarmonicCleanModel& m, const HarmonicLabels& labels = {});

struct CleanBranch {
  LabeledVector vector;  // on the parties' systems plus environment labels
  CausalRelation relation;
};

// Tr_E |sum_i alpha_i |i>^g |w_i>><.| on G, A, B. Every branch must share
// one registry; labels not owned by `parties` are treated as environment.
// Throws NormError, BranchRelationError.
ProcessMatrix build_clean_general(std::span<const cplx> amplitudes, std::span<const CleanBranch> branches,
                                  const std::array<PartySpec, 2>& parties, const std::string& g_label = "g");

// The same sum as a pure vector on (g, branch registry).
LabeledVector clean_vector(std::span<const cplx> amplitudes, std::span<const CleanBranch> branches,
                           const std::string& g_label = "g");

// Process of the branch alone on A, B (environment traced).
ProcessMatrix branch_process(const CleanBranch& branch, const std::array<PartySpec, 2>& parties);

// Throws BranchRelationError if the branch's process does not respect its
// declared relation.
void check_branch(const CleanBranch& branch, const std::array<PartySpec, 2>& parties);

struct PartialSwapModel {
  double p = 0.0;
  std::size_t wire_dim = 2;
  Matrix rho;                     // state on (a1, a1'), dimension wire_dim^2
  std::vector<Matrix> channel_n;  // Kraus operators of the channel a2 -> a2'

  void check() const;
};

// sqrt(1-p) 1 + i sqrt(p) SWAP on two wires of dimension d.
Matrix partial_swap_unitary(double p, std::size_t d);

// The state rho on (a1, a1') together with A's output a2 fed through N into
// a2', the pair (a1', a2') sent through V(p) into (b1, e), e discarded, and
// pi on b2.
ProcessMatrix build_partial_swap(const PartialSwapModel& m);

}  // namespace cfluct
