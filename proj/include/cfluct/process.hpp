#pragma once

// Process matrices, instrument Choi operators, the generalized Born rule and
// operational signalling tests.
//
// Choi convention: a CP map M from the party's inputs to its outputs has
//   M^ = |in||out| (M (x) id)(|Phi><Phi|)  on registry (outputs..., inputs...)
// with |Phi> the normalized maximally entangled state on two copies of the
// input. The |in||out| factor lives in the instrument, so process matrices
// keep unit trace. The joint outcome probability is
//   P = Tr[(M^_1 (x) ... (x) M^_n)^T W]
// with the transpose taken in the canonical product basis.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfluct/tensor.hpp"

namespace cfluct {

enum class Sector { massless, massive };

[[nodiscard]] std::string to_string(Sector s);

struct PartySpec {
  std::string name;
  std::vector<Subsystem> inputs;
  std::vector<Subsystem> outputs;
  // Either empty (unsectored) or one tag per input / output label.
  std::vector<Sector> input_sectors;
  std::vector<Sector> output_sectors;

  static PartySpec simple(std::string name, Subsystem input, Subsystem output);
  static PartySpec sectored(std::string name, Subsystem massless_in, Subsystem massive_in, Subsystem massless_out,
                            Subsystem massive_out);

  [[nodiscard]] bool is_sectored() const { return !input_sectors.empty() || !output_sectors.empty(); }
  [[nodiscard]] Registry input_registry() const { return Registry(inputs); }
  [[nodiscard]] Registry output_registry() const { return Registry(outputs); }
  // (outputs..., inputs...)
  [[nodiscard]] Registry choi_registry() const;
  [[nodiscard]] std::size_t input_dim() const { return input_registry().total_dim(); }
  [[nodiscard]] std::size_t output_dim() const { return output_registry().total_dim(); }
  [[nodiscard]] std::vector<std::string> label_names() const;
  // Throws PartyError on duplicated or shared labels and malformed sector tags.
  void check() const;
};

class ProcessMatrix {
 public:
  // Throws PartyError unless the party labels are exactly the registry labels.
  ProcessMatrix(std::vector<PartySpec> parties, LabeledOperator w);

  [[nodiscard]] const std::vector<PartySpec>& parties() const { return parties_; }
  [[nodiscard]] const LabeledOperator& op() const { return w_; }
  [[nodiscard]] const PartySpec& party(const std::string& name) const;
  [[nodiscard]] bool has_party(const std::string& name) const;
  [[nodiscard]] std::size_t party_index(const std::string& name) const;

 private:
  std::vector<PartySpec> parties_;
  LabeledOperator w_;
};

// Traces out every system of the party, which is what a discard-and-reset
// instrument does; the party is removed from the result.
ProcessMatrix discard_party(const ProcessMatrix& w, const std::string& party);

struct ChoiInstrument {
  PartySpec party;
  std::vector<LabeledOperator> elements;
};

// Choi operator of X -> sum_k K_k X K_k^dagger. Throws DimError.
LabeledOperator choi_of_kraus(const PartySpec& party, std::span<const Matrix> kraus);

// Choi operator of X -> Tr(effect X) state, i.e. |out| state (x) effect^T.
LabeledOperator choi_measure_prepare(const PartySpec& party, const Matrix& effect, const Matrix& state);

// Trace the input, emit the maximally mixed state.
LabeledOperator choi_discard_and_reset(const PartySpec& party);

// Max deviation of Tr_out(sum of elements) from |out| * identity on the input.
[[nodiscard]] double trace_preservation_residue(const ChoiInstrument& instrument);
[[nodiscard]] bool is_valid_instrument(const ChoiInstrument& instrument, double tol = kDefaultTol);

// Conversions between a Choi operator on (outputs, inputs) and the Liouville
// matrix S with S[(o1,o2),(i1,i2)] = <o1| M(|i1><i2|) |o2>.
Matrix choi_to_superoperator(const LabeledOperator& choi, std::size_t out_dim, std::size_t in_dim);
LabeledOperator superoperator_to_choi(const Matrix& s, const Registry& outputs, const Registry& inputs);

struct PartyElement {
  std::string party;
  LabeledOperator choi;
};

// Multilinear extension of the Born rule: Tr[(elements)^T W] for arbitrary
// (not necessarily CP) operators, one per party. Throws PartyError.
cplx born_functional(const ProcessMatrix& w, std::span<const PartyElement> elements);

// Operator seen by the remaining parties once the listed parties' elements
// are plugged in.
LabeledOperator effective_operator(const ProcessMatrix& w, std::span<const PartyElement> elements);

// Probability of the joint outcome, instruments given one per party (any
// order). Throws PartyError, NumericalError on an imaginary residue > 1e-9.
double born_probability(const ProcessMatrix& w, std::span<const ChoiInstrument> instruments,
                        std::span<const std::size_t> outcome);

inline constexpr double kSignallingTol = 1e-12;

struct SignallingDetail {
  std::string from;
  std::string to;
  bool signals = false;
  double max_deviation = 0.0;
  std::size_t family_size = 0;
};

// Description of the channel family used to probe signalling.
[[nodiscard]] std::string signalling_family_description();

// Whether `from` can change the reduced process seen by `to`. Spectators are
// closed with discard-and-reset channels. `from`'s channels range over the
// depolarizing channel plus its perturbations along a Hermitian basis of
// trace-preserving directions, which affinely spans every channel.
SignallingDetail signalling_detail(const ProcessMatrix& w, const std::string& from, const std::string& to,
                                   double tol = kSignallingTol);
bool can_signal(const ProcessMatrix& w, const std::string& from, const std::string& to,
                double tol = kSignallingTol);

struct ValidationReport {
  bool psd = false;
  bool unit_trace = false;
  double trace_real = 0.0;
  double trace_imag = 0.0;
  double hermiticity_residue = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<SignallingDetail> signalling;
  std::string signalling_family;

  [[nodiscard]] bool valid() const { return psd && unit_trace; }
};

ValidationReport validate_process(const ProcessMatrix& w, double tol = kDefaultTol,
                                  double signalling_tol = kSignallingTol);

enum class CausalRelation { a_before_b, b_before_a, no_relation };

[[nodiscard]] std::string to_string(CausalRelation r);
// "A->B", "A<-B", "A-B"
[[nodiscard]] CausalRelation parse_relation(const std::string& text);

// True iff the two-party process forbids the signalling directions the
// relation rules out (A->B forbids B signalling to A, and so on).
bool compatible_with(const ProcessMatrix& w, const std::string& a, const std::string& b, CausalRelation r,
                     double tol = kSignallingTol);

// Local operation inside a party: `pre` acts on the party's inputs before its
// instrument, `post` on its outputs after it. Empty Kraus lists mean identity.
struct LocalOperation {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

// Process seen by the party's instrument once the local operation is
// absorbed: P(W', M) = P(W, post o M o pre) for every M.
ProcessMatrix apply_local_operation(const ProcessMatrix& w, const std::string& party, const LocalOperation& op);

}  // namespace cfluct
