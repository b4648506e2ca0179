#include "cfluct/process.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "cfluct/errors.hpp"

namespace cfluct {

std::string to_string(Sector s) { return s == Sector::massless ? "massless" : "massive"; }

// ---------------------------------------------------------------------------
// Parties

PartySpec PartySpec::simple(std::string name, Subsystem input, Subsystem output) {
  PartySpec p{std::move(name), {std::move(input)}, {std::move(output)}, {}, {}};
  p.check();
  return p;
}

PartySpec PartySpec::sectored(std::string name, Subsystem massless_in, Subsystem massive_in, Subsystem massless_out,
                              Subsystem massive_out) {
  PartySpec p{std::move(name),
              {std::move(massless_in), std::move(massive_in)},
              {std::move(massless_out), std::move(massive_out)},
              {Sector::massless, Sector::massive},
              {Sector::massless, Sector::massive}};
  p.check();
  return p;
}

Registry PartySpec::choi_registry() const { return output_registry().concat(input_registry()); }

std::vector<std::string> PartySpec::label_names() const {
  std::vector<std::string> out;
  for (const auto& s : outputs) out.push_back(s.name);
  for (const auto& s : inputs) out.push_back(s.name);
  return out;
}

void PartySpec::check() const {
  std::set<std::string> seen;
  for (const auto& s : inputs)
    if (!seen.insert(s.name).second) throw PartyError(fmt::format("party {} repeats label '{}'", name, s.name));
  for (const auto& s : outputs)
    if (!seen.insert(s.name).second)
      throw PartyError(fmt::format("party {}: input and output share label '{}'", name, s.name));
  if (is_sectored() && (input_sectors.size() != inputs.size() || output_sectors.size() != outputs.size()))
    throw PartyError(fmt::format("party {} has sector tags that do not match its labels", name));
}

ProcessMatrix::ProcessMatrix(std::vector<PartySpec> parties, LabeledOperator w)
    : parties_(std::move(parties)), w_(std::move(w)) {
  std::set<std::string> names;
  std::set<std::string> labels;
  for (const auto& p : parties_) {
    p.check();
    if (!names.insert(p.name).second) throw PartyError(fmt::format("party '{}' declared twice", p.name));
    for (const auto& n : p.label_names()) {
      if (!labels.insert(n).second) throw PartyError(fmt::format("label '{}' belongs to two parties", n));
      if (!w_.registry().contains(n)) throw PartyError(fmt::format("label '{}' of party {} is not in W", n, p.name));
    }
  }
  if (labels.size() != w_.registry().size())
    throw PartyError("W carries subsystems that belong to no party");
  for (const auto& p : parties_) {
    for (const auto& s : p.inputs)
      if (w_.registry().at(s.name).dim != s.dim) throw PartyError(fmt::format("dimension mismatch on '{}'", s.name));
    for (const auto& s : p.outputs)
      if (w_.registry().at(s.name).dim != s.dim) throw PartyError(fmt::format("dimension mismatch on '{}'", s.name));
  }
}

const PartySpec& ProcessMatrix::party(const std::string& name) const { return parties_[party_index(name)]; }

bool ProcessMatrix::has_party(const std::string& name) const {
  return std::any_of(parties_.begin(), parties_.end(), [&](const PartySpec& p) { return p.name == name; });
}

std::size_t ProcessMatrix::party_index(const std::string& name) const {
  for (std::size_t i = 0; i < parties_.size(); ++i)
    if (parties_[i].name == name) return i;
  throw PartyError(fmt::format("no party named '{}'", name));
}

ProcessMatrix discard_party(const ProcessMatrix& w, const std::string& party) {
  const auto labels = w.party(party).label_names();
  std::vector<PartySpec> rest;
  for (const auto& p : w.parties())
    if (p.name != party) rest.push_back(p);
  return ProcessMatrix(std::move(rest), partial_trace(w.op(), labels));
}

// ---------------------------------------------------------------------------
// Choi operators

LabeledOperator choi_of_kraus(const PartySpec& party, std::span<const Matrix> kraus) {
  const auto din = static_cast<Eigen::Index>(party.input_dim());
  const auto dout = static_cast<Eigen::Index>(party.output_dim());
  Matrix choi = Matrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw DimError(fmt::format("Kraus operator for party {} is {}x{}, expected {}x{}", party.name, k.rows(),
                                 k.cols(), dout, din));
    // Row-major vectorization of K is (K (x) 1) sum_i |i>|i>.
    Vector v(din * dout);
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index i = 0; i < din; ++i) v(o * din + i) = k(o, i);
    choi += v * v.adjoint();
  }
  choi *= static_cast<double>(dout);
  return {party.choi_registry(), std::move(choi)};
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

LabeledOperator choi_measure_prepare(const PartySpec& party, const Matrix& effect, const Matrix& state) {
  const auto din = static_cast<Eigen::Index>(party.input_dim());
  const auto dout = static_cast<Eigen::Index>(party.output_dim());
  if (effect.rows() != din || effect.cols() != din)
    throw DimError(fmt::format("effect for party {} must be {}x{}", party.name, din, din));
  if (state.rows() != dout || state.cols() != dout)
    throw DimError(fmt::format("state for party {} must be {}x{}", party.name, dout, dout));
  Matrix choi = static_cast<double>(dout) * kron(state, effect.transpose());
  return {party.choi_registry(), std::move(choi)};
}

LabeledOperator choi_discard_and_reset(const PartySpec& party) {
  const auto din = static_cast<Eigen::Index>(party.input_dim());
  const auto dout = static_cast<Eigen::Index>(party.output_dim());
  return choi_measure_prepare(party, Matrix::Identity(din, din),
                              Matrix::Identity(dout, dout) / static_cast<double>(dout));
}

double trace_preservation_residue(const ChoiInstrument& instrument) {
  const Registry reg = instrument.party.choi_registry();
  LabeledOperator sum = LabeledOperator::zero(reg);
  for (const auto& e : instrument.elements) {
    if (!e.registry().same_labels(reg)) throw PartyError("instrument element is not on the party's Choi registry");
    sum = LabeledOperator(reg, sum.matrix() + permute(e, reg.names()).matrix());
  }
  const auto out_names = instrument.party.output_registry().names();
  const LabeledOperator marginal = partial_trace(sum, out_names);
  const auto din = static_cast<Eigen::Index>(instrument.party.input_dim());
  const Matrix target = static_cast<double>(instrument.party.output_dim()) * Matrix::Identity(din, din);
  return (marginal.matrix() - target).cwiseAbs().maxCoeff();
}

bool is_valid_instrument(const ChoiInstrument& instrument, double tol) {
  for (const auto& e : instrument.elements)
    if (!is_psd(e, tol)) return false;
  return trace_preservation_residue(instrument) <= tol;
}

Matrix choi_to_superoperator(const LabeledOperator& choi, std::size_t out_dim, std::size_t in_dim) {
  const auto dout = static_cast<Eigen::Index>(out_dim);
  const auto din = static_cast<Eigen::Index>(in_dim);
  if (choi.matrix().rows() != dout * din) throw DimError("Choi operator does not match the given dimensions");
  Matrix s(dout * dout, din * din);
  const Matrix& c = choi.matrix();
  for (Eigen::Index o1 = 0; o1 < dout; ++o1)
    for (Eigen::Index o2 = 0; o2 < dout; ++o2)
      for (Eigen::Index i1 = 0; i1 < din; ++i1)
        for (Eigen::Index i2 = 0; i2 < din; ++i2)
          s(o1 * dout + o2, i1 * din + i2) = c(o1 * din + i1, o2 * din + i2) / static_cast<double>(dout);
  return s;
}

LabeledOperator superoperator_to_choi(const Matrix& s, const Registry& outputs, const Registry& inputs) {
  const auto dout = static_cast<Eigen::Index>(outputs.total_dim());
  const auto din = static_cast<Eigen::Index>(inputs.total_dim());
  if (s.rows() != dout * dout || s.cols() != din * din) throw DimError("superoperator does not match the registries");
  Matrix c(dout * din, dout * din);
  for (Eigen::Index o1 = 0; o1 < dout; ++o1)
    for (Eigen::Index o2 = 0; o2 < dout; ++o2)
      for (Eigen::Index i1 = 0; i1 < din; ++i1)
        for (Eigen::Index i2 = 0; i2 < din; ++i2)
          c(o1 * din + i1, o2 * din + i2) = s(o1 * dout + o2, i1 * din + i2) * static_cast<double>(dout);
  return {outputs.concat(inputs), std::move(c)};
}

// ---------------------------------------------------------------------------
// Born rule

namespace {

void check_element(const ProcessMatrix& w, const PartyElement& e) {
  const PartySpec& p = w.party(e.party);
  if (!e.choi.registry().same_labels(p.choi_registry()))
    throw PartyError(fmt::format("element for party {} is not on its input/output systems", e.party));
}

}  // namespace

LabeledOperator effective_operator(const ProcessMatrix& w, std::span<const PartyElement> elements) {
  std::set<std::string> used;
  for (const auto& e : elements) {
    check_element(w, e);
    if (!used.insert(e.party).second) throw PartyError(fmt::format("party {} given twice", e.party));
  }
  if (elements.empty()) return w.op();
  // The first contraction reads w in place; w can be large.
  LabeledOperator current = contract(w.op(), elements.front().choi);
  for (const auto& e : elements.subspan(1)) current = contract(current, e.choi);
  return current;
}

cplx born_functional(const ProcessMatrix& w, std::span<const PartyElement> elements) {
  if (elements.size() != w.parties().size())
    throw PartyError(fmt::format("{} elements for {} parties", elements.size(), w.parties().size()));
  const LabeledOperator scalar = effective_operator(w, elements);
  return scalar.matrix()(0, 0);
}

double born_probability(const ProcessMatrix& w, std::span<const ChoiInstrument> instruments,
                        std::span<const std::size_t> outcome) {
  if (instruments.size() != outcome.size()) throw PartyError("one outcome index per instrument is required");
  std::vector<PartyElement> elements;
  elements.reserve(instruments.size());
  for (std::size_t k = 0; k < instruments.size(); ++k) {
    const auto& inst = instruments[k];
    if (outcome[k] >= inst.elements.size())
      throw PartyError(fmt::format("outcome {} out of range for party {}", outcome[k], inst.party.name));
    elements.push_back({inst.party.name, inst.elements[outcome[k]]});
  }
  const cplx p = born_functional(w, elements);
  if (std::abs(p.imag()) > 1e-9)
    throw NumericalError(fmt::format("Born probability has imaginary part {:.3e}", p.imag()));
  return p.real();
}

// ---------------------------------------------------------------------------
// Signalling

namespace {

// Frobenius-normalized generalized Gell-Mann matrices; the identity/sqrt(d)
// is appended when `with_identity`.
std::vector<Matrix> hermitian_basis(std::size_t dim, bool with_identity) {
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<Matrix> basis;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j + 1; k < d; ++k) {
      Matrix sym = Matrix::Zero(d, d);
      sym(j, k) = sym(k, j) = 1.0 / r2;
      basis.push_back(sym);
      Matrix anti = Matrix::Zero(d, d);
      anti(j, k) = cplx(0.0, -1.0 / r2);
      anti(k, j) = cplx(0.0, 1.0 / r2);
      basis.push_back(anti);
    }
  for (Eigen::Index l = 1; l < d; ++l) {
    Matrix diag = Matrix::Zero(d, d);
    const double norm = std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index j = 0; j < l; ++j) diag(j, j) = 1.0 / norm;
    diag(l, l) = -static_cast<double>(l) / norm;
    basis.push_back(diag);
  }
  if (with_identity) basis.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  return basis;
}

LabeledOperator close_spectators(const ProcessMatrix& w, const std::string& keep_a, const std::string& keep_b) {
  std::vector<PartyElement> closers;
  for (const auto& p : w.parties())
    if (p.name != keep_a && p.name != keep_b) closers.push_back({p.name, choi_discard_and_reset(p)});
  return effective_operator(w, closers);
}

}  // namespace

std::string signalling_family_description() {
  return "depolarizing channel and depolarizing + 1/2 (Y (x) Z) for Y over a traceless Hermitian basis of the "
         "sender's outputs and Z over a Hermitian basis of its inputs (affinely spans all channels); spectators "
         "closed by discard-and-reset";
}

SignallingDetail signalling_detail(const ProcessMatrix& w, const std::string& from, const std::string& to,
                                   double tol) {
  const PartySpec& sender = w.party(from);
  (void)w.party(to);
  if (from == to) throw PartyError("signalling needs two distinct parties");
  SignallingDetail detail{from, to, false, 0.0, 1};
  const LabeledOperator closed = close_spectators(w, from, to);

  const Registry reg = sender.choi_registry();
  const LabeledOperator depolarizing = choi_discard_and_reset(sender);
  const LabeledOperator baseline = contract(closed, depolarizing);

  const auto ys = hermitian_basis(sender.output_dim(), false);
  const auto zs = hermitian_basis(sender.input_dim(), true);
  for (const auto& y : ys)
    for (const auto& z : zs) {
      const LabeledOperator channel(reg, depolarizing.matrix() + 0.5 * kron(y, z));
      const LabeledOperator reduced = contract(closed, channel);
      const double dev = (reduced.matrix() - baseline.matrix()).cwiseAbs().maxCoeff();
      detail.max_deviation = std::max(detail.max_deviation, dev);
      ++detail.family_size;
    }
  detail.signals = detail.max_deviation > tol;
  return detail;
}

bool can_signal(const ProcessMatrix& w, const std::string& from, const std::string& to, double tol) {
  return signalling_detail(w, from, to, tol).signals;
}

ValidationReport validate_process(const ProcessMatrix& w, double tol, double signalling_tol) {
  ValidationReport r;
  const cplx tr = w.op().trace();
  r.trace_real = tr.real();
  r.trace_imag = tr.imag();
  r.unit_trace = std::abs(tr - cplx(1.0)) <= tol;
  r.hermiticity_residue = hermiticity_residue(w.op());
  r.min_eigenvalue = min_eigenvalue(w.op());
  r.psd = is_psd(w.op(), tol);
  r.signalling_family = signalling_family_description();
  for (const auto& a : w.parties())
    for (const auto& b : w.parties())
      if (a.name != b.name) r.signalling.push_back(signalling_detail(w, a.name, b.name, signalling_tol));
  return r;
}

std::string to_string(CausalRelation r) {
  switch (r) {
    case CausalRelation::a_before_b: return "A->B";
    case CausalRelation::b_before_a: return "A<-B";
    case CausalRelation::no_relation: return "A-B";
  }
  return "?";
}

CausalRelation parse_relation(const std::string& text) {
  if (text == "A->B") return CausalRelation::a_before_b;
  if (text == "A<-B") return CausalRelation::b_before_a;
  if (text == "A-B") return CausalRelation::no_relation;
  throw DomainError(fmt::format("unknown causal relation '{}'", text));
}

bool compatible_with(const ProcessMatrix& w, const std::string& a, const std::string& b, CausalRelation r,
                     double tol) {
  switch (r) {
    case CausalRelation::a_before_b: return !can_signal(w, b, a, tol);
    case CausalRelation::b_before_a: return !can_signal(w, a, b, tol);
    case CausalRelation::no_relation: return !can_signal(w, a, b, tol) && !can_signal(w, b, a, tol);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Local operations

namespace {

Matrix superoperator_of(std::span<const Matrix> kraus, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (kraus.empty()) return Matrix::Identity(d * d, d * d);
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& k : kraus) {
    if (k.rows() != d || k.cols() != d) throw DimError("local operation must preserve the system dimension");
    s += kron(k, k.conjugate());
  }
  return s;
}

}  // namespace

ProcessMatrix apply_local_operation(const ProcessMatrix& w, const std::string& party, const LocalOperation& op) {
  const PartySpec& p = w.party(party);
  const Registry outs = p.output_registry();
  const Registry ins = p.input_registry();
  const Registry choi_reg = p.choi_registry();
  const Matrix pre = superoperator_of(op.pre, p.input_dim());
  const Matrix post = superoperator_of(op.post, p.output_dim());

  const auto da = static_cast<Eigen::Index>(choi_reg.total_dim());
  const auto own = choi_reg.names();
  const Registry rest = w.op().registry().without(own);
  const auto dr = static_cast<Eigen::Index>(rest.total_dim());
  Matrix out = Matrix::Zero(da * dr, da * dr);
  for (Eigen::Index x = 0; x < da; ++x)
    for (Eigen::Index y = 0; y < da; ++y) {
      Matrix unit = Matrix::Zero(da, da);
      unit(x, y) = 1.0;
      const Matrix s = choi_to_superoperator(LabeledOperator(choi_reg, unit), p.output_dim(), p.input_dim());
      const LabeledOperator composed = superoperator_to_choi(post * s * pre, outs, ins);
      const LabeledOperator block = contract(w.op(), composed);
      const LabeledOperator aligned = permute(block, rest.names());
      out.block(x * dr, y * dr, dr, dr) = aligned.matrix();
    }
  LabeledOperator result(choi_reg.concat(rest), std::move(out));
  return ProcessMatrix(w.parties(), permute(result, w.op().registry().names()));
}

}  // namespace cfluct
