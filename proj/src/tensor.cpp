#include "cfluct/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "cfluct/errors.hpp"

namespace cfluct {

namespace {

std::size_t product_of_dims(const std::vector<Subsystem>& labels) {
  std::size_t d = 1;
  for (const auto& l : labels) d *= l.dim;
  return d;
}

std::vector<std::string> vec_of(std::initializer_list<std::string> l) { return {l.begin(), l.end()}; }

}  // namespace

// ---------------------------------------------------------------------------
// Registry

Registry::Registry(std::initializer_list<Subsystem> labels)
    : Registry(std::vector<Subsystem>(labels.begin(), labels.end())) {}

Registry::Registry(std::vector<Subsystem> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.dim == 0) throw DimError(fmt::format("subsystem '{}' has dimension 0", l.name));
    if (!seen.insert(l.name).second) throw DuplicateLabel(fmt::format("subsystem '{}' appears twice", l.name));
  }
  total_dim_ = product_of_dims(labels_);
}

bool Registry::contains(const std::string& name) const {
  return std::any_of(labels_.begin(), labels_.end(), [&](const Subsystem& l) { return l.name == name; });
}

std::size_t Registry::position(const std::string& name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i].name == name) return i;
  throw UnknownLabel(fmt::format("no subsystem named '{}'", name));
}

const Subsystem& Registry::at(const std::string& name) const { return labels_[position(name)]; }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  out.reserve(labels_.size());
  for (const auto& l : labels_) out.push_back(l.name);
  return out;
}

std::size_t Registry::stride(const std::string& name) const {
  const std::size_t pos = position(name);
  std::size_t s = 1;
  for (std::size_t i = pos + 1; i < labels_.size(); ++i) s *= labels_[i].dim;
  return s;
}

Registry Registry::select(std::span<const std::string> names) const {
  std::vector<Subsystem> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(at(n));
  return Registry(std::move(out));
}

Registry Registry::without(std::span<const std::string> names) const {
  for (const auto& n : names) (void)position(n);
  std::vector<Subsystem> out;
  for (const auto& l : labels_)
    if (std::find(names.begin(), names.end(), l.name) == names.end()) out.push_back(l);
  return Registry(std::move(out));
}

Registry Registry::concat(const Registry& other) const {
  std::vector<Subsystem> out = labels_;
  out.insert(out.end(), other.labels_.begin(), other.labels_.end());
  return Registry(std::move(out));
}

std::vector<std::size_t> Registry::offsets_of(const Registry& sub) const {
  std::vector<std::size_t> offsets{0};
  offsets.reserve(sub.total_dim());
  for (const auto& l : sub.labels()) {
    const auto& mine = at(l.name);
    if (mine.dim != l.dim)
      throw DimError(fmt::format("subsystem '{}' has dim {} here but {} in the sub-registry", l.name, mine.dim, l.dim));
    const std::size_t s = stride(l.name);
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * l.dim);
    for (std::size_t base : offsets)
      for (std::size_t v = 0; v < l.dim; ++v) next.push_back(base + v * s);
    offsets.swap(next);
  }
  return offsets;
}

bool Registry::same_labels(const Registry& other) const {
  if (labels_.size() != other.labels_.size()) return false;
  for (const auto& l : labels_) {
    if (!other.contains(l.name) || other.at(l.name).dim != l.dim) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// LabeledOperator / LabeledVector

LabeledOperator::LabeledOperator(Registry registry, Matrix entries)
    : registry_(std::move(registry)), entries_(std::move(entries)) {
  const auto d = static_cast<Eigen::Index>(registry_.total_dim());
  if (entries_.rows() != d || entries_.cols() != d)
    throw DimError(fmt::format("operator is {}x{} but its registry has dimension {}", entries_.rows(),
                               entries_.cols(), d));
}

LabeledOperator LabeledOperator::scaled(cplx factor) const { return {registry_, entries_ * factor}; }

LabeledOperator LabeledOperator::adjoint() const { return {registry_, entries_.adjoint()}; }

LabeledOperator LabeledOperator::identity(const Registry& r) {
  const auto d = static_cast<Eigen::Index>(r.total_dim());
  return {r, Matrix::Identity(d, d)};
}

LabeledOperator LabeledOperator::maximally_mixed(const Registry& r) {
  const auto d = static_cast<Eigen::Index>(r.total_dim());
  return {r, Matrix::Identity(d, d) / static_cast<double>(d)};
}

LabeledOperator LabeledOperator::zero(const Registry& r) {
  const auto d = static_cast<Eigen::Index>(r.total_dim());
  return {r, Matrix::Zero(d, d)};
}

LabeledVector::LabeledVector(Registry registry, Vector entries)
    : registry_(std::move(registry)), entries_(std::move(entries)) {
  if (entries_.size() != static_cast<Eigen::Index>(registry_.total_dim()))
    throw DimError(fmt::format("vector has length {} but its registry has dimension {}", entries_.size(),
                               registry_.total_dim()));
}

LabeledVector LabeledVector::scaled(cplx factor) const { return {registry_, entries_ * factor}; }

LabeledVector LabeledVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw NormError("cannot normalize the zero vector");
  return {registry_, entries_ / n};
}

LabeledOperator LabeledVector::projector() const { return {registry_, entries_ * entries_.adjoint()}; }

LabeledOperator LabeledVector::reduced(std::span<const std::string> over) const {
  const Registry kept = registry_.without(over);
  const Registry traced = registry_.select(over);
  const auto k_off = registry_.offsets_of(kept);
  const auto t_off = registry_.offsets_of(traced);
  Matrix m(static_cast<Eigen::Index>(k_off.size()), static_cast<Eigen::Index>(t_off.size()));
  for (std::size_t k = 0; k < k_off.size(); ++k)
    for (std::size_t t = 0; t < t_off.size(); ++t)
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = entries_(static_cast<Eigen::Index>(k_off[k] + t_off[t]));
  Matrix rho = m * m.adjoint();
  return {kept, std::move(rho)};
}

LabeledVector LabeledVector::basis(const Registry& r, std::size_t index) {
  if (index >= r.total_dim()) throw DimError(fmt::format("basis index {} out of range {}", index, r.total_dim()));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(r.total_dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return {r, std::move(v)};
}

LabeledVector LabeledVector::max_entangled(const Registry& left, const Registry& right) {
  const std::size_t d = left.total_dim();
  if (right.total_dim() != d)
    throw DimError(fmt::format("maximally entangled state needs equal dimensions, got {} and {}", d, right.total_dim()));
  const Registry joint = left.concat(right);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d * d));
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i * d + i)) = amp;
  return {joint, std::move(v)};
}

// ---------------------------------------------------------------------------
// Algebra

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  const Registry joint = a.registry().concat(b.registry());
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return {joint, std::move(out)};
}

LabeledOperator tensor(std::span<const LabeledOperator> ops) {
  LabeledOperator acc;
  for (const auto& op : ops) acc = tensor(acc, op);
  return acc;
}

LabeledVector tensor(const LabeledVector& a, const LabeledVector& b) {
  const Registry joint = a.registry().concat(b.registry());
  const Vector& x = a.vector();
  const Vector& y = b.vector();
  Vector out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
  return {joint, std::move(out)};
}

LabeledVector tensor(std::span<const LabeledVector> vecs) {
  LabeledVector acc;
  for (const auto& v : vecs) acc = tensor(acc, v);
  return acc;
}

LabeledOperator partial_trace(const LabeledOperator& w, std::span<const std::string> over) {
  if (over.empty()) return w;
  const Registry& reg = w.registry();
  const Registry kept = reg.without(over);
  const Registry traced = reg.select(over);
  const auto k_off = reg.offsets_of(kept);
  const auto t_off = reg.offsets_of(traced);
  const Matrix& m = w.matrix();
  const auto dk = static_cast<Eigen::Index>(k_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index c = 0; c < dk; ++c)
    for (Eigen::Index r = 0; r < dk; ++r) {
      cplx acc = 0.0;
      for (std::size_t t : t_off)
        acc += m(static_cast<Eigen::Index>(k_off[static_cast<std::size_t>(r)] + t),
                 static_cast<Eigen::Index>(k_off[static_cast<std::size_t>(c)] + t));
      out(r, c) = acc;
    }
  return {kept, std::move(out)};
}

LabeledOperator partial_trace(const LabeledOperator& w, std::initializer_list<std::string> over) {
  const auto v = vec_of(over);
  return partial_trace(w, std::span<const std::string>(v));
}

namespace {

Registry permuted_registry(const Registry& reg, std::span<const std::string> new_order) {
  if (new_order.size() != reg.size())
    throw BadPermutation(fmt::format("expected {} names, got {}", reg.size(), new_order.size()));
  std::set<std::string> seen;
  for (const auto& n : new_order) {
    if (!reg.contains(n)) throw BadPermutation(fmt::format("'{}' is not in the registry", n));
    if (!seen.insert(n).second) throw BadPermutation(fmt::format("'{}' listed twice", n));
  }
  return reg.select(new_order);
}

}  // namespace

LabeledOperator permute(const LabeledOperator& w, std::span<const std::string> new_order) {
  const Registry target = permuted_registry(w.registry(), new_order);
  if (target == w.registry()) return w;
  const auto map = w.registry().offsets_of(target);
  const Matrix& m = w.matrix();
  const auto d = static_cast<Eigen::Index>(map.size());
  Matrix out(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto sc = static_cast<Eigen::Index>(map[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < d; ++r) out(r, c) = m(static_cast<Eigen::Index>(map[static_cast<std::size_t>(r)]), sc);
  }
  return {target, std::move(out)};
}

LabeledVector permute(const LabeledVector& v, std::span<const std::string> new_order) {
  const Registry target = permuted_registry(v.registry(), new_order);
  if (target == v.registry()) return v;
  const auto map = v.registry().offsets_of(target);
  Vector out(static_cast<Eigen::Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v.vector()(static_cast<Eigen::Index>(map[i]));
  return {target, std::move(out)};
}

namespace {

Registry renamed(const Registry& reg, std::span<const std::pair<std::string, std::string>> renames) {
  std::vector<Subsystem> labels = reg.labels();
  for (const auto& [from, to] : renames) {
    const std::size_t pos = reg.position(from);
    labels[pos].name = to;
  }
  return Registry(std::move(labels));
}

}  // namespace

LabeledOperator relabel(const LabeledOperator& w,
                        std::span<const std::pair<std::string, std::string>> renames) {
  return {renamed(w.registry(), renames), w.matrix()};
}

LabeledVector relabel(const LabeledVector& v, std::span<const std::pair<std::string, std::string>> renames) {
  return {renamed(v.registry(), renames), v.vector()};
}

LabeledOperator contract(const LabeledOperator& w, const LabeledOperator& op) {
  const Registry& reg = w.registry();
  const Registry rest = reg.without(op.registry().names());
  const auto s_off = reg.offsets_of(op.registry());
  const auto r_off = reg.offsets_of(rest);
  const Matrix& m = w.matrix();
  const Matrix& a = op.matrix();
  const auto dr = static_cast<Eigen::Index>(r_off.size());
  // Split every full index into its (contracted, rest) parts so that w is
  // read once, column by column, without copying it.
  std::vector<Eigen::Index> s_of(static_cast<std::size_t>(m.rows()));
  std::vector<Eigen::Index> r_of(static_cast<std::size_t>(m.rows()));
  for (std::size_t si = 0; si < s_off.size(); ++si)
    for (std::size_t ri = 0; ri < r_off.size(); ++ri) {
      s_of[s_off[si] + r_off[ri]] = static_cast<Eigen::Index>(si);
      r_of[s_off[si] + r_off[ri]] = static_cast<Eigen::Index>(ri);
    }
  Matrix out = Matrix::Zero(dr, dr);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::Index sc = s_of[static_cast<std::size_t>(c)];
    cplx* dst = out.col(r_of[static_cast<std::size_t>(c)]).data();
    const cplx* src = m.col(c).data();
    const cplx* coef = a.col(sc).data();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const auto ru = static_cast<std::size_t>(r);
      dst[r_of[ru]] += coef[s_of[ru]] * src[r];
    }
  }
  return {rest, std::move(out)};
}

cplx pairing(const LabeledOperator& a, const LabeledOperator& b) {
  if (!a.registry().same_labels(b.registry())) throw DimError("pairing needs operators on the same subsystems");
  const auto names = a.registry().names();
  const LabeledOperator bb = permute(b, names);
  return (a.matrix().array() * bb.matrix().array()).sum();
}

namespace {

// Left-multiplies the input block of an operator laid out as (inputs, rest)
// by k: rows (out, rest) <- sum_in k(out, in) * rows (in, rest).
Matrix left_apply(const Matrix& k, const Matrix& x, Eigen::Index rest) {
  const Eigen::Index dout = k.rows();
  const Eigen::Index din = k.cols();
  Matrix y = Matrix::Zero(dout * rest, x.cols());
  for (Eigen::Index o = 0; o < dout; ++o)
    for (Eigen::Index i = 0; i < din; ++i) {
      const cplx coef = k(o, i);
      if (coef == cplx(0.0)) continue;
      y.middleRows(o * rest, rest) += coef * x.middleRows(i * rest, rest);
    }
  return y;
}

}  // namespace

LabeledOperator apply_kraus(const LabeledOperator& x, std::span<const Matrix> kraus,
                            std::span<const std::string> inputs, const Registry& outputs) {
  const Registry in_reg = x.registry().select(inputs);
  const Registry rest = x.registry().without(inputs);
  std::vector<std::string> order(inputs.begin(), inputs.end());
  for (const auto& n : rest.names()) order.push_back(n);
  const LabeledOperator aligned = permute(x, order);
  const Registry result_reg = outputs.concat(rest);
  const auto r = static_cast<Eigen::Index>(rest.total_dim());
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(result_reg.total_dim()),
                            static_cast<Eigen::Index>(result_reg.total_dim()));
  for (const auto& k : kraus) {
    if (k.cols() != static_cast<Eigen::Index>(in_reg.total_dim()) ||
        k.rows() != static_cast<Eigen::Index>(outputs.total_dim()))
      throw DimError(fmt::format("Kraus operator is {}x{}, expected {}x{}", k.rows(), k.cols(), outputs.total_dim(),
                                 in_reg.total_dim()));
    const Matrix left = left_apply(k, aligned.matrix(), r);
    // (K left)^dagger applied on the column side: (K (x) 1) X (K (x) 1)^dagger.
    const Matrix both = left_apply(k, left.adjoint(), r);
    acc += both.adjoint();
  }
  return {result_reg, std::move(acc)};
}

LabeledVector apply_linear(const LabeledVector& v, const Matrix& k, std::span<const std::string> inputs,
                           const Registry& outputs) {
  const Registry in_reg = v.registry().select(inputs);
  const Registry rest = v.registry().without(inputs);
  if (k.cols() != static_cast<Eigen::Index>(in_reg.total_dim()) ||
      k.rows() != static_cast<Eigen::Index>(outputs.total_dim()))
    throw DimError(fmt::format("linear map is {}x{}, expected {}x{}", k.rows(), k.cols(), outputs.total_dim(),
                               in_reg.total_dim()));
  std::vector<std::string> order(inputs.begin(), inputs.end());
  for (const auto& n : rest.names()) order.push_back(n);
  const LabeledVector aligned = permute(v, order);
  const auto r = static_cast<Eigen::Index>(rest.total_dim());
  Matrix as_rows = Eigen::Map<const Matrix>(aligned.vector().data(), r, k.cols()).transpose();
  Matrix out_rows = k * as_rows;  // (dout, r)
  Matrix flat = out_rows.transpose();
  Vector out = Eigen::Map<Vector>(flat.data(), flat.size());
  return {outputs.concat(rest), std::move(out)};
}

double hermiticity_residue(const LabeledOperator& w) {
  return (w.matrix() - w.matrix().adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const LabeledOperator& w) {
  const Matrix h = 0.5 * (w.matrix() + w.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_psd(const LabeledOperator& w, double tol) {
  const double scale = std::max(1.0, w.matrix().cwiseAbs().maxCoeff());
  if (hermiticity_residue(w) > tol * scale) return false;
  return min_eigenvalue(w) >= -tol * scale;
}

double max_abs_diff(const LabeledOperator& a, const LabeledOperator& b) {
  if (!a.registry().same_labels(b.registry()))
    throw DimError("cannot compare operators on different subsystems");
  const auto names = a.registry().names();
  const LabeledOperator bb = permute(b, names);
  return (a.matrix() - bb.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace cfluct
