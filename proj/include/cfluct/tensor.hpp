#pragma once

// Labeled dense operator algebra over named finite-dimensional subsystems.
//
// Index convention: a registry (l_0, ..., l_{n-1}) with dims (d_0, ..., d_{n-1})
// is flattened mixed-radix with l_0 as the most significant digit, i.e. the
// flat index of digits (i_0, ..., i_{n-1}) is
//   i_0 * d_1 * ... * d_{n-1} + ... + i_{n-1}.
// This matches the ordering of a Kronecker product taken in registry order.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfluct {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-9;

struct Subsystem {
  std::string name;
  std::size_t dim = 1;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

// Ordered list of uniquely named subsystems.
class Registry {
 public:
  Registry() = default;
  Registry(std::initializer_list<Subsystem> labels);
  explicit Registry(std::vector<Subsystem> labels);

  [[nodiscard]] const std::vector<Subsystem>& labels() const { return labels_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] bool empty() const { return labels_.empty(); }
  [[nodiscard]] std::size_t total_dim() const { return total_dim_; }

  [[nodiscard]] bool contains(const std::string& name) const;
  // Position of `name`; throws UnknownLabel.
  [[nodiscard]] std::size_t position(const std::string& name) const;
  [[nodiscard]] const Subsystem& at(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> names() const;
  // Stride of the label in the flat index.
  [[nodiscard]] std::size_t stride(const std::string& name) const;

  // Sub-registry with only the given names, in the order given.
  [[nodiscard]] Registry select(std::span<const std::string> names) const;
  // Sub-registry without the given names, original order kept.
  [[nodiscard]] Registry without(std::span<const std::string> names) const;

  [[nodiscard]] Registry concat(const Registry& other) const;

  // Flat offsets, in this registry's index space, of every index of `sub`
  // (whose labels must all belong to this registry) enumerated in `sub`'s
  // own mixed-radix order.
  [[nodiscard]] std::vector<std::size_t> offsets_of(const Registry& sub) const;

  // Same label set (order ignored).
  [[nodiscard]] bool same_labels(const Registry& other) const;

  friend bool operator==(const Registry& a, const Registry& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<Subsystem> labels_;
  std::size_t total_dim_ = 1;
};

class LabeledOperator {
 public:
  LabeledOperator() : registry_(), entries_(Matrix::Ones(1, 1)) {}
  LabeledOperator(Registry registry, Matrix entries);

  [[nodiscard]] const Registry& registry() const { return registry_; }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] std::size_t dim() const { return registry_.total_dim(); }
  [[nodiscard]] cplx trace() const { return entries_.trace(); }

  [[nodiscard]] LabeledOperator scaled(cplx factor) const;
  [[nodiscard]] LabeledOperator adjoint() const;

  // Identity and maximally mixed operators on a registry.
  static LabeledOperator identity(const Registry& r);
  static LabeledOperator maximally_mixed(const Registry& r);
  static LabeledOperator zero(const Registry& r);

 private:
  Registry registry_;
  Matrix entries_;
};

class LabeledVector {
 public:
  LabeledVector() : registry_(), entries_(Vector::Ones(1)) {}
  LabeledVector(Registry registry, Vector entries);

  [[nodiscard]] const Registry& registry() const { return registry_; }
  [[nodiscard]] const Vector& vector() const { return entries_; }
  [[nodiscard]] double norm() const { return entries_.norm(); }

  [[nodiscard]] LabeledVector scaled(cplx factor) const;
  [[nodiscard]] LabeledVector normalized() const;

  // |v><v|
  [[nodiscard]] LabeledOperator projector() const;
  // Tr_over |v><v|, computed without forming the full projector.
  [[nodiscard]] LabeledOperator reduced(std::span<const std::string> over) const;

  static LabeledVector basis(const Registry& r, std::size_t index);
  // Normalized sum_i |i>|i> across the two registries (flattened, equal dims).
  static LabeledVector max_entangled(const Registry& left, const Registry& right);

 private:
  Registry registry_;
  Vector entries_;
};

// Kronecker product in registry order. Throws DuplicateLabel.
LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b);
LabeledOperator tensor(std::span<const LabeledOperator> ops);
LabeledVector tensor(const LabeledVector& a, const LabeledVector& b);
LabeledVector tensor(std::span<const LabeledVector> vecs);

// Tr over the named subsystems. Throws UnknownLabel.
LabeledOperator partial_trace(const LabeledOperator& w, std::span<const std::string> over);
LabeledOperator partial_trace(const LabeledOperator& w, std::initializer_list<std::string> over);

// Re-indexes `w` so its registry follows `new_order`. Throws BadPermutation.
LabeledOperator permute(const LabeledOperator& w, std::span<const std::string> new_order);
LabeledVector permute(const LabeledVector& v, std::span<const std::string> new_order);

// Renames subsystems; dims are kept.
LabeledOperator relabel(const LabeledOperator& w,
                        std::span<const std::pair<std::string, std::string>> renames);
LabeledVector relabel(const LabeledVector& v,
                      std::span<const std::pair<std::string, std::string>> renames);

// Tr_S[(op^T (x) 1) w] where S is op's registry, a subset of w's. The result
// lives on the remaining labels of w in w's order. With S equal to the whole
// registry this is the scalar sum_ij op_ij w_ij packed in a 1x1 operator.
LabeledOperator contract(const LabeledOperator& w, const LabeledOperator& op);

// sum_ij a_ij b_ij after aligning b to a's registry; Tr(a^T b).
cplx pairing(const LabeledOperator& a, const LabeledOperator& b);

// X -> sum_k (K_k (x) 1) X (K_k (x) 1)^dagger, where each K_k maps the named
// input labels (flattened in the given order) to the new output labels. The
// outputs are placed first in the result registry, followed by untouched
// labels in their original order.
LabeledOperator apply_kraus(const LabeledOperator& x, std::span<const Matrix> kraus,
                            std::span<const std::string> inputs, const Registry& outputs);
LabeledVector apply_linear(const LabeledVector& v, const Matrix& k,
                           std::span<const std::string> inputs, const Registry& outputs);

[[nodiscard]] double hermiticity_residue(const LabeledOperator& w);
[[nodiscard]] double min_eigenvalue(const LabeledOperator& w);
// Hermitian within tol*scale and lambda_min >= -tol*scale with
// scale = max(1, max |w_ij|).
[[nodiscard]] bool is_psd(const LabeledOperator& w, double tol = kDefaultTol);

// max |a_ij - b_ij| after aligning b to a's registry. Throws DimError if the
// label sets differ.
[[nodiscard]] double max_abs_diff(const LabeledOperator& a, const LabeledOperator& b);

}  // namespace cfluct
