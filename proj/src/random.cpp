#include "cfluct/random.hpp"

#include <cmath>

#include "cfluct/errors.hpp"

namespace cfluct {

namespace {

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(n(rng), n(rng));
  return g;
}

// Q of a QR decomposition with the phases of R's diagonal absorbed, which
// makes the result Haar distributed.
Matrix haar_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  const Matrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  Matrix out = q;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0.0) out.col(j) *= d / std::abs(d);
  }
  return out;
}

}  // namespace

Vector random_unit_vector(std::size_t dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_unitary(std::size_t dim, Rng& rng) { return haar_columns(dim, dim, rng); }

Matrix random_density_matrix(std::size_t dim, std::size_t rank, Rng& rng) {
  const Matrix g = ginibre(dim, rank, rng);
  const Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

std::vector<Matrix> random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t count, Rng& rng) {
  if (dim_out * count < dim_in) throw DimError("not enough Kraus operators for an isometry");
  const Matrix v = haar_columns(dim_out * count, dim_in, rng);
  std::vector<Matrix> kraus;
  const auto dout = static_cast<Eigen::Index>(dim_out);
  for (std::size_t k = 0; k < count; ++k) kraus.push_back(v.middleRows(static_cast<Eigen::Index>(k) * dout, dout));
  return kraus;
}

AmplitudeVector3 random_amplitudes(Rng& rng) {
  const Vector v = random_unit_vector(3, rng);
  return {v(0), v(1), v(2)};
}

SectoredAmplitudes random_sectored_amplitudes(Rng& rng) {
  Vector v = random_unit_vector(7, rng);
  Matrix3c a = Matrix3c::Zero();
  const std::array<std::pair<int, int>, 7> cells{{{0, 0}, {0, 2}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}}};
  for (std::size_t k = 0; k < cells.size(); ++k) a(cells[k].first, cells[k].second) = v(static_cast<Eigen::Index>(k));
  return SectoredAmplitudes(a);
}

LocalOperationPair random_local_operations(std::size_t wire_dim, Rng& rng) {
  return {{random_channel(wire_dim, wire_dim, 2, rng), random_channel(wire_dim, wire_dim, 2, rng)},
          {random_channel(wire_dim, wire_dim, 2, rng), random_channel(wire_dim, wire_dim, 2, rng)}};
}

}  // namespace cfluct
