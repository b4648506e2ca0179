#pragma once

// Massless/massive sector factorization. Every party system splits into a
// massless and a massive factor; a sectored clean model assigns amplitude
// a_ij to "massless relation i, massive relation j", and the pairs (1,2) and
// (2,1) (opposite causal orders in the two sectors) are forbidden.

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cfluct/clean_models.hpp"
#include "cfluct/process.hpp"

namespace cfluct {

using Matrix3c = Eigen::Matrix<cplx, 3, 3>;
using Matrix3d = Eigen::Matrix3d;
using Probabilities3 = std::array<double, 3>;

// k/n - m * 1e-10, kept symbolic until converted.
struct ExactProbability {
  long k = 0;
  long n = 1;
  long m = 0;

  [[nodiscard]] double value() const;
};

using ExactTable = std::array<std::array<ExactProbability, 3>, 3>;

class SectoredAmplitudes {
 public:
  // Throws ConstraintViolation if a(0,1) or a(1,0) is nonzero, NormError
  // unless sum |a_ij|^2 = 1 within kNormTol.
  explicit SectoredAmplitudes(const Matrix3c& a);
  // Real non-negative amplitudes sqrt(p_ij).
  static SectoredAmplitudes from_probabilities(const Matrix3d& p);
  static SectoredAmplitudes from_exact(const ExactTable& table);

  [[nodiscard]] const Matrix3c& amplitudes() const { return a_; }
  // |a_ij|^2, or the exact table's values when built from one.
  [[nodiscard]] const Matrix3d& probabilities() const { return p_; }

 private:
  SectoredAmplitudes(const Matrix3c& a, const Matrix3d& p);
  Matrix3c a_;
  Matrix3d p_;
};

// Row sums (massless) and column sums (massive) of the probability table.
std::pair<Probabilities3, Probabilities3> marginal_probabilities(const SectoredAmplitudes& amps);

// The connected-massless / uniformly fluctuating massive example, and the
// connected-massless / nearly frozen massive example.
ExactTable typical_example_table();
ExactTable atypical_example_table();

// Labels and parties of a sectored pair A, B: massless labels carry the
// suffix "_ml", massive ones "_mv".
HarmonicLabels sector_labels(Sector s);
std::array<PartySpec, 2> sectored_parties(std::size_t massless_dim, std::size_t massive_dim);

struct SectorBranches {
  std::array<CleanBranch, 3> massless;
  std::array<CleanBranch, 3> massive;
};

// |w> = sum_ij a_ij |i>^{g_ml} |j>^{g_mv} |w_i>^{ml} |w_j>^{mv}, environment
// traced, on G (inputs g_ml, g_mv), A, B. Branch registries must use
// disjoint labels for the two sectors.
ProcessMatrix build_sectored_noninteracting(const SectoredAmplitudes& amps, const SectorBranches& branches,
                                            const std::array<PartySpec, 2>& parties);

// Harmonic branches in both sectors with the given initial states (default
// |000>).
SectorBranches harmonic_sector_branches(std::size_t massless_dim, std::size_t massive_dim,
                                        const std::optional<Vector>& psi_massless = std::nullopt,
                                        const std::optional<Vector>& psi_massive = std::nullopt);

// sum_ij p_ij W_i^{ml} (x) W_j^{mv} on sectored A, B, built directly from
// the harmonic W_i of each sector.
ProcessMatrix build_sectored_harmonic_reduced(const SectoredAmplitudes& amps, std::size_t massless_dim,
                                              std::size_t massive_dim,
                                              const std::optional<Vector>& psi_massless = std::nullopt,
                                              const std::optional<Vector>& psi_massive = std::nullopt);

// Traces the other sector out of every party. Throws SectorError unless all
// parties are sectored.
ProcessMatrix reduce_sector(const ProcessMatrix& w, Sector keep);

}  // namespace cfluct
