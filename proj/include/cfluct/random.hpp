#pragma once

// Seeded random states, channels and amplitude tables for property tests
// and sampling.

#include <cstddef>
#include <random>

#include "cfluct/capacity.hpp"
#include "cfluct/clean_models.hpp"
#include "cfluct/sectors.hpp"

namespace cfluct {

using Rng = std::mt19937_64;

// Haar-distributed unit vector.
Vector random_unit_vector(std::size_t dim, Rng& rng);
// Haar-distributed unitary.
Matrix random_unitary(std::size_t dim, Rng& rng);
// Rank-`rank` density matrix from a Ginibre matrix.
Matrix random_density_matrix(std::size_t dim, std::size_t rank, Rng& rng);
// Kraus operators (dim_out x dim_in) of a random channel: slices of a Haar
// isometry from dim_in into dim_out * count.
std::vector<Matrix> random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t count, Rng& rng);

// Uniform on the unit sphere of C^3 (phases included).
AmplitudeVector3 random_amplitudes(Rng& rng);
// Random amplitudes on the seven allowed cells, all of them nonzero.
SectoredAmplitudes random_sectored_amplitudes(Rng& rng);
// Random pre/post channels inside both parties of a harmonic pair.
LocalOperationPair random_local_operations(std::size_t wire_dim, Rng& rng);

}  // namespace cfluct
