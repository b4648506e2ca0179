#pragma once

// JSON model files (schema_version "1"). Complex numbers are [re, im]
// pairs; matrices are arrays of rows.
//
//   harmonic:      alpha (3 complex), wire_dim, e3_dim?, psi?
//   sectored:      massless_dim, massive_dim, probabilities (3x3, numbers or
//                  exact [k, n, m] = k/n - m 1e-10) or amplitudes (3x3
//                  complex), psi_massless?, psi_massive?
//   partial_swap:  p, wire_dim, rho (matrix, "maximally_mixed" or
//                  "maximally_entangled"), channel {from: "a2", to: "a2'",
//                  kraus?}
//   clean_general: parties {A, B: {inputs, outputs: [[name, dim], ...]}},
//                  environment [[name, dim], ...], amplitudes (complex),
//                  branches [{relation: "A->B" | "A<-B" | "A-B", vector}]
//                  with vectors on (A inputs, A outputs, B inputs,
//                  B outputs, environment).

#include <optional>
#include <string>
#include <vector>

#include "cfluct/clean_models.hpp"
#include "cfluct/process.hpp"
#include "cfluct/sectors.hpp"

namespace cfluct {

enum class ModelKind { harmonic, clean_general, partial_swap, sectored };

[[nodiscard]] std::string to_string(ModelKind k);

struct SectoredModelSpec {
  SectoredAmplitudes amps;
  std::size_t massless_dim = 2;
  std::size_t massive_dim = 2;
  std::optional<Vector> psi_massless;
  std::optional<Vector> psi_massive;
};

struct CleanGeneralSpec {
  std::array<PartySpec, 2> parties;
  std::vector<cplx> amplitudes;
  std::vector<CleanBranch> branches;
};

struct ModelFile {
  ModelKind kind = ModelKind::harmonic;
  std::optional<HarmonicCleanModel> harmonic;
  std::optional<SectoredModelSpec> sectored;
  std::optional<PartialSwapModel> partial_swap;
  std::optional<CleanGeneralSpec> clean_general;
};

// Structural problems raise ParseError (with the offending key path);
// well-formed but invalid models raise the builders' errors (NormError,
// ConstraintViolation, ...).
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);

// The bipartite process on A, B described by the file (environment and G
// traced out).
ProcessMatrix bipartite_process(const ModelFile& m);

}  // namespace cfluct
