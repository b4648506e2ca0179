#pragma once

// Typicality of sectored clean models under the four candidate readings of
// the tendency of massless objects to track large causal fluctuations, and
// the check that massive-sector signalling is always matched by light.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfluct/capacity.hpp"
#include "cfluct/sectors.hpp"

namespace cfluct {

// What "large" connectivity and "comparable" probabilities mean. Both are
// free parameters and are echoed in every verdict.
struct TendencyThresholds {
  double theta_connect = 0.9;
  double kappa_comparable = 2.0;

  // Throws DomainError.
  void check() const;
};

// V:    p_connect large iff the massive probabilities are comparable
// VS:   ... iff both sectors are comparable
// S:    ... iff the massless probabilities are comparable
// VorS: ... iff either sector is comparable
enum class Condition { V, VS, S, VorS };

[[nodiscard]] std::string to_string(Condition c);
// Throws ParseError.
[[nodiscard]] Condition parse_condition(const std::string& text);

// p1 + p2 of the massless marginal. Throws NormError unless p is a
// probability vector within kNormTol.
double p_connect(const Probabilities3& p);

// max(p) / max(min(p), 1e-300) <= kappa.
bool is_comparable(const Probabilities3& p, double kappa);

struct TypicalityVerdict {
  Condition condition = Condition::V;
  TendencyThresholds thresholds;
  Probabilities3 massless{};
  Probabilities3 massive{};
  double p_connect = 0.0;
  bool large = false;
  bool massless_comparable = false;
  bool massive_comparable = false;
  bool rhs = false;
  bool typical = false;

  // e.g. "large and rhs holds"
  [[nodiscard]] std::string detail() const;
};

TypicalityVerdict classify(const SectoredAmplitudes& amps, Condition cond, const TendencyThresholds& thr = {});

struct LeakageEntry {
  Sector sector = Sector::massless;
  Direction direction = Direction::forward;
  double eps = 0.0;
  double bits = 0.0;
};

struct LeakageReport {
  // Harmonic parameters of each sector (massless, massive).
  std::array<HarmonicSummary, 2> sectors{};
  std::vector<double> eps_tested;
  std::vector<LeakageEntry> entries;
  bool superluminal_forward = false;
  bool superluminal_backward = false;
  bool superluminal = false;
};

// eps values at which a sector with p > 0 in some direction is guaranteed a
// positive capacity there (0.75 (1 - p/2)), so every nonzero connection is
// seen by some tested eps.
std::vector<double> leakage_witness_eps(const std::array<HarmonicSummary, 2>& sectors);

// Capacities per sector and direction on `eps` plus the witness values. A
// direction leaks when the massive sector has positive capacity at some
// tested eps while the massless one is zero at all of them. eps must lie in
// [0, 3/4) (DomainError); above it even a non-signalling sector has positive
// capacity.
LeakageReport leakage_report(const std::array<HarmonicSummary, 2>& sectors, std::span<const double> eps);
LeakageReport leakage_report(const SectoredAmplitudes& amps, std::size_t massless_dim, std::size_t massive_dim,
                             std::span<const double> eps);
// From a sectored bipartite process; each reduced sector must be harmonic
// (ModelClassError).
LeakageReport leakage_report(const ProcessMatrix& w_ab, std::span<const double> eps);

}  // namespace cfluct
