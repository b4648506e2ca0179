#pragma once

// One-shot entanglement transmission capacities of bipartite processes.
//
// For harmonic models (p1 W_1 + p2 W_2 + p3 W_3) the capacity has a closed
// form in (p, eps, wire dimension). Any bipartite process can also be probed
// numerically: the sender feeds half of an m-dimensional maximally entangled
// pair into its output, the receiver compresses its input onto m levels and
// projects it jointly with the reference onto the same pair. The probe
// fidelity is computed through the Born rule only.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfluct/process.hpp"

namespace cfluct {

enum class Direction { forward, backward };

[[nodiscard]] std::string to_string(Direction d);
// "forward" / "backward"; throws ParseError.
[[nodiscard]] Direction parse_direction(const std::string& text);

// Slack used when comparing a probe fidelity against 1 - eps, so that exact
// ties on round grids are resolved inclusively despite rounding.
inline constexpr double kFidelitySlack = 1e-9;

struct CapacityQuery {
  double p = 0.0;  // p1 forward, p2 backward
  double eps = 0.0;
  std::size_t wire_dim = 2;  // |a2| forward, |b2| backward

  // Throws DomainError / DimError.
  void check() const;
};

// Largest transmissible maximally entangled dimension m (>= 1).
std::size_t q_ent_dimension(const CapacityQuery& q);
// log2 of q_ent_dimension.
double q_ent_closed_form(const CapacityQuery& q);

// 1 - 4 eps / 3; the closed form is zero exactly below it. Throws
// DomainError outside eps in [0, 3/4].
double q_ent_zero_threshold(double eps);

// p + (1 - p) / m^2, the probe fidelity on a harmonic model.
double harmonic_probe_fidelity(double p, std::size_t m);

// Sender and receiver for a direction on a bipartite process (parties()[0]
// sends forward).
struct DirectedPair {
  const PartySpec* sender;
  const PartySpec* receiver;
};
DirectedPair directed_parties(const ProcessMatrix& w, Direction dir);

// Largest m the probe can use: min(sender output dim, receiver input dim).
std::size_t probe_limit(const ProcessMatrix& w, Direction dir);

// Probe fidelity for one m. Throws DimError when m exceeds probe_limit,
// PartyError unless w is bipartite.
double fidelity_oracle(const ProcessMatrix& w, Direction dir, std::size_t m);

// Harmonic parameters of a bipartite process with wires of equal dimension.
struct HarmonicSummary {
  std::array<double, 3> p{0.0, 0.0, 1.0};
  std::size_t forward_dim = 2;   // |a2|
  std::size_t backward_dim = 2;  // |b2|
};

// Recovers p from the m = 2 probe fidelities and the marginals of W from
// its input-only reduction, then rebuilds sum_i p_i W_i and compares with W
// at max-abs `tol`. Returns nothing if W is not of that form.
std::optional<HarmonicSummary> fit_harmonic(const ProcessMatrix& w, double tol = kDefaultTol);

enum class CapacityMethod { closed_form, probe_staircase };

[[nodiscard]] std::string to_string(CapacityMethod m);

// Capacity of one bipartite process in both directions.
class CapacityMeasure {
 public:
  static CapacityMeasure from_summary(const HarmonicSummary& s);
  // Closed form when the process fits the harmonic family; otherwise the
  // probe staircase if `allow_staircase`, else ModelClassError.
  static CapacityMeasure from_process(const ProcessMatrix& w, bool allow_staircase);
  // Always the probe staircase.
  static CapacityMeasure staircase(const ProcessMatrix& w);

  [[nodiscard]] CapacityMethod method() const { return method_; }
  [[nodiscard]] const std::optional<HarmonicSummary>& summary() const { return summary_; }
  [[nodiscard]] std::size_t wire_dim(Direction d) const;
  // Capacity in bits.
  [[nodiscard]] double capacity(Direction d, double eps) const;
  // Probe fidelities F(1), ..., F(limit) (staircase only).
  [[nodiscard]] const std::vector<double>& fidelities(Direction d) const;

 private:
  CapacityMethod method_ = CapacityMethod::closed_form;
  std::optional<HarmonicSummary> summary_;
  std::array<std::size_t, 2> dims_{2, 2};
  std::array<std::vector<double>, 2> fidelities_;
};

struct CapacityPoint {
  double eps = 0.0;
  double bits = 0.0;
};

struct CapacityCurve {
  Direction direction = Direction::forward;
  std::vector<CapacityPoint> points;
};

// start, start + step, ... up to stop (inclusive within 1e-9 step). Throws
// DomainError on an empty or malformed range.
std::vector<double> eps_grid(double start, double stop, double step);
// Parses "start:stop:step"; throws ParseError.
std::vector<double> parse_eps_grid(const std::string& text);

CapacityCurve generate_curve(const CapacityMeasure& m, Direction d, std::span<const double> eps);

// Header "direction,eps,capacity_bits", numbers with 12 significant digits.
void write_curves_csv(std::ostream& out, std::span<const CapacityCurve> curves);
// Rows grouped by direction in file order. Throws InversionError on any
// malformed or truncated line.
std::vector<CapacityCurve> read_curves_csv(std::istream& in);

struct InversionResult {
  std::array<double, 3> p{};
  std::array<double, 3> abs_alpha{};
  std::optional<std::size_t> forward_dim;
  std::optional<std::size_t> backward_dim;
  // Feasible (1 - p) intervals implied by each curve.
  std::array<double, 2> forward_q_interval{};
  std::array<double, 2> backward_q_interval{};
};

// Recovers |alpha| (and the wire dimensions when the curves reach
// saturation) from the step locations of both staircases. Throws
// InversionError on inconsistent curves.
InversionResult invert_capacity_curves(const CapacityCurve& fwd, const CapacityCurve& bwd);

// Kraus pairs acting inside A and inside B.
struct LocalOperationPair {
  LocalOperation a;
  LocalOperation b;
};

struct AxiomViolation {
  std::string axiom;
  Direction direction = Direction::forward;
  double eps = 0.0;
  std::size_t operation = 0;  // index into the operation list; SIZE_MAX for W itself
  double before = 0.0;
  double after = 0.0;
};

struct AxiomReport {
  std::size_t checks = 0;
  bool normalization_ok = true;
  std::vector<AxiomViolation> violations;

  [[nodiscard]] bool ok() const { return normalization_ok && violations.empty(); }
};

// On every eps (each in [0, 3/4)) and both directions: the capacity never
// grows under the local operations, is non-negative, is positive only where
// can_signal holds, and never exceeds log2 of the wire dimension, which the
// identity-wire model attains.
AxiomReport axiom_suite(const ProcessMatrix& w, std::span<const LocalOperationPair> ops,
                        std::span<const double> eps);

}  // namespace cfluct
