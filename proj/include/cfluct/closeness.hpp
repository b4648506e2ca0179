#pragma once

// Closeness of two bipartite processes measured by their capacities, and
// calibration of general models against typical clean models.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfluct/capacity.hpp"
#include "cfluct/tendency.hpp"

namespace cfluct {

// Per-direction map eps -> maximal allowed capacity difference (bits).
struct ClosenessCriterion {
  std::map<double, double> forward;
  std::map<double, double> backward;

  // eps = 1/100 in both directions with thresholds 2 (forward), 3 (backward).
  static ClosenessCriterion default_criterion();
  // Throws DomainError on empty sets, negative thresholds or eps outside [0, 1].
  void check() const;
};

struct ClosenessEntry {
  Direction direction = Direction::forward;
  double eps = 0.0;
  double capacity_z = 0.0;
  double capacity_w = 0.0;
  double threshold = 0.0;
  bool within = false;
};

struct ClosenessReport {
  bool close = false;
  CapacityMethod method_z = CapacityMethod::closed_form;
  CapacityMethod method_w = CapacityMethod::closed_form;
  std::vector<ClosenessEntry> entries;
};

// Throws DimError unless both measures have the same wire dimensions; the
// capacities of systems of unequal size are not rescaled here.
ClosenessReport are_close(const CapacityMeasure& z, const CapacityMeasure& w, const ClosenessCriterion& c);
// Closed form for harmonic processes, probe staircase otherwise.
ClosenessReport are_close(const ProcessMatrix& z, const ProcessMatrix& w, const ClosenessCriterion& c);
// Both processes restricted to one sector first.
ClosenessReport are_close_in_sector(const ProcessMatrix& z, const ProcessMatrix& w, Sector s,
                                    const ClosenessCriterion& c);

enum class CalibrationStatus { typical, atypical, uncalibrated };

[[nodiscard]] std::string to_string(CalibrationStatus s);

struct CalibratedVerdict {
  CalibrationStatus status = CalibrationStatus::uncalibrated;
  ClosenessReport closeness;
  // Where the verdict came from, e.g. "inherited from reference (V)".
  std::string provenance;
};

// The general model inherits the reference's verdict when close to it.
CalibratedVerdict calibrate_typicality(const CapacityMeasure& general, const CapacityMeasure& reference,
                                       const TypicalityVerdict& reference_verdict, const ClosenessCriterion& c);

struct ThresholdSelfTest {
  std::size_t samples = 0;
  std::size_t close_to_reference = 0;
  std::size_t disagreeing = 0;  // close to the reference but with the other verdict

  [[nodiscard]] bool accepted() const { return disagreeing == 0; }
};

// Draws `samples` random sectored harmonic models; the criterion is accepted
// only if every sample close to the reference in both sectors shares the
// reference's verdict under `cond`.
ThresholdSelfTest threshold_self_test(const ClosenessCriterion& c, const SectoredAmplitudes& reference,
                                      std::size_t massless_dim, std::size_t massive_dim, Condition cond,
                                      const TendencyThresholds& thr = {}, std::size_t samples = 100,
                                      std::uint64_t seed = 1);

}  // namespace cfluct
