#include "cfluct/closeness.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cfluct/errors.hpp"
#include "cfluct/random.hpp"

namespace cfluct {

ClosenessCriterion ClosenessCriterion::default_criterion() { return {{{0.01, 2.0}}, {{0.01, 3.0}}}; }

void ClosenessCriterion::check() const {
  if (forward.empty() || backward.empty()) throw DomainError("closeness needs eps values in both directions");
  for (const auto* m : {&forward, &backward})
    for (const auto& [eps, thr] : *m) {
      if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError(fmt::format("eps {} outside [0, 1]", eps));
      if (!(thr >= 0.0)) throw DomainError(fmt::format("threshold {} must be non-negative", thr));
    }
}

ClosenessReport are_close(const CapacityMeasure& z, const CapacityMeasure& w, const ClosenessCriterion& c) {
  c.check();
  for (Direction d : {Direction::forward, Direction::backward})
    if (z.wire_dim(d) != w.wire_dim(d))
      throw DimError(fmt::format("{} wire dimensions differ ({} vs {}); comparing them needs a normalization that "
                                 "is not implemented",
                                 to_string(d), z.wire_dim(d), w.wire_dim(d)));
  ClosenessReport r;
  r.method_z = z.method();
  r.method_w = w.method();
  r.close = true;
  for (Direction d : {Direction::forward, Direction::backward})
    for (const auto& [eps, thr] : d == Direction::forward ? c.forward : c.backward) {
      ClosenessEntry e{d, eps, z.capacity(d, eps), w.capacity(d, eps), thr, false};
      e.within = std::abs(e.capacity_z - e.capacity_w) <= thr;
      r.close = r.close && e.within;
      r.entries.push_back(e);
    }
  return r;
}

ClosenessReport are_close(const ProcessMatrix& z, const ProcessMatrix& w, const ClosenessCriterion& c) {
  return are_close(CapacityMeasure::from_process(z, true), CapacityMeasure::from_process(w, true), c);
}

ClosenessReport are_close_in_sector(const ProcessMatrix& z, const ProcessMatrix& w, Sector s,
                                    const ClosenessCriterion& c) {
  return are_close(reduce_sector(z, s), reduce_sector(w, s), c);
}

std::string to_string(CalibrationStatus s) {
  switch (s) {
    case CalibrationStatus::typical: return "typical";
    case CalibrationStatus::atypical: return "atypical";
    case CalibrationStatus::uncalibrated: return "uncalibrated";
  }
  return "?";
}

CalibratedVerdict calibrate_typicality(const CapacityMeasure& general, const CapacityMeasure& reference,
                                       const TypicalityVerdict& reference_verdict, const ClosenessCriterion& c) {
  CalibratedVerdict v;
  v.closeness = are_close(general, reference, c);
  if (v.closeness.close) {
    v.status = reference_verdict.typical ? CalibrationStatus::typical : CalibrationStatus::atypical;
    v.provenance = fmt::format("inherited from reference (condition {}, theta {}, kappa {})",
                               to_string(reference_verdict.condition), reference_verdict.thresholds.theta_connect,
                               reference_verdict.thresholds.kappa_comparable);
  } else {
    v.status = CalibrationStatus::uncalibrated;
    v.provenance = "not close to the reference";
  }
  return v;
}

ThresholdSelfTest threshold_self_test(const ClosenessCriterion& c, const SectoredAmplitudes& reference,
                                      std::size_t massless_dim, std::size_t massive_dim, Condition cond,
                                      const TendencyThresholds& thr, std::size_t samples, std::uint64_t seed) {
  const auto measures = [&](const SectoredAmplitudes& a) {
    const auto [ml, mv] = marginal_probabilities(a);
    return std::array<CapacityMeasure, 2>{
        CapacityMeasure::from_summary({ml, massless_dim, massless_dim}),
        CapacityMeasure::from_summary({mv, massive_dim, massive_dim})};
  };
  const auto ref = measures(reference);
  const bool ref_typical = classify(reference, cond, thr).typical;

  Rng rng(seed);
  ThresholdSelfTest t;
  t.samples = samples;
  for (std::size_t k = 0; k < samples; ++k) {
    const SectoredAmplitudes a = random_sectored_amplitudes(rng);
    const auto m = measures(a);
    if (!are_close(m[0], ref[0], c).close || !are_close(m[1], ref[1], c).close) continue;
    ++t.close_to_reference;
    if (classify(a, cond, thr).typical != ref_typical) ++t.disagreeing;
  }
  return t;
}

}  // namespace cfluct
