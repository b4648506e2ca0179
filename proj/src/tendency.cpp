#include "cfluct/tendency.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cfluct/errors.hpp"

namespace cfluct {

void TendencyThresholds::check() const {
  if (!(theta_connect > 0.0 && theta_connect <= 1.0))
    throw DomainError(fmt::format("theta must lie in (0, 1], got {}", theta_connect));
  if (!(kappa_comparable >= 1.0)) throw DomainError(fmt::format("kappa must be at least 1, got {}", kappa_comparable));
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::V: return "V";
    case Condition::VS: return "VS";
    case Condition::S: return "S";
    case Condition::VorS: return "VorS";
  }
  return "?";
}

Condition parse_condition(const std::string& text) {
  if (text == "V") return Condition::V;
  if (text == "VS") return Condition::VS;
  if (text == "S") return Condition::S;
  if (text == "VorS") return Condition::VorS;
  throw ParseError(fmt::format("unknown condition '{}' (expected V, VS, S or VorS)", text));
}

double p_connect(const Probabilities3& p) {
  if (std::any_of(p.begin(), p.end(), [](double x) { return x < 0.0; }))
    throw NormError("negative probability");
  const double total = p[0] + p[1] + p[2];
  if (std::abs(total - 1.0) > kNormTol) throw NormError(fmt::format("probabilities sum to {:.15g}", total));
  return p[0] + p[1];
}

bool is_comparable(const Probabilities3& p, double kappa) {
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (*lo == *hi) return true;
  return *hi / std::max(*lo, 1e-300) <= kappa;
}

std::string TypicalityVerdict::detail() const {
  return fmt::format("{} and {}", large ? "large" : "not large", rhs ? "rhs holds" : "rhs fails");
}

TypicalityVerdict classify(const SectoredAmplitudes& amps, Condition cond, const TendencyThresholds& thr) {
  thr.check();
  TypicalityVerdict v;
  v.condition = cond;
  v.thresholds = thr;
  std::tie(v.massless, v.massive) = marginal_probabilities(amps);
  v.p_connect = p_connect(v.massless);
  v.large = v.p_connect >= thr.theta_connect;
  v.massless_comparable = is_comparable(v.massless, thr.kappa_comparable);
  v.massive_comparable = is_comparable(v.massive, thr.kappa_comparable);
  switch (cond) {
    case Condition::V: v.rhs = v.massive_comparable; break;
    case Condition::VS: v.rhs = v.massive_comparable && v.massless_comparable; break;
    case Condition::S: v.rhs = v.massless_comparable; break;
    case Condition::VorS: v.rhs = v.massive_comparable || v.massless_comparable; break;
  }
  v.typical = v.large == v.rhs;
  return v;
}

// ---------------------------------------------------------------------------
// Leakage

std::vector<double> leakage_witness_eps(const std::array<HarmonicSummary, 2>& sectors) {
  std::vector<double> out;
  for (const auto& s : sectors)
    for (std::size_t k = 0; k < 2; ++k)
      if (s.p[k] > 0.0) out.push_back(0.75 * (1.0 - s.p[k] / 2.0));
  return out;
}

LeakageReport leakage_report(const std::array<HarmonicSummary, 2>& sectors, std::span<const double> eps) {
  for (double e : eps)
    if (!(e >= 0.0 && e < 0.75)) throw DomainError(fmt::format("leakage needs eps in [0, 3/4), got {}", e));
  LeakageReport r;
  r.sectors = sectors;
  r.eps_tested.assign(eps.begin(), eps.end());
  for (double e : leakage_witness_eps(sectors)) r.eps_tested.push_back(e);
  std::sort(r.eps_tested.begin(), r.eps_tested.end());
  r.eps_tested.erase(std::unique(r.eps_tested.begin(), r.eps_tested.end()), r.eps_tested.end());

  const std::array<CapacityMeasure, 2> measures{CapacityMeasure::from_summary(sectors[0]),
                                                CapacityMeasure::from_summary(sectors[1])};
  for (Direction d : {Direction::forward, Direction::backward}) {
    bool light = false;
    bool matter = false;
    for (std::size_t s = 0; s < 2; ++s)
      for (double e : r.eps_tested) {
        const double bits = measures[s].capacity(d, e);
        r.entries.push_back({s == 0 ? Sector::massless : Sector::massive, d, e, bits});
        if (bits > 0.0) (s == 0 ? light : matter) = true;
      }
    const bool leaks = matter && !light;
    (d == Direction::forward ? r.superluminal_forward : r.superluminal_backward) = leaks;
  }
  r.superluminal = r.superluminal_forward || r.superluminal_backward;
  return r;
}

LeakageReport leakage_report(const SectoredAmplitudes& amps, std::size_t massless_dim, std::size_t massive_dim,
                             std::span<const double> eps) {
  const auto [ml, mv] = marginal_probabilities(amps);
  const std::array<HarmonicSummary, 2> sectors{HarmonicSummary{ml, massless_dim, massless_dim},
                                               HarmonicSummary{mv, massive_dim, massive_dim}};
  return leakage_report(sectors, eps);
}

LeakageReport leakage_report(const ProcessMatrix& w_ab, std::span<const double> eps) {
  std::array<HarmonicSummary, 2> sectors;
  for (Sector s : {Sector::massless, Sector::massive}) {
    const auto fit = fit_harmonic(reduce_sector(w_ab, s));
    if (!fit) throw ModelClassError(fmt::format("the {} sector is not of harmonic form", to_string(s)));
    sectors[s == Sector::massless ? 0 : 1] = *fit;
  }
  return leakage_report(sectors, eps);
}

}  // namespace cfluct
