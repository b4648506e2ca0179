#include "cfluct/capacity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "cfluct/clean_models.hpp"
#include "cfluct/errors.hpp"

namespace cfluct {

std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

Direction parse_direction(const std::string& text) {
  if (text == "forward") return Direction::forward;
  if (text == "backward") return Direction::backward;
  throw ParseError(fmt::format("unknown direction '{}'", text));
}

std::string to_string(CapacityMethod m) {
  return m == CapacityMethod::closed_form ? "closed_form" : "probe_staircase";
}

void CapacityQuery::check() const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("p = {} outside [0, 1]", p));
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError(fmt::format("eps = {} outside [0, 1]", eps));
  if (wire_dim == 0) throw DimError("wire dimension must be at least 1");
}

std::size_t q_ent_dimension(const CapacityQuery& q) {
  q.check();
  if (q.p >= 1.0 - q.eps - 1e-12) return q.wire_dim;
  // m is admissible iff m^2 (1 - eps / (1 - p)) <= 1.
  const double shrink = 1.0 - q.eps / (1.0 - q.p);
  std::size_t m = 1;
  while (m < q.wire_dim) {
    const double next = static_cast<double>(m + 1);
    if (next * next * shrink > 1.0 + 1e-12) break;
    ++m;
  }
  return m;
}

double q_ent_closed_form(const CapacityQuery& q) { return std::log2(static_cast<double>(q_ent_dimension(q))); }

double q_ent_zero_threshold(double eps) {
  if (!(eps >= 0.0 && eps <= 0.75))
    throw DomainError(fmt::format("zero-capacity threshold needs eps in [0, 3/4], got {}", eps));
  return 1.0 - 4.0 * eps / 3.0;
}

double harmonic_probe_fidelity(double p, std::size_t m) {
  const double mm = static_cast<double>(m);
  return p + (1.0 - p) / (mm * mm);
}

// ---------------------------------------------------------------------------
// Probe fidelity through the Born rule

DirectedPair directed_parties(const ProcessMatrix& w, Direction dir) {
  if (w.parties().size() != 2)
    throw PartyError(fmt::format("capacities need a bipartite process, got {} parties", w.parties().size()));
  const PartySpec* a = &w.parties()[0];
  const PartySpec* b = &w.parties()[1];
  return dir == Direction::forward ? DirectedPair{a, b} : DirectedPair{b, a};
}

std::size_t probe_limit(const ProcessMatrix& w, Direction dir) {
  const auto [s, r] = directed_parties(w, dir);
  return std::min(s->output_dim(), r->input_dim());
}

double fidelity_oracle(const ProcessMatrix& w, Direction dir, std::size_t m) {
  const auto [sender, receiver] = directed_parties(w, dir);
  const std::size_t limit = probe_limit(w, dir);
  if (m == 0 || m > limit)
    throw DimError(fmt::format("probe dimension {} exceeds the usable wire dimension {}", m, limit));

  const std::string ref_out = "__probe_ref_out";
  const std::string ref_in = "__probe_ref_in";
  const LabeledOperator pair = LabeledVector::max_entangled(Registry{{ref_out, m}}, Registry{{ref_in, m}}).projector();
  const LabeledOperator w_ext = tensor(w.op(), pair);

  PartySpec s_ext{sender->name, sender->inputs, sender->outputs, {}, {}};
  s_ext.outputs.push_back({ref_out, m});
  PartySpec r_ext{receiver->name, receiver->inputs, receiver->outputs, {}, {}};
  r_ext.inputs.push_back({ref_in, m});
  const ProcessMatrix extended({s_ext, r_ext}, w_ext);

  const auto mi = static_cast<Eigen::Index>(m);
  const auto s_out = static_cast<Eigen::Index>(sender->output_dim());
  const auto s_in = static_cast<Eigen::Index>(sender->input_dim());
  const auto r_in = static_cast<Eigen::Index>(receiver->input_dim());
  const auto r_out = static_cast<Eigen::Index>(receiver->output_dim());

  // Sender: ignore the input, emit sum_k |k>|k> / sqrt(m) on (outputs, ref).
  Vector phi = Vector::Zero(s_out * mi);
  for (Eigen::Index k = 0; k < mi; ++k) phi(k * mi + k) = 1.0 / std::sqrt(static_cast<double>(m));
  const Matrix sigma = phi * phi.adjoint();
  const ChoiInstrument send{s_ext, {choi_measure_prepare(s_ext, Matrix::Identity(s_in, s_in), sigma)}};

  // Receiver: compress the input onto its first m levels (the rest is sent
  // to |0>), then test (decoded, ref) against the maximally entangled pair.
  // The effect is the adjoint decoder applied to that projector.
  Vector lifted = Vector::Zero(r_in * mi);
  for (Eigen::Index k = 0; k < mi; ++k) lifted(k * mi + k) = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix effect = lifted * lifted.adjoint();
  for (Eigen::Index k = mi; k < r_in; ++k) effect(k * mi, k * mi) += 1.0 / static_cast<double>(m);
  const Matrix reset = Matrix::Identity(r_out, r_out) / static_cast<double>(r_out);
  const Matrix rest = Matrix::Identity(r_in * mi, r_in * mi) - effect;
  const ChoiInstrument receive{r_ext,
                               {choi_measure_prepare(r_ext, effect, reset), choi_measure_prepare(r_ext, rest, reset)}};

  const std::array<ChoiInstrument, 2> instruments{send, receive};
  const std::array<std::size_t, 2> outcome{0, 0};
  return born_probability(extended, instruments, outcome);
}

// ---------------------------------------------------------------------------
// Harmonic fit

std::optional<HarmonicSummary> fit_harmonic(const ProcessMatrix& w, double tol) {
  if (w.parties().size() != 2) return std::nullopt;
  const PartySpec& a = w.parties()[0];
  const PartySpec& b = w.parties()[1];
  if (a.inputs.size() != 1 || a.outputs.size() != 1 || b.inputs.size() != 1 || b.outputs.size() != 1)
    return std::nullopt;
  const std::size_t d = a.inputs[0].dim;
  if (a.outputs[0].dim != d || b.inputs[0].dim != d || b.outputs[0].dim != d) return std::nullopt;

  HarmonicLabels l;
  l.a1 = a.inputs[0].name;
  l.a2 = a.outputs[0].name;
  l.b1 = b.inputs[0].name;
  l.b2 = b.outputs[0].name;

  const auto snap = [](double x) {
    if (std::abs(x) < 1e-12) return 0.0;
    if (std::abs(x - 1.0) < 1e-12) return 1.0;
    return x;
  };
  double p1 = 0.0;
  double p2 = 0.0;
  if (d >= 2) {
    p1 = snap((fidelity_oracle(w, Direction::forward, 2) - 0.25) * 4.0 / 3.0);
    p2 = snap((fidelity_oracle(w, Direction::backward, 2) - 0.25) * 4.0 / 3.0);
  }
  if (p1 < -tol || p2 < -tol || p1 + p2 > 1.0 + tol) return std::nullopt;
  p1 = std::clamp(p1, 0.0, 1.0);
  p2 = std::clamp(p2, 0.0, 1.0 - p1);
  const double p3 = std::max(0.0, 1.0 - p1 - p2);

  const std::vector<std::string> in_order{l.a1, l.b1};
  const LabeledOperator r = permute(partial_trace(w.op(), {l.a2, l.b2}), in_order);
  const auto di = static_cast<Eigen::Index>(d);
  const Matrix pi = Matrix::Identity(di, di) / static_cast<double>(d);
  const Matrix rx_raw = partial_trace(r, {l.b1}).matrix();
  const Matrix ry_raw = partial_trace(r, {l.a1}).matrix();

  const Matrix rho_x = p1 + p3 > 1e-12 ? Matrix((rx_raw - p2 * pi) / (p1 + p3)) : pi;
  const Matrix rho_y = p2 + p3 > 1e-12 ? Matrix((ry_raw - p1 * pi) / (p2 + p3)) : pi;
  Matrix rho_xy;
  if (p3 > 1e-12) {
    Matrix x_pi(di * di, di * di), pi_y(di * di, di * di);
    for (Eigen::Index i = 0; i < di; ++i)
      for (Eigen::Index j = 0; j < di; ++j) {
        x_pi.block(i * di, j * di, di, di) = rho_x(i, j) * pi;
        pi_y.block(i * di, j * di, di, di) = pi(i, j) * rho_y;
      }
    rho_xy = (r.matrix() - p1 * x_pi - p2 * pi_y) / p3;
  } else {
    rho_xy = Matrix::Zero(di * di, di * di);
    for (Eigen::Index i = 0; i < di; ++i)
      for (Eigen::Index j = 0; j < di; ++j) rho_xy.block(i * di, j * di, di, di) = rho_x(i, j) * rho_y;
  }

  const std::array<double, 3> p{p1, p2, p3};
  Matrix rebuilt;
  Registry reg;
  for (int i = 0; i < 3; ++i) {
    const LabeledOperator wi = build_w_i_from_marginals(i + 1, rho_x, rho_y, rho_xy, d, l).op();
    if (i == 0) {
      reg = wi.registry();
      rebuilt = p[0] * wi.matrix();
    } else {
      rebuilt += p[static_cast<std::size_t>(i)] * wi.matrix();
    }
  }
  if (max_abs_diff(w.op(), LabeledOperator(reg, rebuilt)) > tol) return std::nullopt;
  return HarmonicSummary{p, d, d};
}

// ---------------------------------------------------------------------------
// Capacity measure

namespace {

std::size_t dir_index(Direction d) { return d == Direction::forward ? 0 : 1; }

}  // namespace

CapacityMeasure CapacityMeasure::from_summary(const HarmonicSummary& s) {
  const double total = s.p[0] + s.p[1] + s.p[2];
  if (std::abs(total - 1.0) > kNormTol) throw NormError("harmonic probabilities must sum to 1");
  CapacityMeasure m;
  m.method_ = CapacityMethod::closed_form;
  m.summary_ = s;
  m.dims_ = {s.forward_dim, s.backward_dim};
  return m;
}

CapacityMeasure CapacityMeasure::from_process(const ProcessMatrix& w, bool allow_staircase) {
  if (auto s = fit_harmonic(w)) return from_summary(*s);
  if (!allow_staircase)
    throw ModelClassError("process is not of harmonic form; the closed form does not apply (use the probe staircase)");
  return staircase(w);
}

CapacityMeasure CapacityMeasure::staircase(const ProcessMatrix& w) {
  CapacityMeasure m;
  m.method_ = CapacityMethod::probe_staircase;
  for (Direction d : {Direction::forward, Direction::backward}) {
    const auto [sender, receiver] = directed_parties(w, d);
    m.dims_[dir_index(d)] = sender->output_dim();
    auto& f = m.fidelities_[dir_index(d)];
    const std::size_t limit = probe_limit(w, d);
    for (std::size_t k = 1; k <= limit; ++k) f.push_back(fidelity_oracle(w, d, k));
  }
  return m;
}

std::size_t CapacityMeasure::wire_dim(Direction d) const { return dims_[dir_index(d)]; }

const std::vector<double>& CapacityMeasure::fidelities(Direction d) const { return fidelities_[dir_index(d)]; }

double CapacityMeasure::capacity(Direction d, double eps) const {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError(fmt::format("eps = {} outside [0, 1]", eps));
  if (method_ == CapacityMethod::closed_form)
    return q_ent_closed_form({summary_->p[dir_index(d)], eps, dims_[dir_index(d)]});
  const auto& f = fidelities_[dir_index(d)];
  std::size_t best = 1;
  for (std::size_t k = 1; k <= f.size(); ++k)
    if (f[k - 1] >= 1.0 - eps - kFidelitySlack) best = k;
  return std::log2(static_cast<double>(best));
}

// ---------------------------------------------------------------------------
// Curves

std::vector<double> eps_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop))
    throw DomainError(fmt::format("bad eps grid {}:{}:{}", start, stop, step));
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double raw = start + static_cast<double>(i) * step;
    out.push_back(std::round(raw * 1e12) / 1e12);
  }
  return out;
}

namespace {

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParseError(fmt::format("'{}' is not a number", std::string(text)));
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<double> parse_eps_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ParseError(fmt::format("eps grid '{}' must look like start:stop:step", text));
  try {
    return eps_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

CapacityCurve generate_curve(const CapacityMeasure& m, Direction d, std::span<const double> eps) {
  CapacityCurve c{d, {}};
  c.points.reserve(eps.size());
  for (double e : eps) c.points.push_back({e, m.capacity(d, e)});
  return c;
}

void write_curves_csv(std::ostream& out, std::span<const CapacityCurve> curves) {
  out << "direction,eps,capacity_bits\n";
  for (const auto& c : curves)
    for (const auto& p : c.points) out << fmt::format("{},{:.12g},{:.12g}\n", to_string(c.direction), p.eps, p.bits);
}

std::vector<CapacityCurve> read_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InversionError("empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "direction,eps,capacity_bits") throw InversionError(fmt::format("unexpected CSV header '{}'", line));
  std::vector<CapacityCurve> curves;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw InversionError(fmt::format("line {}: expected 3 fields", lineno));
    try {
      const Direction d = parse_direction(std::string(fields[0]));
      const CapacityPoint p{parse_double(fields[1]), parse_double(fields[2])};
      auto it = std::find_if(curves.begin(), curves.end(), [d](const CapacityCurve& c) { return c.direction == d; });
      if (it == curves.end()) {
        curves.push_back({d, {}});
        it = std::prev(curves.end());
      }
      it->points.push_back(p);
    } catch (const ParseError& e) {
      throw InversionError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return curves;
}

// ---------------------------------------------------------------------------
// Inversion

namespace {

struct CurveEstimate {
  double q_lo = 0.0;  // feasible 1 - p
  double q_hi = 1.0;
  std::size_t max_level = 1;
  bool saturated = false;
};

// A curve at level m on eps means eps >= q (1 - 1/m^2), and, when m is below
// the wire dimension, eps < q (1 - 1/(m+1)^2).
CurveEstimate estimate(const CapacityCurve& c) {
  const std::string name = to_string(c.direction);
  if (c.points.empty()) throw InversionError(fmt::format("{} curve is empty", name));
  std::vector<std::size_t> levels;
  double prev_eps = -1.0;
  for (const auto& p : c.points) {
    if (!(p.eps >= 0.0 && p.eps <= 1.0)) throw InversionError(fmt::format("{} curve: eps {} outside [0, 1]", name, p.eps));
    if (p.eps <= prev_eps) throw InversionError(fmt::format("{} curve: eps values must increase", name));
    prev_eps = p.eps;
    const double m = std::exp2(p.bits);
    const double r = std::round(m);
    if (!(p.bits >= 0.0) || std::abs(m - r) > 1e-6 * r)
      throw InversionError(fmt::format("{} curve: capacity {} is not log2 of an integer", name, p.bits));
    const auto level = static_cast<std::size_t>(r);
    if (!levels.empty() && level < levels.back())
      throw InversionError(fmt::format("{} curve decreases at eps = {}", name, p.eps));
    levels.push_back(level);
  }
  CurveEstimate e;
  e.max_level = levels.back();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double eps = c.points[k].eps;
    const auto m = static_cast<double>(levels[k]);
    if (levels[k] >= 2) e.q_hi = std::min(e.q_hi, eps / (1.0 - 1.0 / (m * m)));
    if (levels[k] < e.max_level) e.q_lo = std::max(e.q_lo, eps / (1.0 - 1.0 / ((m + 1.0) * (m + 1.0))));
  }
  if (e.q_lo > e.q_hi + 1e-12)
    throw InversionError(fmt::format("{} curve: step locations are inconsistent with any harmonic model", name));
  e.q_lo = std::min(e.q_lo, e.q_hi);
  const double next = static_cast<double>(e.max_level + 1);
  e.saturated = c.points.back().eps >= e.q_hi * (1.0 - 1.0 / (next * next)) - 1e-12;
  return e;
}

double point_estimate(const CurveEstimate& e) {
  if (e.q_hi >= 1.0 - 1e-12) return 0.0;
  return 1.0 - 0.5 * (e.q_lo + e.q_hi);
}

}  // namespace

InversionResult invert_capacity_curves(const CapacityCurve& fwd, const CapacityCurve& bwd) {
  if (fwd.direction != Direction::forward || bwd.direction != Direction::backward)
    throw InversionError("curves must be given as (forward, backward)");
  const CurveEstimate ef = estimate(fwd);
  const CurveEstimate eb = estimate(bwd);
  double p1 = point_estimate(ef);
  double p2 = point_estimate(eb);
  if (p1 + p2 > 1.0) {
    const double min1 = 1.0 - ef.q_hi;
    const double min2 = 1.0 - eb.q_hi;
    if (min1 + min2 > 1.0 + 1e-12)
      throw InversionError(fmt::format("curves imply p1 + p2 >= {:.6g} > 1", min1 + min2));
    const double excess = p1 + p2 - 1.0;
    const double slack1 = p1 - min1;
    const double slack2 = p2 - min2;
    const double total = slack1 + slack2;
    if (total > 0.0) {
      p1 -= excess * slack1 / total;
      p2 -= excess * slack2 / total;
    }
  }
  InversionResult r;
  r.p = {p1, p2, std::max(0.0, 1.0 - p1 - p2)};
  for (std::size_t i = 0; i < 3; ++i) r.abs_alpha[i] = std::sqrt(std::max(0.0, r.p[i]));
  r.forward_q_interval = {ef.q_lo, ef.q_hi};
  r.backward_q_interval = {eb.q_lo, eb.q_hi};
  if (r.p[2] < 1.0 - 1e-12) {
    if (ef.saturated) r.forward_dim = ef.max_level;
    if (eb.saturated) r.backward_dim = eb.max_level;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Axioms

namespace {

void record(AxiomReport& rep, const std::string& axiom, Direction d, double eps, std::size_t op, double before,
            double after) {
  rep.violations.push_back({axiom, d, eps, op, before, after});
}

}  // namespace

AxiomReport axiom_suite(const ProcessMatrix& w, std::span<const LocalOperationPair> ops,
                        std::span<const double> eps) {
  for (double e : eps)
    if (!(e >= 0.0 && e < 0.75))
      throw DomainError(fmt::format("axiom checks need eps in [0, 3/4), got {}", e));
  constexpr std::size_t kSelf = std::numeric_limits<std::size_t>::max();
  const std::array<Direction, 2> dirs{Direction::forward, Direction::backward};

  AxiomReport rep;
  const CapacityMeasure base = CapacityMeasure::from_process(w, true);
  const auto signals = [](const ProcessMatrix& x, Direction d) {
    const auto [s, r] = directed_parties(x, d);
    return can_signal(x, s->name, r->name);
  };
  const std::array<bool, 2> base_signals{signals(w, Direction::forward), signals(w, Direction::backward)};

  for (Direction d : dirs) {
    const double cap_max = std::log2(static_cast<double>(base.wire_dim(d)));
    HarmonicSummary witness{{0.0, 0.0, 0.0}, base.wire_dim(Direction::forward), base.wire_dim(Direction::backward)};
    witness.p[dir_index(d)] = 1.0;
    if (std::abs(CapacityMeasure::from_summary(witness).capacity(d, 0.0) - cap_max) > 1e-12)
      rep.normalization_ok = false;
    for (double e : eps) {
      ++rep.checks;
      const double c = base.capacity(d, e);
      if (c < 0.0) record(rep, "non-negativity", d, e, kSelf, c, c);
      if (c > 0.0 && !base_signals[dir_index(d)]) record(rep, "positive only with signalling", d, e, kSelf, c, c);
      if (c > cap_max + 1e-12) rep.normalization_ok = false;
    }
  }

  for (std::size_t k = 0; k < ops.size(); ++k) {
    const ProcessMatrix step = apply_local_operation(w, w.parties()[0].name, ops[k].a);
    const ProcessMatrix after = apply_local_operation(step, w.parties()[1].name, ops[k].b);
    const CapacityMeasure m = CapacityMeasure::from_process(after, true);
    std::array<std::optional<bool>, 2> after_signals;
    for (Direction d : dirs)
      for (double e : eps) {
        ++rep.checks;
        const double before = base.capacity(d, e);
        const double c = m.capacity(d, e);
        if (c > before + 1e-12) record(rep, "monotonicity", d, e, k, before, c);
        if (c < 0.0) record(rep, "non-negativity", d, e, k, before, c);
        if (c > 0.0) {
          auto& s = after_signals[dir_index(d)];
          if (!s) s = signals(after, d);
          if (!*s) record(rep, "positive only with signalling", d, e, k, before, c);
        }
      }
  }
  return rep;
}

}  // namespace cfluct
