#include "cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cfluct/capacity.hpp"
#include "cfluct/closeness.hpp"
#include "cfluct/errors.hpp"
#include "cfluct/model_file.hpp"
#include "cfluct/sectors.hpp"
#include "cfluct/tendency.hpp"
#include "json.hpp"

namespace cfluct::cli {

namespace {

std::string num(double x) { return fmt::format("{:.12g}", x); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string triple(const std::array<double, 3>& p) { return fmt::format("{} {} {}", num(p[0]), num(p[1]), num(p[2])); }

Sector parse_sector(const std::string& s) {
  if (s == "massless") return Sector::massless;
  if (s == "massive") return Sector::massive;
  throw ParseError(fmt::format("unknown sector '{}' (expected massless or massive)", s));
}

// Capacity measure of a model file, restricted to a sector for sectored files.
CapacityMeasure measure_of(const ModelFile& m, const std::string& sector, bool oracle) {
  if (m.kind == ModelKind::sectored) {
    if (sector.empty()) throw ParseError("sectored models need --sector massless|massive");
    const Sector s = parse_sector(sector);
    const auto& spec = *m.sectored;
    if (oracle) return CapacityMeasure::staircase(reduce_sector(bipartite_process(m), s));
    const auto [ml, mv] = marginal_probabilities(spec.amps);
    const std::size_t d = s == Sector::massless ? spec.massless_dim : spec.massive_dim;
    return CapacityMeasure::from_summary({s == Sector::massless ? ml : mv, d, d});
  }
  if (!sector.empty()) throw ParseError("--sector only applies to sectored models");
  if (m.kind == ModelKind::harmonic) {
    const auto& h = *m.harmonic;
    if (oracle) return CapacityMeasure::staircase(bipartite_process(m));
    return CapacityMeasure::from_summary({h.alpha.probabilities(), h.wire_dim, h.wire_dim});
  }
  const ProcessMatrix w = bipartite_process(m);
  if (oracle) return CapacityMeasure::staircase(w);
  try {
    return CapacityMeasure::from_process(w, false);
  } catch (const ModelClassError&) {
    throw ModelClassError(
        "process is not of harmonic form, so the closed form does not apply; rerun with --oracle to use the "
        "probe-fidelity staircase");
  }
}

int cmd_validate(const std::string& file, std::ostream& out) {
  const ModelFile m = load_model(file);
  const ProcessMatrix w = bipartite_process(m);
  const ValidationReport r = validate_process(w);
  out << "model: " << to_string(m.kind) << "\n";
  out << "dimension: " << w.op().dim() << "\n";
  out << "psd: " << flag(r.psd) << "\n";
  out << "min_eigenvalue: " << num(r.min_eigenvalue) << "\n";
  out << "hermiticity_residue: " << num(r.hermiticity_residue) << "\n";
  out << "unit_trace: " << flag(r.unit_trace) << " (" << num(r.trace_real) << " + " << num(r.trace_imag) << "i)\n";
  for (const auto& s : r.signalling)
    out << fmt::format("signalling {}->{}: {} (max deviation {})\n", s.from, s.to, flag(s.signals),
                       num(s.max_deviation));
  out << "signalling_family: " << r.signalling_family << "\n";
  out << "valid: " << flag(r.valid()) << "\n";
  return r.valid() ? kOk : kModelFailure;
}

int cmd_capacity(const std::string& file, const std::string& direction, const std::string& grid,
                 const std::string& out_path, bool oracle, const std::string& sector, std::ostream& out) {
  std::vector<Direction> dirs;
  if (direction == "both")
    dirs = {Direction::forward, Direction::backward};
  else
    dirs = {parse_direction(direction)};
  const std::vector<double> eps = parse_eps_grid(grid);
  const ModelFile m = load_model(file);
  const CapacityMeasure measure = measure_of(m, sector, oracle);
  std::vector<CapacityCurve> curves;
  for (Direction d : dirs) curves.push_back(generate_curve(measure, d, eps));
  if (out_path.empty()) {
    write_curves_csv(out, curves);
  } else {
    std::ofstream f(out_path);
    if (!f) throw ParseError(fmt::format("cannot write '{}'", out_path));
    write_curves_csv(f, curves);
    out << "method: " << to_string(measure.method()) << "\n";
    out << "rows: " << curves.size() * eps.size() << "\n";
    out << "written: " << out_path << "\n";
  }
  return kOk;
}

int cmd_typicality(const std::string& file, const std::string& condition, double theta, double kappa,
                   std::ostream& out) {
  const Condition cond = parse_condition(condition);
  const ModelFile m = load_model(file);
  if (m.kind != ModelKind::sectored) throw SectorError("typicality needs a sectored model");
  const TypicalityVerdict v = classify(m.sectored->amps, cond, {theta, kappa});
  out << "condition: " << to_string(v.condition) << "\n";
  out << "theta_connect: " << num(v.thresholds.theta_connect) << "\n";
  out << "kappa_comparable: " << num(v.thresholds.kappa_comparable) << "\n";
  out << "note: theta and kappa are free parameters, not derived quantities\n";
  out << "massless_marginal: " << triple(v.massless) << "\n";
  out << "massive_marginal: " << triple(v.massive) << "\n";
  out << "p_connect: " << num(v.p_connect) << "\n";
  out << "large: " << flag(v.large) << "\n";
  out << "massless_comparable: " << flag(v.massless_comparable) << "\n";
  out << "massive_comparable: " << flag(v.massive_comparable) << "\n";
  out << "rhs: " << flag(v.rhs) << "\n";
  out << "detail: " << v.detail() << "\n";
  out << "typical: " << flag(v.typical) << "\n";
  return kOk;
}

ClosenessCriterion load_criterion(const std::string& path) {
  if (path.empty()) return ClosenessCriterion::default_criterion();
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("criterion: invalid JSON at byte {}", e.byte));
  }
  ClosenessCriterion c;
  for (const char* key : {"forward", "backward"}) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_array())
      throw ParseError(fmt::format("criterion: '{}' must be a list of [eps, threshold]", key));
    auto& target = std::string(key) == "forward" ? c.forward : c.backward;
    for (const auto& row : j[key]) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
        throw ParseError(fmt::format("criterion: '{}' entries must be [eps, threshold]", key));
      target[row[0].get<double>()] = row[1].get<double>();
    }
  }
  try {
    c.check();
  } catch (const DomainError& e) {
    throw ParseError(fmt::format("criterion: {}", e.what()));
  }
  return c;
}

int cmd_compare(const std::string& file_z, const std::string& file_w, const std::string& criterion,
                const std::string& sector, std::ostream& out) {
  const ClosenessCriterion c = load_criterion(criterion);
  const ModelFile mz = load_model(file_z);
  const ModelFile mw = load_model(file_w);
  const auto sector_for = [&](const ModelFile& m) { return m.kind == ModelKind::sectored ? sector : std::string(); };
  // General models fall back to the probe staircase, as the closeness
  // criterion prescribes.
  const auto measure = [&](const ModelFile& m) {
    try {
      return measure_of(m, sector_for(m), false);
    } catch (const ModelClassError&) {
      return CapacityMeasure::staircase(bipartite_process(m));
    }
  };
  const CapacityMeasure z = measure(mz);
  const CapacityMeasure w = measure(mw);
  ClosenessReport r;
  try {
    r = are_close(z, w, c);
  } catch (const DimError&) {
    out << "close: false\n";
    out << "note: wire dimensions differ; capacities of unequal systems need a normalization that is not "
           "implemented\n";
    throw;
  }
  out << "method_z: " << to_string(r.method_z) << "\n";
  out << "method_w: " << to_string(r.method_w) << "\n";
  for (const auto& e : r.entries)
    out << fmt::format("{} eps={} z={} w={} diff={} threshold={} within={}\n", to_string(e.direction), num(e.eps),
                       num(e.capacity_z), num(e.capacity_w), num(std::abs(e.capacity_z - e.capacity_w)),
                       num(e.threshold), flag(e.within));
  out << "close: " << flag(r.close) << "\n";
  return r.close ? kOk : kModelFailure;
}

CapacityCurve curve_from(const std::string& path, Direction d) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
  for (auto& c : read_curves_csv(in))
    if (c.direction == d) return c;
  throw InversionError(fmt::format("'{}' has no {} rows", path, to_string(d)));
}

int cmd_invert(const std::string& fwd, const std::string& bwd, std::ostream& out) {
  const InversionResult r =
      invert_capacity_curves(curve_from(fwd, Direction::forward), curve_from(bwd, Direction::backward));
  out << "p: " << triple(r.p) << "\n";
  out << "abs_alpha: " << triple(r.abs_alpha) << "\n";
  if (!r.forward_dim && !r.backward_dim) {
    out << "dims: undetermined\n";
  } else {
    out << "forward_dim: " << (r.forward_dim ? std::to_string(*r.forward_dim) : "undetermined") << "\n";
    out << "backward_dim: " << (r.backward_dim ? std::to_string(*r.backward_dim) : "undetermined") << "\n";
  }
  return kOk;
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("'{}' is not a number", item));
    }
  }
  if (out.empty()) throw ParseError("--eps needs at least one value");
  return out;
}

int cmd_leakage(const std::string& file, const std::string& eps_text, std::ostream& out) {
  const std::vector<double> eps = parse_eps_list(eps_text);
  const ModelFile m = load_model(file);
  if (m.kind != ModelKind::sectored) throw SectorError("leakage needs a sectored model");
  const auto& s = *m.sectored;
  const LeakageReport r = leakage_report(s.amps, s.massless_dim, s.massive_dim, eps);
  for (std::size_t k = 0; k < 2; ++k)
    out << fmt::format("{}: p = {} wire_dim = {}\n", k == 0 ? "massless" : "massive", triple(r.sectors[k].p),
                       r.sectors[k].forward_dim);
  out << "eps_tested:";
  for (double e : r.eps_tested) out << " " << num(e);
  out << "\n";
  for (const auto& e : r.entries)
    out << fmt::format("{} {} eps={} bits={}\n", to_string(e.direction), to_string(e.sector), num(e.eps),
                       num(e.bits));
  out << "superluminal_forward: " << flag(r.superluminal_forward) << "\n";
  out << "superluminal_backward: " << flag(r.superluminal_backward) << "\n";
  out << "superluminal: " << flag(r.superluminal) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal-fluctuation toolkit: process matrices, capacities and typicality", "cfluct"};
  app.require_subcommand(1);

  std::string file, file_b, direction = "both", grid = "0:0.75:0.05", out_path, sector, condition = "V",
                            criterion, eps_text = "0.01";
  bool oracle = false;
  double theta = 0.9, kappa = 2.0;

  auto* validate = app.add_subcommand("validate", "check positivity, normalization and signalling");
  validate->add_option("file", file, "model file")->required();

  auto* capacity = app.add_subcommand("capacity", "capacity curves as CSV");
  capacity->add_option("file", file, "model file")->required();
  capacity->add_option("--direction", direction, "forward, backward or both");
  capacity->add_option("--eps-grid", grid, "start:stop:step");
  capacity->add_option("--out", out_path, "write the CSV here instead of stdout");
  capacity->add_flag("--oracle", oracle, "use the probe-fidelity staircase");
  capacity->add_option("--sector", sector, "massless or massive (sectored models)");

  auto* typicality = app.add_subcommand("typicality", "classify a sectored model");
  typicality->add_option("file", file, "model file")->required();
  typicality->add_option("--condition", condition, "V, VS, S or VorS");
  typicality->add_option("--theta", theta, "threshold for large p_connect");
  typicality->add_option("--kappa", kappa, "max/min ratio for comparable probabilities");

  auto* compare = app.add_subcommand("compare", "capacity-based closeness of two models");
  compare->add_option("file_a", file, "first model")->required();
  compare->add_option("file_b", file_b, "second model")->required();
  compare->add_option("--criterion", criterion, "JSON with forward/backward [eps, threshold] lists");
  compare->add_option("--sector", sector, "massless or massive (sectored models)");

  auto* invert = app.add_subcommand("invert", "recover |alpha| and dimensions from capacity curves");
  invert->add_option("forward_csv", file, "CSV with forward rows")->required();
  invert->add_option("backward_csv", file_b, "CSV with backward rows")->required();

  auto* leakage = app.add_subcommand("leakage", "massive signalling not matched by light");
  leakage->add_option("file", file, "model file")->required();
  leakage->add_option("--eps", eps_text, "comma-separated eps values in [0, 0.75)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (validate->parsed()) return cmd_validate(file, out);
    if (capacity->parsed()) return cmd_capacity(file, direction, grid, out_path, oracle, sector, out);
    if (typicality->parsed()) return cmd_typicality(file, condition, theta, kappa, out);
    if (compare->parsed()) return cmd_compare(file, file_b, criterion, sector, out);
    if (invert->parsed()) return cmd_invert(file, file_b, out);
    if (leakage->parsed()) return cmd_leakage(file, eps_text, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kModelFailure;
  }
  return kUsageError;
}

}  // namespace cfluct::cli
