#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cfluct/capacity.hpp"
#include "cfluct/clean_models.hpp"
#include "cfluct/closeness.hpp"
#include "cfluct/errors.hpp"
#include "cfluct/model_file.hpp"
#include "cfluct/sectors.hpp"
#include "cfluct/tendency.hpp"
#include "cli.hpp"

namespace py = pybind11;
using namespace cfluct;

namespace {

Direction direction_of(const std::string& s) { return parse_direction(s); }

py::dict summary_dict(const HarmonicSummary& s) {
  py::dict d;
  d["p"] = s.p;
  d["forward_dim"] = s.forward_dim;
  d["backward_dim"] = s.backward_dim;
  return d;
}

CapacityCurve curve_of(Direction d, const std::vector<std::pair<double, double>>& pts) {
  CapacityCurve c{d, {}};
  for (const auto& [e, b] : pts) c.points.push_back({e, b});
  return c;
}

Matrix3c amplitudes_of(const Matrix& a) {
  if (a.rows() != 3 || a.cols() != 3) throw DimError("amplitude table must be 3x3");
  return a;
}

std::map<double, double> criterion_map(const py::dict& d) {
  std::map<double, double> m;
  for (const auto& [k, v] : d) m[k.cast<double>()] = v.cast<double>();
  return m;
}

py::dict closeness_dict(const ClosenessReport& r) {
  py::dict d;
  d["close"] = r.close;
  d["method_z"] = to_string(r.method_z);
  d["method_w"] = to_string(r.method_w);
  py::list entries;
  for (const auto& e : r.entries) {
    py::dict x;
    x["direction"] = to_string(e.direction);
    x["eps"] = e.eps;
    x["capacity_z"] = e.capacity_z;
    x["capacity_w"] = e.capacity_w;
    x["threshold"] = e.threshold;
    x["within"] = e.within;
    entries.append(x);
  }
  d["entries"] = entries;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Process matrices, capacity measures and causal-order fluctuation diagnostics.";

  auto base = py::register_exception<Error>(m, "Error");
#define CFLUCT_PY_ERROR(Name) py::register_exception<Name>(m, #Name, base.ptr())
  CFLUCT_PY_ERROR(DuplicateLabel);
  CFLUCT_PY_ERROR(UnknownLabel);
  CFLUCT_PY_ERROR(BadPermutation);
  CFLUCT_PY_ERROR(DimError);
  CFLUCT_PY_ERROR(PartyError);
  CFLUCT_PY_ERROR(NumericalError);
  CFLUCT_PY_ERROR(BranchRelationError);
  CFLUCT_PY_ERROR(ConstraintViolation);
  CFLUCT_PY_ERROR(SectorError);
  CFLUCT_PY_ERROR(NormError);
  CFLUCT_PY_ERROR(DomainError);
  CFLUCT_PY_ERROR(InversionError);
  CFLUCT_PY_ERROR(ModelClassError);
  CFLUCT_PY_ERROR(ParseError);
#undef CFLUCT_PY_ERROR

  py::class_<ProcessMatrix>(m, "Process")
      .def_property_readonly("matrix", [](const ProcessMatrix& w) { return w.op().matrix(); })
      .def_property_readonly("labels",
                             [](const ProcessMatrix& w) {
                               std::vector<std::pair<std::string, std::size_t>> out;
                               for (const auto& s : w.op().registry().labels()) out.emplace_back(s.name, s.dim);
                               return out;
                             })
      .def_property_readonly("parties",
                             [](const ProcessMatrix& w) {
                               std::vector<std::string> out;
                               for (const auto& p : w.parties()) out.push_back(p.name);
                               return out;
                             })
      .def("discard", &discard_party, py::arg("party"), "Trace out one party.");

  m.def(
      "harmonic_process",
      [](const std::array<cplx, 3>& alpha, std::size_t wire_dim, std::size_t e3_dim, std::optional<Vector> psi,
         bool purified) {
        const HarmonicCleanModel model(AmplitudeVector3(alpha[0], alpha[1], alpha[2]), wire_dim, e3_dim, psi);
        return purified ? build_harmonic_purified(model) : build_harmonic_reduced(model);
      },
      py::arg("alpha"), py::arg("wire_dim") = 2, py::arg("e3_dim") = 1, py::arg("psi") = std::nullopt,
      py::arg("purified") = false);
  m.def(
      "partial_swap_process",
      [](double p, const Matrix& rho, const std::vector<Matrix>& kraus, std::size_t wire_dim) {
        PartialSwapModel model;
        model.p = p;
        model.wire_dim = wire_dim;
        model.rho = rho;
        model.channel_n = kraus;
        return build_partial_swap(model);
      },
      py::arg("p"), py::arg("rho"), py::arg("kraus"), py::arg("wire_dim") = 2);
  m.def(
      "sectored_process",
      [](const SectoredAmplitudes& a, std::size_t dml, std::size_t dmv) {
        return build_sectored_harmonic_reduced(a, dml, dmv);
      },
      py::arg("amplitudes"), py::arg("massless_dim") = 2, py::arg("massive_dim") = 2);
  m.def(
      "load_model", [](const std::string& path) { return bipartite_process(load_model(path)); }, py::arg("path"),
      "Bipartite process described by a JSON model file.");

  m.def(
      "validate",
      [](const ProcessMatrix& w) {
        const ValidationReport r = validate_process(w);
        py::dict d;
        d["valid"] = r.valid();
        d["psd"] = r.psd;
        d["unit_trace"] = r.unit_trace;
        d["min_eigenvalue"] = r.min_eigenvalue;
        py::list sig;
        for (const auto& s : r.signalling) sig.append(py::make_tuple(s.from, s.to, s.signals));
        d["signalling"] = sig;
        return d;
      },
      py::arg("process"));
  m.def(
      "can_signal", [](const ProcessMatrix& w, const std::string& from, const std::string& to) {
        return can_signal(w, from, to);
      },
      py::arg("process"), py::arg("sender"), py::arg("receiver"));

  m.def(
      "q_ent_closed_form", [](double p, double eps, std::size_t d) { return q_ent_closed_form({p, eps, d}); },
      py::arg("p"), py::arg("eps"), py::arg("wire_dim"));
  m.def(
      "q_ent_dimension", [](double p, double eps, std::size_t d) { return q_ent_dimension({p, eps, d}); },
      py::arg("p"), py::arg("eps"), py::arg("wire_dim"));
  m.def("q_ent_zero_threshold", &q_ent_zero_threshold, py::arg("eps"));
  m.def("harmonic_probe_fidelity", &harmonic_probe_fidelity, py::arg("p"), py::arg("m"));
  m.def(
      "fidelity_oracle",
      [](const ProcessMatrix& w, const std::string& dir, std::size_t mdim) {
        return fidelity_oracle(w, direction_of(dir), mdim);
      },
      py::arg("process"), py::arg("direction"), py::arg("m"));
  m.def(
      "fit_harmonic",
      [](const ProcessMatrix& w) -> py::object {
        const auto s = fit_harmonic(w);
        if (!s) return py::none();
        return summary_dict(*s);
      },
      py::arg("process"));

  py::class_<CapacityMeasure>(m, "CapacityMeasure")
      .def_static(
          "from_summary",
          [](const std::array<double, 3>& p, std::size_t fdim, std::size_t bdim) {
            return CapacityMeasure::from_summary({p, fdim, bdim});
          },
          py::arg("p"), py::arg("forward_dim") = 2, py::arg("backward_dim") = 2)
      .def_static("from_process", &CapacityMeasure::from_process, py::arg("process"),
                  py::arg("allow_staircase") = false)
      .def_static("staircase", &CapacityMeasure::staircase, py::arg("process"))
      .def_property_readonly("method", [](const CapacityMeasure& c) { return to_string(c.method()); })
      .def(
          "capacity", [](const CapacityMeasure& c, const std::string& dir, double eps) {
            return c.capacity(direction_of(dir), eps);
          },
          py::arg("direction"), py::arg("eps"))
      .def(
          "curve",
          [](const CapacityMeasure& c, const std::string& dir, const std::vector<double>& eps) {
            std::vector<std::pair<double, double>> out;
            for (const auto& pt : generate_curve(c, direction_of(dir), eps).points) out.emplace_back(pt.eps, pt.bits);
            return out;
          },
          py::arg("direction"), py::arg("eps"));

  m.def(
      "eps_grid", [](double a, double b, double s) { return eps_grid(a, b, s); }, py::arg("start"), py::arg("stop"),
      py::arg("step"));
  m.def(
      "invert_capacity_curves",
      [](const std::vector<std::pair<double, double>>& fwd, const std::vector<std::pair<double, double>>& bwd) {
        const InversionResult r =
            invert_capacity_curves(curve_of(Direction::forward, fwd), curve_of(Direction::backward, bwd));
        py::dict d;
        d["p"] = r.p;
        d["abs_alpha"] = r.abs_alpha;
        d["forward_dim"] = r.forward_dim;
        d["backward_dim"] = r.backward_dim;
        return d;
      },
      py::arg("forward"), py::arg("backward"));

  py::class_<SectoredAmplitudes>(m, "SectoredAmplitudes")
      .def(py::init([](const Matrix& a) { return SectoredAmplitudes(amplitudes_of(a)); }), py::arg("amplitudes"))
      .def_static(
          "from_probabilities", [](const Matrix3d& p) { return SectoredAmplitudes::from_probabilities(p); },
          py::arg("probabilities"))
      .def_static("typical_example", [] { return SectoredAmplitudes::from_exact(typical_example_table()); })
      .def_static("atypical_example", [] { return SectoredAmplitudes::from_exact(atypical_example_table()); })
      .def_property_readonly("amplitudes", [](const SectoredAmplitudes& a) { return Matrix(a.amplitudes()); })
      .def_property_readonly("probabilities", [](const SectoredAmplitudes& a) { return a.probabilities(); });

  m.def("marginal_probabilities", &marginal_probabilities, py::arg("amplitudes"),
        "(massless row sums, massive column sums)");
  m.def(
      "p_connect", [](const Probabilities3& p) { return p_connect(p); }, py::arg("massless"));
  m.def(
      "classify",
      [](const SectoredAmplitudes& a, const std::string& cond, double theta, double kappa) {
        const TypicalityVerdict v = classify(a, parse_condition(cond), {theta, kappa});
        py::dict d;
        d["typical"] = v.typical;
        d["large"] = v.large;
        d["rhs"] = v.rhs;
        d["p_connect"] = v.p_connect;
        d["massless"] = v.massless;
        d["massive"] = v.massive;
        d["detail"] = v.detail();
        return d;
      },
      py::arg("amplitudes"), py::arg("condition") = "V", py::arg("theta") = 0.9, py::arg("kappa") = 2.0);
  m.def(
      "leakage_report",
      [](const SectoredAmplitudes& a, std::size_t dml, std::size_t dmv, const std::vector<double>& eps) {
        const LeakageReport r = leakage_report(a, dml, dmv, eps);
        py::dict d;
        d["superluminal"] = r.superluminal;
        d["superluminal_forward"] = r.superluminal_forward;
        d["superluminal_backward"] = r.superluminal_backward;
        d["sectors"] = py::make_tuple(summary_dict(r.sectors[0]), summary_dict(r.sectors[1]));
        return d;
      },
      py::arg("amplitudes"), py::arg("massless_dim") = 2, py::arg("massive_dim") = 2,
      py::arg("eps") = std::vector<double>{0.01});

  m.def(
      "are_close",
      [](const CapacityMeasure& z, const CapacityMeasure& w, const py::dict& fwd, const py::dict& bwd) {
        return closeness_dict(are_close(z, w, {criterion_map(fwd), criterion_map(bwd)}));
      },
      py::arg("z"), py::arg("w"), py::arg("forward"), py::arg("backward"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit code, stdout, stderr).");
}
