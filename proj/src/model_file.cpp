#include "cfluct/model_file.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cfluct/errors.hpp"
#include "json.hpp"

namespace cfluct {

using nlohmann::json;

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::harmonic: return "harmonic";
    case ModelKind::clean_general: return "clean_general";
    case ModelKind::partial_swap: return "partial_swap";
    case ModelKind::sectored: return "sectored";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(fmt::format("{}: {}", path, what));
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, fmt::format("missing key '{}'", key));
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t dimension(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() || j.get<std::size_t>() == 0) fail(path, "expected a positive integer");
  return j.get<std::size_t>();
}

cplx complex_number(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail(path, "expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vector complex_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of [re, im]");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_number(j[i], fmt::format("{}[{}]", path, i));
  return v;
}

Matrix complex_matrix(const json& j, std::size_t dim, const std::string& path) {
  if (!j.is_array() || j.size() != dim) fail(path, fmt::format("expected {} rows", dim));
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix m(d, d);
  for (std::size_t r = 0; r < dim; ++r) {
    const std::string rp = fmt::format("{}[{}]", path, r);
    if (!j[r].is_array() || j[r].size() != dim) fail(rp, fmt::format("expected {} entries", dim));
    for (std::size_t c = 0; c < dim; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_number(j[r][c], fmt::format("{}[{}]", rp, c));
  }
  return m;
}

std::vector<Subsystem> subsystems(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of [name, dim]");
  std::vector<Subsystem> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ip = fmt::format("{}[{}]", path, i);
    if (!j[i].is_array() || j[i].size() != 2 || !j[i][0].is_string()) fail(ip, "expected [name, dim]");
    out.push_back({j[i][0].get<std::string>(), dimension(j[i][1], ip + "[1]")});
  }
  return out;
}

std::optional<Vector> optional_vector(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return complex_vector(*it, key);
}

HarmonicCleanModel parse_harmonic(const json& j) {
  const json& a = need(j, "alpha", "$");
  if (!a.is_array() || a.size() != 3) fail("alpha", "expected three complex amplitudes");
  const AmplitudeVector3 alpha(complex_number(a[0], "alpha[0]"), complex_number(a[1], "alpha[1]"),
                               complex_number(a[2], "alpha[2]"));
  const std::size_t d = dimension(need(j, "wire_dim", "$"), "wire_dim");
  const std::size_t e3 = j.contains("e3_dim") ? dimension(j["e3_dim"], "e3_dim") : 1;
  return HarmonicCleanModel(alpha, d, e3, optional_vector(j, "psi"));
}

double probability_cell(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer() || !j[1].is_number_integer() ||
      !j[2].is_number_integer())
    fail(path, "expected a number or an exact [k, n, m]");
  return ExactProbability{j[0].get<long>(), j[1].get<long>(), j[2].get<long>()}.value();
}

SectoredModelSpec parse_sectored(const json& j) {
  const std::size_t dml = dimension(need(j, "massless_dim", "$"), "massless_dim");
  const std::size_t dmv = dimension(need(j, "massive_dim", "$"), "massive_dim");
  const bool has_p = j.contains("probabilities");
  const bool has_a = j.contains("amplitudes");
  if (has_p == has_a) fail("$", "give exactly one of 'probabilities' and 'amplitudes'");
  const std::string key = has_p ? "probabilities" : "amplitudes";
  const json& t = j[key];
  if (!t.is_array() || t.size() != 3) fail(key, "expected 3 rows");
  Matrix3d p;
  Matrix3c a;
  for (std::size_t r = 0; r < 3; ++r) {
    const std::string rp = fmt::format("{}[{}]", key, r);
    if (!t[r].is_array() || t[r].size() != 3) fail(rp, "expected 3 entries");
    for (std::size_t c = 0; c < 3; ++c) {
      const std::string cp = fmt::format("{}[{}]", rp, c);
      const auto ri = static_cast<Eigen::Index>(r);
      const auto ci = static_cast<Eigen::Index>(c);
      if (has_p)
        p(ri, ci) = probability_cell(t[r][c], cp);
      else
        a(ri, ci) = complex_number(t[r][c], cp);
    }
  }
  SectoredAmplitudes amps = has_p ? SectoredAmplitudes::from_probabilities(p) : SectoredAmplitudes(a);
  return {amps, dml, dmv, optional_vector(j, "psi_massless"), optional_vector(j, "psi_massive")};
}

PartialSwapModel parse_partial_swap(const json& j) {
  PartialSwapModel m;
  m.p = number(need(j, "p", "$"), "p");
  m.wire_dim = dimension(need(j, "wire_dim", "$"), "wire_dim");
  const std::size_t d = m.wire_dim;
  const auto dd = static_cast<Eigen::Index>(d * d);
  const json& rho = need(j, "rho", "$");
  if (rho.is_string()) {
    const auto name = rho.get<std::string>();
    if (name == "maximally_mixed") {
      m.rho = Matrix::Identity(dd, dd) / static_cast<double>(d * d);
    } else if (name == "maximally_entangled") {
      m.rho = LabeledVector::max_entangled(Registry{{"x", d}}, Registry{{"y", d}}).projector().matrix();
    } else {
      fail("rho", fmt::format("unknown state '{}'", name));
    }
  } else {
    m.rho = complex_matrix(rho, d * d, "rho");
  }
  const json& ch = need(j, "channel", "$");
  const json& from = need(ch, "from", "channel");
  const json& to = need(ch, "to", "channel");
  if (!from.is_string() || from.get<std::string>() != "a2" || !to.is_string() || to.get<std::string>() != "a2'")
    fail("channel", "the channel must be wired explicitly from \"a2\" to \"a2'\"");
  if (ch.contains("kraus")) {
    const json& ks = ch["kraus"];
    if (!ks.is_array() || ks.empty()) fail("channel.kraus", "expected a non-empty list of matrices");
    for (std::size_t k = 0; k < ks.size(); ++k)
      m.channel_n.push_back(complex_matrix(ks[k], d, fmt::format("channel.kraus[{}]", k)));
  } else {
    m.channel_n.push_back(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  }
  m.check();
  return m;
}

CleanGeneralSpec parse_clean_general(const json& j) {
  const json& parties = need(j, "parties", "$");
  std::vector<PartySpec> ps;
  std::vector<Subsystem> order;
  for (const char* name : {"A", "B"}) {
    const std::string path = fmt::format("parties.{}", name);
    const json& pj = need(parties, name, "parties");
    PartySpec p{name, subsystems(need(pj, "inputs", path), path + ".inputs"),
                subsystems(need(pj, "outputs", path), path + ".outputs"), {}, {}};
    p.check();
    for (const auto& s : p.inputs) order.push_back(s);
    for (const auto& s : p.outputs) order.push_back(s);
    ps.push_back(std::move(p));
  }
  if (j.contains("environment"))
    for (const auto& s : subsystems(j["environment"], "environment")) order.push_back(s);
  const Registry reg(order);

  const Vector amps = complex_vector(need(j, "amplitudes", "$"), "amplitudes");
  const json& bj = need(j, "branches", "$");
  if (!bj.is_array() || bj.size() != static_cast<std::size_t>(amps.size()))
    fail("branches", "expected one branch per amplitude");
  CleanGeneralSpec spec{{ps[0], ps[1]}, {}, {}};
  for (Eigen::Index i = 0; i < amps.size(); ++i) spec.amplitudes.push_back(amps(i));
  for (std::size_t i = 0; i < bj.size(); ++i) {
    const std::string path = fmt::format("branches[{}]", i);
    const json& rel = need(bj[i], "relation", path);
    if (!rel.is_string()) fail(path + ".relation", "expected a string");
    CausalRelation r;
    try {
      r = parse_relation(rel.get<std::string>());
    } catch (const Error& e) {
      fail(path + ".relation", e.what());
    }
    const Vector v = complex_vector(need(bj[i], "vector", path), path + ".vector");
    if (static_cast<std::size_t>(v.size()) != reg.total_dim())
      fail(path + ".vector", fmt::format("expected {} entries", reg.total_dim()));
    spec.branches.push_back({LabeledVector(reg, v), r});
  }
  return spec;
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("invalid JSON at byte {}: {}", e.byte, e.what()));
  }
  if (!j.is_object()) fail("$", "expected an object");
  const json& version = need(j, "schema_version", "$");
  if (!version.is_string() || version.get<std::string>() != "1") fail("schema_version", "expected \"1\"");
  const json& kind = need(j, "kind", "$");
  if (!kind.is_string()) fail("kind", "expected a string");
  const auto k = kind.get<std::string>();

  ModelFile m;
  if (k == "harmonic") {
    m.kind = ModelKind::harmonic;
    m.harmonic = parse_harmonic(j);
  } else if (k == "sectored") {
    m.kind = ModelKind::sectored;
    m.sectored = parse_sectored(j);
  } else if (k == "partial_swap") {
    m.kind = ModelKind::partial_swap;
    m.partial_swap = parse_partial_swap(j);
  } else if (k == "clean_general") {
    m.kind = ModelKind::clean_general;
    m.clean_general = parse_clean_general(j);
  } else {
    fail("kind", fmt::format("unknown kind '{}'", k));
  }
  return m;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

ProcessMatrix bipartite_process(const ModelFile& m) {
  switch (m.kind) {
    case ModelKind::harmonic:
      return build_harmonic_reduced(*m.harmonic);
    case ModelKind::sectored: {
      const auto& s = *m.sectored;
      return build_sectored_harmonic_reduced(s.amps, s.massless_dim, s.massive_dim, s.psi_massless, s.psi_massive);
    }
    case ModelKind::partial_swap:
      return build_partial_swap(*m.partial_swap);
    case ModelKind::clean_general: {
      const auto& g = *m.clean_general;
      return discard_party(build_clean_general(g.amplitudes, g.branches, g.parties), "G");
    }
  }
  throw ParseError("unknown model kind");
}

}  // namespace cfluct
