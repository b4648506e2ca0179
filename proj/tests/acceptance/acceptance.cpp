// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cfluct/capacity.hpp"
#include "cfluct/clean_models.hpp"
#include "cfluct/random.hpp"
#include "cfluct/sectors.hpp"
#include "cfluct/tendency.hpp"

using namespace cfluct;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> body;
};

// Every outcome combination of per-party instruments, summed.
double total_probability(const ProcessMatrix& w, const std::vector<ChoiInstrument>& inst) {
  std::vector<std::size_t> outcome(inst.size(), 0);
  double total = 0.0;
  while (true) {
    total += born_probability(w, inst, outcome);
    std::size_t k = 0;
    while (k < inst.size() && ++outcome[k] == inst[k].elements.size()) outcome[k++] = 0;
    if (k == inst.size()) break;
  }
  return total;
}

// Two outcomes, each a group of Kraus operators of one random channel. The
// channel has enough Kraus operators to be complete even without outputs.
ChoiInstrument random_instrument(const PartySpec& p, Rng& rng) {
  const std::size_t count = std::max<std::size_t>(2, (p.input_dim() + p.output_dim() - 1) / p.output_dim());
  const auto kraus = random_channel(p.input_dim(), p.output_dim(), count, rng);
  std::array<std::vector<Matrix>, 2> groups;
  for (std::size_t k = 0; k < kraus.size(); ++k) groups[k % 2].push_back(kraus[k]);
  ChoiInstrument inst{p, {}};
  for (const auto& g : groups) inst.elements.push_back(choi_of_kraus(p, g));
  return inst;
}

Outcome born_sanity() {
  Rng rng(101);
  double worst_eig = 0.0;
  for (std::size_t d : {2u, 3u, 4u}) {
    const Matrix rho = random_density_matrix(d, d, rng);
    const PartySpec a{"A", {{"a1", d}}, {}, {}, {}};
    const ProcessMatrix w({a}, LabeledOperator(Registry{{"a1", d}}, rho));
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    ChoiInstrument inst{a, {}};
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) {
      const Vector v = es.eigenvectors().col(k);
      inst.elements.push_back(choi_measure_prepare(a, v * v.adjoint(), Matrix::Ones(1, 1)));
    }
    const std::vector<ChoiInstrument> one{inst};
    for (std::size_t k = 0; k < d; ++k) {
      const std::vector<std::size_t> o{k};
      worst_eig = std::max(worst_eig, std::abs(born_probability(w, one, o) - es.eigenvalues()(static_cast<Eigen::Index>(k))));
    }
  }

  // One output of every builder.
  const HarmonicCleanModel h(random_amplitudes(rng), 2, 2, random_unit_vector(8, rng));
  PartialSwapModel ps;
  ps.p = 0.3;
  ps.rho = random_density_matrix(4, 4, rng);
  ps.channel_n = random_channel(2, 2, 2, rng);
  const auto amps = random_sectored_amplitudes(rng);
  const LabeledVector psi = h.psi_vector();
  const std::vector<CleanBranch> branches{CleanBranch{harmonic_branch_vector(1, psi, 2), CausalRelation::a_before_b},
                                          CleanBranch{harmonic_branch_vector(2, psi, 2), CausalRelation::b_before_a}};
  const std::vector<cplx> general_amps{std::sqrt(0.3), cplx(0, std::sqrt(0.7))};
  const std::vector<std::pair<std::string, ProcessMatrix>> outputs{
      {"harmonic_reduced", build_harmonic_reduced(h)},
      {"harmonic_purified", build_harmonic_purified(h)},
      {"w_1", build_w_i(1, psi, 2)},
      {"partial_swap", build_partial_swap(ps)},
      {"clean_general", build_clean_general(general_amps, branches, harmonic_parties(2))},
      {"sectored_reduced", build_sectored_harmonic_reduced(amps, 2, 2)},
      {"sectored_purified", build_sectored_noninteracting(amps, harmonic_sector_branches(2, 2), sectored_parties(2, 2))},
  };
  double worst_total = 0.0;
  for (const auto& [name, w] : outputs) {
    std::vector<ChoiInstrument> inst;
    for (const auto& p : w.parties()) inst.push_back(random_instrument(p, rng));
    worst_total = std::max(worst_total, std::abs(total_probability(w, inst) - 1.0));
  }
  return {worst_eig <= 1e-9 && worst_total <= 1e-8,
          fmt::format("eigenvalue error {:.2e}, completeness error {:.2e} over {} builders", worst_eig, worst_total,
                      outputs.size())};
}

Outcome harmonic_reduction() {
  Rng rng(202);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const HarmonicCleanModel m(random_amplitudes(rng), 2, 2, random_unit_vector(8, rng));
    worst = std::max(worst, max_abs_diff(discard_party(build_harmonic_purified(m), "G").op(),
                                         build_harmonic_reduced(m).op()));
  }
  return {worst <= 1e-10, fmt::format("max-abs difference {:.2e} over 10 models", worst)};
}

Outcome signalling_structure() {
  Rng rng(303);
  int wrong = 0;
  for (std::size_t d : {2u, 3u}) {
    const LabeledVector psi =
        HarmonicCleanModel(AmplitudeVector3(1, 0, 0), d, 1, random_unit_vector(d * d, rng)).psi_vector();
    const std::array<std::pair<bool, bool>, 3> expected{{{true, false}, {false, true}, {false, false}}};
    for (int i = 1; i <= 3; ++i) {
      const ProcessMatrix w = build_w_i(i, psi, d);
      if (can_signal(w, "A", "B") != expected[i - 1].first) ++wrong;
      if (can_signal(w, "B", "A") != expected[i - 1].second) ++wrong;
    }
  }
  return {wrong == 0, fmt::format("{} wrong verdicts out of 12", wrong)};
}

std::vector<double> grid_p() {
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(i / 10.0);
  return v;
}

Outcome oracle_equivalence() {
  const auto eps = eps_grid(0.0, 0.75, 0.05);
  std::size_t mismatches = 0;
  std::size_t cells = 0;
  double worst_fid = 0.0;
  for (std::size_t d : {2u, 3u, 4u})
    for (double p : grid_p()) {
      const ProcessMatrix w =
          build_harmonic_reduced(HarmonicCleanModel(AmplitudeVector3::from_probabilities(p, 0.0, 1.0 - p), d));
      // The probe fidelity does not depend on eps; compute each m once.
      std::vector<double> fid(d + 1, 0.0);
      for (std::size_t m = 1; m <= d; ++m) {
        fid[m] = fidelity_oracle(w, Direction::forward, m);
        worst_fid = std::max(worst_fid, std::abs(fid[m] - harmonic_probe_fidelity(p, m)));
      }
      for (double e : eps) {
        std::size_t best = 1;
        for (std::size_t m = 1; m <= d; ++m)
          if (fid[m] >= 1.0 - e - kFidelitySlack) best = m;
        ++cells;
        if (q_ent_closed_form({p, e, d}) != std::log2(static_cast<double>(best))) ++mismatches;
      }
    }
  return {mismatches == 0 && worst_fid <= 1e-9,
          fmt::format("{} mismatches over {} grid cells, fidelity error {:.2e}", mismatches, cells, worst_fid)};
}

Outcome zero_threshold() {
  const auto eps = eps_grid(0.0, 0.75, 0.05);
  std::size_t mismatches = 0;
  std::size_t cells = 0;
  for (std::size_t d : {2u, 3u, 4u})
    for (double p : grid_p())
      for (double e : eps) {
        ++cells;
        // p equal to the threshold up to rounding counts as not below it.
        const bool below = p < q_ent_zero_threshold(e) - 1e-12;
        if ((q_ent_closed_form({p, e, d}) == 0.0) != below) ++mismatches;
      }
  return {mismatches == 0, fmt::format("{} mismatches over {} grid cells", mismatches, cells)};
}

Outcome inversion_round_trip() {
  Rng rng(606);
  // The grid runs to eps = 1 so that the top step (and so d) is visible even
  // for small p.
  const auto eps = eps_grid(0.0, 1.0, 1e-3);
  const double tol = 2 * 1e-3;
  int done = 0;
  int failed = 0;
  double worst = 0.0;
  while (done < 50) {
    const auto a = random_amplitudes(rng);
    if (std::abs(a.probability(2) - 1.0) < 1e-12) continue;
    ++done;
    const std::array<double, 3> p{a.probability(0), a.probability(1), a.probability(2)};
    const CapacityMeasure m = CapacityMeasure::from_summary({p, 4, 4});
    const InversionResult r = invert_capacity_curves(generate_curve(m, Direction::forward, eps),
                                                     generate_curve(m, Direction::backward, eps));
    bool ok = r.forward_dim == std::optional<std::size_t>(4) && r.backward_dim == std::optional<std::size_t>(4);
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(r.p[i] - p[i]));
      ok = ok && std::abs(r.p[i] - p[i]) <= tol;
    }
    if (!ok) ++failed;
  }
  return {failed == 0, fmt::format("{} of 50 failed, worst p error {:.2e}", failed, worst)};
}

Outcome example_matrices() {
  const auto typical = SectoredAmplitudes::from_exact(typical_example_table());
  const auto atypical = SectoredAmplitudes::from_exact(atypical_example_table());
  const bool v_typ = classify(typical, Condition::V).typical;
  const bool v_atyp = classify(atypical, Condition::V).typical;
  const bool vs_typ = classify(typical, Condition::VS).typical;
  const auto [ml, mv] = marginal_probabilities(typical);
  double err = std::max(std::abs(ml[0] - (0.5 - 2e-10)), std::abs(ml[1] - (0.5 - 2e-10)));
  err = std::max(err, std::abs(p_connect(ml) - (1.0 - 4e-10)));
  for (double x : mv) err = std::max(err, std::abs(x - 1.0 / 3.0));
  return {v_typ && !v_atyp && !vs_typ && err <= 1e-12,
          fmt::format("V: {}/{}, VS on first: {}, marginal error {:.2e}", v_typ ? "typical" : "atypical",
                      v_atyp ? "typical" : "atypical", vs_typ ? "typical" : "atypical", err)};
}

Outcome partial_swap_endpoints() {
  Rng rng(808);
  PartialSwapModel m;
  m.rho = random_density_matrix(4, 4, rng);
  m.channel_n = random_channel(2, 2, 2, rng);
  const std::vector<std::string> order{"a1", "a2", "b1", "b2"};
  const Matrix pi = Matrix::Identity(2, 2) / 2.0;

  // p = 0: rho on (a1, b1), pi on a2 and b2.
  Matrix id_only(16, 16);
  {
    const LabeledOperator x(Registry{{"a1", 2}, {"b1", 2}}, m.rho);
    const LabeledOperator y = tensor(tensor(x, LabeledOperator(Registry{{"a2", 2}}, pi)),
                                     LabeledOperator(Registry{{"b2", 2}}, pi));
    id_only = permute(y, order).matrix();
  }
  // p = 1: reduced rho on a1, (id x N)(Phi) from a2 to b1, pi on b2.
  Matrix swap_only(16, 16);
  {
    const LabeledOperator rho_a1 = partial_trace(LabeledOperator(Registry{{"a1", 2}, {"r", 2}}, m.rho), {"r"});
    const LabeledOperator phi = LabeledVector::max_entangled(Registry{{"a2", 2}}, Registry{{"x", 2}}).projector();
    const std::vector<std::string> in{"x"};
    const LabeledOperator wire = apply_kraus(phi, m.channel_n, in, Registry{{"b1", 2}});
    const LabeledOperator y = tensor(tensor(rho_a1, wire), LabeledOperator(Registry{{"b2", 2}}, pi));
    swap_only = permute(y, order).matrix();
  }
  m.p = 0.0;
  const double e0 = (permute(build_partial_swap(m).op(), order).matrix() - id_only).cwiseAbs().maxCoeff();
  m.p = 1.0;
  const double e1 = (permute(build_partial_swap(m).op(), order).matrix() - swap_only).cwiseAbs().maxCoeff();
  int invalid = 0;
  for (int i = 0; i <= 20; ++i) {
    m.p = i / 20.0;
    if (!validate_process(build_partial_swap(m)).valid()) ++invalid;
  }
  return {e0 <= 1e-10 && e1 <= 1e-10 && invalid == 0,
          fmt::format("endpoint errors {:.2e} / {:.2e}, {} of 21 grid points invalid", e0, e1, invalid)};
}

Outcome causality_axioms() {
  Rng rng(909);
  const auto eps = eps_grid(0.0, 0.7, 0.05);
  std::size_t violations = 0;
  std::size_t checks = 0;
  bool normalization = true;
  for (int k = 0; k < 20; ++k) {
    const ProcessMatrix w = build_harmonic_reduced(HarmonicCleanModel(random_amplitudes(rng), 2));
    std::vector<LocalOperationPair> ops;
    for (int j = 0; j < 10; ++j) ops.push_back(random_local_operations(2, rng));
    const AxiomReport r = axiom_suite(w, ops, eps);
    violations += r.violations.size();
    checks += r.checks;
    normalization = normalization && r.normalization_ok;
  }
  return {violations == 0 && normalization,
          fmt::format("{} violations in {} checks, normalization {}", violations, checks, normalization ? "ok" : "broken")};
}

Outcome leakage_matching() {
  Rng rng(1010);
  const std::vector<double> eps{0.01, 0.1, 0.3, 0.5};
  int leaking = 0;
  for (int k = 0; k < 100; ++k) {
    const auto amps = random_sectored_amplitudes(rng);
    const auto [ml, mv] = marginal_probabilities(amps);
    if (!(ml[0] > 0 && mv[0] > 0)) return {false, "sampler produced a zero p1"};
    if (leakage_report(amps, 2, 2, eps).superluminal) ++leaking;
  }
  Matrix3d p = Matrix3d::Zero();
  p(2, 0) = 0.5;
  p(2, 2) = 0.5;
  const bool counterexample = leakage_report(SectoredAmplitudes::from_probabilities(p), 2, 2, eps).superluminal;
  return {leaking == 0 && counterexample,
          fmt::format("{} of 100 random models leak, measure-zero case leaks: {}", leaking, counterexample)};
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* f = popen((cmd + " 2>&1; echo \"exit=$?\"").c_str(), "r");
  if (!f) return "<popen failed>";
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), n);
  pclose(f);
  return out;
}

Outcome cli_determinism() {
  const std::string exe = CFLUCT_CLI;
  const std::string fx = CFLUCT_FIXTURES;
  const auto tmp = std::filesystem::temp_directory_path() / "cfluct_acceptance";
  std::filesystem::create_directories(tmp);
  const std::string csv = (tmp / "curves.csv").string();

  std::vector<std::string> cmds;
  for (const auto& entry : std::filesystem::directory_iterator(fx)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("criterion", 0) == 0) continue;
    cmds.push_back(exe + " validate " + entry.path().string());
    cmds.push_back(exe + " capacity " + entry.path().string() + " --eps-grid 0:0.7:0.1");
    cmds.push_back(exe + " typicality " + entry.path().string());
    cmds.push_back(exe + " leakage " + entry.path().string());
  }
  std::sort(cmds.begin(), cmds.end());
  cmds.push_back(exe + " capacity " + fx + "/partial_swap.json --oracle --eps-grid 0:0.7:0.1");
  cmds.push_back(exe + " capacity " + fx + "/typical_example.json --sector massive");
  cmds.push_back(exe + " compare " + fx + "/harmonic_p999.json " + fx + "/harmonic_p04.json");
  cmds.push_back(exe + " compare " + fx + "/harmonic_p999.json " + fx + "/partial_swap_p999.json --criterion " + fx +
                 "/criterion_tight.json");
  cmds.push_back(exe + " compare " + fx + "/harmonic_p999.json " + fx + "/harmonic_d4.json");
  cmds.push_back(exe + " capacity " + fx + "/harmonic_mixed.json --eps-grid 0:1:0.001 --out " + csv + " && " + exe +
                 " invert " + csv + " " + csv);

  std::size_t differing = 0;
  for (const auto& c : cmds) {
    const std::string a = capture(c);
    const std::string b = capture(c);
    if (a != b || a.find("<popen failed>") != std::string::npos) ++differing;
  }
  std::filesystem::remove_all(tmp);
  return {differing == 0 && !cmds.empty(),
          fmt::format("{} of {} invocations differ between runs", differing, cmds.size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "born rule sanity", 1.0, born_sanity},
      {2, "harmonic reduction identity", 5.0, harmonic_reduction},
      {3, "signalling structure", 0.0, signalling_structure},
      {4, "closed form equals probe oracle", 60.0, oracle_equivalence},
      {5, "zero-capacity threshold", 0.0, zero_threshold},
      {6, "inversion round trip", 120.0, inversion_round_trip},
      {7, "example sectored tables", 0.0, example_matrices},
      {8, "partial swap endpoints", 0.0, partial_swap_endpoints},
      {9, "causality measure axioms", 0.0, causality_axioms},
      {10, "leakage matching", 0.0, leakage_matching},
      {11, "cli determinism", 0.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt::format(", over the {:.0f} s budget", c.budget_s);
    }
    if (!o.pass) ++failures;
    fmt::print("criterion {:2d} {}: {} ({}; {:.2f} s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail, secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
