// Acceptance battery: one PASS/FAIL line per criterion, with measured values
// and runtimes. Exit status is nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emergence/asymptotics.hpp"
#include "emergence/fock_oracle.hpp"
#include "emergence/geometry.hpp"
#include "emergence/newton_wigner.hpp"
#include "emergence/particle.hpp"
#include "emergence/presets.hpp"

namespace {

using namespace emergence;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;  ///< printed under the criterion line
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

double max_diff(const PhaseVector& a, const PhaseVector& b) { return (a - b).max_abs(); }

ROperator mass_field_operator(std::size_t n, double spacing) {
  std::vector<double> field(n);
  for (std::size_t x = 0; x < n; ++x) field[x] = 1.0 + 0.3 * std::sin(6.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(n));
  return build_variable_coefficient(field, Lattice::line(static_cast<int>(n), spacing));
}

Outcome compton_locality() {
  const auto spec = diagonalize(build_klein_gordon(1.0, Lattice::line(512)));
  const auto fit = fit_decay_length(kernel_profile(spec, -0.5, 0), {3.0, 20.0});
  return {fit.quality && std::abs(fit.length - 1.0) <= 0.1,
          "R^-1/2 decay length " + fmt("%.4f", fit.length) + " (target 1.0 +- 10%)",
          {}};
}

Outcome branch_structure() {
  bool ok = true;
  std::vector<std::string> d;
  for (double m : {1.0, 2.0, 0.5}) {
    const auto b = find_branch_points(SymbolPolynomial::klein_gordon(m));
    const auto pred = predict_compton(SymbolPolynomial::klein_gordon(m));
    const bool here = b.zeros.size() == 1 && b.zeros[0].k == cplx(0.0, m) && pred.compton == 1.0 / m;
    ok = ok && here;
    d.push_back("m=" + fmt("%g", m) + ": zero (" + fmt("%g", b.zeros[0].k.real()) + ", " + fmt("%.17g", b.zeros[0].k.imag()) +
                "), L_c = " + fmt("%.17g", pred.compton) + (here ? "" : "  <-- mismatch"));
  }
  const auto two = find_branch_points(SymbolPolynomial{{4.0, 5.0, 1.0}});
  const double lc2 = predict_compton(SymbolPolynomial{{4.0, 5.0, 1.0}}).compton;
  const bool two_ok = two.zeros.size() == 2 && std::abs(two.zeros[two.dominant].k.imag() - 1.0) <= 1e-12 &&
                      std::abs(lc2 - 1.0) <= 1e-12;
  ok = ok && two_ok;
  d.push_back("(k^2+1)(k^2+4): zeros at i*" + fmt("%.12g", two.zeros[0].k.imag()) + ", i*" +
              fmt("%.12g", two.zeros[1].k.imag()) + ", L_c = " + fmt("%.12g", lc2));
  return {ok, "single upper zero (0, m) with L_c = 1/m exactly; lighter mass dominates", d};
}

Outcome cross_quadrature() {
  const auto sym = SymbolPolynomial::klein_gordon(1.0);
  double worst = 0.0;
  for (double lambda : {-0.5, -1.0})
    for (double r = 2.0; r <= 8.0 + 1e-12; r += 0.5)
      worst = std::max(worst, std::abs(branch_cut_kernel(sym, lambda, r) / direct_radial_integral(sym, lambda, r) - 1.0));
  std::vector<std::string> d;
  bool rates = true;
  for (double lambda : {-0.5, -1.0}) {
    std::vector<KernelSample> samples;
    for (int i = 0; i <= 40; ++i) {
      const double r = 5.0 + 10.0 * i / 40.0;
      samples.push_back({r, branch_cut_kernel(sym, lambda, r)});
    }
    const auto fit = fit_decay_length(samples, {5.0, 15.0}, asymptotic_power(sym, lambda));
    const double rate = 1.0 / fit.length;
    rates = rates && std::abs(rate - 1.0) <= 0.05;
    d.push_back("lambda=" + fmt("%g", lambda) + ": fitted decay rate " + fmt("%.5f", rate) + " (v = 1, +-5%)");
  }
  return {worst <= 1e-4 && rates, "max relative cut/direct difference " + sci(worst) + " (<= 1e-4)", d};
}

Outcome spectral_algebra() {
  double semigroup = 0.0, jj = 0.0, rhs = 0.0;
  std::mt19937_64 rng(4);
  for (std::size_t n : {16u, 64u, 128u}) {
    for (const ROperator& op : {build_klein_gordon(1.0, Lattice::line(static_cast<int>(n))), mass_field_operator(n, 0.8)}) {
      const auto spec = diagonalize(op);
      for (int i = 0; i < 5; ++i) {
        const auto u = presets::random_phase(spec.lattice(), rng);
        for (const auto& [a, b] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {-0.25, 0.75}, {-0.5, -0.5}, {0.3, -1.1}}) {
          const Eigen::VectorXd lhs = spec.apply_power(a, spec.apply_power(b, u.phi));
          const Eigen::VectorXd ref = spec.apply_power(a + b, u.phi);
          semigroup = std::max(semigroup, (lhs - ref).norm() / ref.norm());
        }
        jj = std::max(jj, max_diff(apply_J(apply_J(u, spec), spec), -1.0 * u) / u.max_abs());
        const auto h = hamilton_rhs(u, op);
        rhs = std::max(rhs, max_diff(schrodinger_rhs(u, spec), h) / h.max_abs());
      }
    }
  }
  return {semigroup <= 1e-9 && jj <= 1e-9 && rhs <= 1e-9,
          "semigroup " + sci(semigroup) + ", J^2+I " + sci(jj) + ", Schrodinger-Hamilton " + sci(rhs) + " (<= 1e-9; N <= 128)",
          {}};
}

Outcome inner_products() {
  std::mt19937_64 rng(5);
  double forms = 0.0, drift = 0.0;
  for (const ROperator& op : {build_klein_gordon(1.0, Lattice::line(64)), mass_field_operator(32, 1.0)}) {
    const auto spec = diagonalize(op);
    for (int i = 0; i < 100; ++i) {
      const auto u = presets::random_phase(spec.lattice(), rng);
      const auto v = presets::random_phase(spec.lattice(), rng);
      const double scale = std::sqrt(inner_product(u, u, spec).real() * inner_product(v, v, spec).real());
      const std::vector<cplx> vals{inner_product(u, v, spec, InnerProductForm::qp),
                                   inner_product(u, v, spec, InnerProductForm::alpha),
                                   inner_product(u, v, spec, InnerProductForm::direct),
                                   symplectic(apply_J(u, spec), v) - cplx(0, 1) * symplectic(u, v)};
      for (std::size_t a = 0; a < vals.size(); ++a)
        for (std::size_t b = a + 1; b < vals.size(); ++b) forms = std::max(forms, std::abs(vals[a] - vals[b]) / scale);
      const cplx later = inner_product(evolve_phase(u, spec, 100.0), evolve_phase(v, spec, 100.0), spec);
      drift = std::max(drift, std::abs(later - vals[0]) / scale);
    }
  }
  return {forms <= 1e-9 && drift <= 1e-8,
          "pairwise form spread " + sci(forms) + " (<= 1e-9), drift over t=100 " + sci(drift) + " (<= 1e-8)",
          {}};
}

Outcome commuting_diagrams() {
  const auto spec = diagonalize(build_klein_gordon(1.0, Lattice::line(64)));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> time(0.0, 50.0);
  double a = 0.0, b = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto u = presets::random_phase(spec.lattice(), rng);
    const double t = time(rng);
    const auto m = to_modes(u, spec);
    a = std::max(a, (to_modes(evolve_phase(u, spec, t), spec).alpha - evolve_modes(m, spec, t).alpha).cwiseAbs().maxCoeff() /
                        m.alpha.cwiseAbs().maxCoeff());
    const auto w = to_nw(u, spec);
    b = std::max(b, (to_nw(evolve_phase(u, spec, t), spec).psi - evolve_nw(w, spec, t).psi).cwiseAbs().maxCoeff() /
                        w.psi.cwiseAbs().maxCoeff());
  }
  return {a < 1e-10 && b < 1e-9, "(a) modes " + sci(a) + " (< 1e-10), (b) Newton-Wigner " + sci(b) + " (< 1e-9)", {}};
}

Outcome oracle_arbitration() {
  bool ok = true;
  double worst = 0.0;
  double kappa_min = 1e300, kappa_max = -1e300;
  std::size_t comparisons = 0;
  const auto spec = diagonalize(build_klein_gordon(0.8, Lattice({10}, 0.7)));
  std::mt19937_64 rng(7);
  auto diff = [](const FockSpace& sp, const FockVector& st, const SparseOp& o) {
    return expectation_of_square(sp, st, o) - expectation_of_square(sp, vacuum(sp), o);
  };
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t k = 0; k < spec.mode_count(); ++k) subsets.push_back({k});
  subsets.push_back({0, 3, 5});
  subsets.push_back({1, 2, 9});
  for (const auto& subset : subsets) {
    const auto space = build_fock(spec, subset, 14);
    Eigen::VectorXcd dir = subset.size() == 1 ? Eigen::VectorXcd::Ones(1) : presets::random_modes(subset.size(), rng).alpha;
    dir.normalize();
    const auto state = one_particle(space, dir);
    ModeVector m{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()))};
    for (std::size_t j = 0; j < subset.size(); ++j) m.alpha[static_cast<Eigen::Index>(subset[j])] = dir[static_cast<Eigen::Index>(j)];
    const auto p = particle_from_modes(m, spec);
    const Eigen::VectorXd phi2 = diff_profile(p, spec, Probe::phi2);
    const Eigen::VectorXd pi2 = diff_profile(p, spec, Probe::pi2);
    const Eigen::VectorXd energy = diff_profile(p, spec, Probe::energy_density);
    const Eigen::VectorXd bare = p.progenitor.phi.array().square() + spec.apply_power(-0.5, p.progenitor.pi).array().square();
    const auto coh = coherent_state(space, 0.8 * dir);
    const auto classical = from_modes(ModeVector{0.8 * m.alpha}, spec);
    for (std::size_t x = 0; x < 10; ++x) {
      const auto xi = static_cast<Eigen::Index>(x);
      const auto fphi = field_operator(space, x, FieldKind::phi);
      const auto fpi = field_operator(space, x, FieldKind::pi);
      const auto froot = field_operator(space, x, FieldKind::root_phi);
      const double o_phi = diff(space, state, fphi);
      const std::vector<OracleRecord> recs{
          compare_with_oracle("phi2_diff", phi2[xi], o_phi, 0.0),
          compare_with_oracle("pi2_diff", pi2[xi], diff(space, state, fpi), 0.0),
          compare_with_oracle("energy_density_diff", energy[xi], 0.5 * diff(space, state, fpi) + 0.5 * diff(space, state, froot), 0.0),
          compare_with_oracle("coherent <phi>", classical.phi[xi], std::real(expectation(space, coh, fphi)), coh.truncation_bound)};
      for (const auto& r : recs) {
        ok = ok && r.pass;
        worst = std::max(worst, std::abs(r.analytic - r.oracle) / std::max(1.0, std::abs(r.analytic)));
        ++comparisons;
      }
      if (subset.size() == 1 && bare[xi] > 1e-6 * bare.maxCoeff()) {
        kappa_min = std::min(kappa_min, o_phi / bare[xi]);
        kappa_max = std::max(kappa_max, o_phi / bare[xi]);
      }
    }
  }
  const auto small = diagonalize(build_klein_gordon(0.9, Lattice({3}, 0.8)));
  const auto full = build_fock(small, {0, 1, 2}, 14);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) {
      const SparseOp prod = field_operator(full, x, FieldKind::phi) * field_operator(full, y, FieldKind::phi);
      const auto r = compare_with_oracle("vacuum_two_point", vacuum_two_point(small, x, y),
                                         std::real(expectation(full, vacuum(full), prod)), 0.0);
      ok = ok && r.pass;
      worst = std::max(worst, std::abs(r.analytic - r.oracle));
      ++comparisons;
    }
  }
  const double kappa = 0.5 * (kappa_min + kappa_max);
  const bool stable = kappa_max - kappa_min <= 1e-8 && std::abs(kappa - convention_kappa) <= 1e-8;
  return {ok && stable,
          std::to_string(comparisons) + " oracle comparisons, worst deviation " + sci(worst) +
              " (<= max(1e-8, truncation bound))",
          {"measured convention factor kappa = " + fmt("%.12f", kappa) + " (spread " + sci(kappa_max - kappa_min) +
           "); energy-density factor " + fmt("%g", energy_kappa)}};
}

Outcome small_state() {
  const auto spec = diagonalize(build_klein_gordon(1.0, Lattice::line(8)));
  const auto space = build_fock(spec, {0, 1}, 14);
  Eigen::VectorXcd dir(2);
  dir << cplx(0.6, 0.2), cplx(-0.3, 0.7);
  dir.normalize();
  const auto r = small_state_limit_check(space, dir, {0.01, 0.02, 0.04, 0.08, 0.16});
  return {std::abs(r.exponent - 2.0) <= 0.1, "power-law exponent " + fmt("%.4f", r.exponent) + " (2.0 +- 0.1)", {}};
}

Outcome localization_and_elp() {
  const auto lat = Lattice::line(512);
  const auto spec = diagonalize(build_klein_gordon(1.0, lat));
  const double lc = compton_length(spec);
  const auto bump = make_particle(presets::gaussian_bump(lat, 256, 5.0 * lc), spec);
  const auto reports = localization_report(bump, spec);
  std::string lengths;
  for (const auto& r : reports) lengths += r.probe + " " + fmt("%.3f", r.fit.length / lc) + "  ";
  const auto a = make_particle(presets::gaussian_bump(lat, 246, 5.0 * lc), spec);
  const auto b = make_particle(presets::gaussian_bump(lat, 266, 5.0 * lc, -0.5), spec);
  const auto elp = elp_check({a, b}, spec, ball_region(lat, 256, 40.0), 20240101, 10);
  double worst = 0.0;
  for (const auto& sup : elp.superpositions)
    for (const auto& r : sup) worst = std::max(worst, r.fit.length / lc);
  return {all_localized(reports) && elp.precondition && elp.pass && elp.superpositions.size() == 10,
          "bump decay lengths / L_c: " + lengths + "(<= 1.2); ELP worst " + fmt("%.3f", worst) + " over 10 superpositions",
          {}};
}

Outcome newton_wigner() {
  const auto spec = diagonalize(build_klein_gordon(1.0, Lattice::line(512)));
  std::mt19937_64 rng(10);
  double lin = 0.0, nrm = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto u = presets::random_phase(spec.lattice(), rng);
    const auto w = to_nw(u, spec);
    lin = std::max(lin, (to_nw(apply_J(u, spec), spec).psi - cplx(0, 1) * w.psi).cwiseAbs().maxCoeff() / w.psi.cwiseAbs().maxCoeff());
    const double ref = std::sqrt(inner_product(u, u, spec).real());
    nrm = std::max(nrm, std::abs(w.norm() - ref) / ref);
  }
  const auto delta = nw_delta_localization(spec, 256);
  const double width = delta.amplitude_fit.length / delta.compton;
  const auto nr = nonrelativistic_compare(nw_gaussian(spec.lattice(), 256, 20.0), spec, 10.0);
  const auto big = diagonalize(build_klein_gordon(1.0, Lattice::line(1024)));
  const auto leak = superluminal_leakage(nw_gaussian(big.lattice(), 512, 3.0, 0.0, 10.0), big, 512, 10.0, 5.0);

  std::vector<std::string> d;
  auto item = [&](bool pass, const std::string& text) {
    d.push_back(std::string(pass ? "pass  " : "FAIL  ") + text);
    return pass;
  };
  bool ok = true;
  ok &= item(lin <= 1e-9, "iN = NJ: " + sci(lin));
  ok &= item(nrm <= 1e-9, "NW norm vs <<u,u>>^1/2: " + sci(nrm));
  ok &= item(delta.literal_form_residual <= 1e-9,
             "NW-delta phi^2 profile vs 1/2 kappa [R^1/4 delta]^2: relative residual " + sci(delta.literal_form_residual) + " (<= 1e-9)");
  ok &= item(std::abs(width - 1.0) <= 0.25, "NW-delta amplitude decay length / L_c: " + fmt("%.4f", width) + " (1 +- 25%)");
  ok &= item(nr.precondition && nr.distance < 0.01, "non-relativistic L2 distance (width 20/m, t=10): " + sci(nr.distance));
  ok &= item(leak.precondition && leak.leakage > 0.0, "superluminal leakage at t=5: " + sci(leak.leakage) + " (> 0)");
  d.push_back("info  phi^2 profile vs 2 kappa [R^-1/4 psi]^2: " + sci(delta.phi2_closed_form_residual) +
              "; pi^2 profile vs 2 kappa [R^1/4 psi]^2: " + sci(delta.pi2_closed_form_residual));
  d.push_back("info  phase-space energy fraction beyond the light cone: " + sci(leak.phase_space_tail));
  return {ok, "Newton-Wigner transform, delta profile, non-relativistic limit, leakage", d};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto base = std::filesystem::temp_directory_path() / "emergence_acceptance";
  std::filesystem::remove_all(base);
  const auto a = base / "a", b = base / "b";
  for (const auto& dir : {a, b}) {
    const std::string cmd = std::string(EMERGENCE_LAB_PATH) + " all --seed 4242 --out " + dir.string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) > 1)
      return {false, "emergence-lab all exited abnormally (" + std::to_string(status) + ")", {}};
  }
  std::size_t files = 0, identical = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    ++files;
    const auto other = b / entry.path().filename();
    identical += std::filesystem::exists(other) && slurp(entry.path()) == slurp(other);
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(b)) ++files_b;
  const bool has_report = std::filesystem::exists(a / "report.all-seed4242.json");
  return {has_report && files > 0 && files == identical && files == files_b,
          std::to_string(identical) + "/" + std::to_string(files) + " output files byte-identical across two runs", {}};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Compton locality", compton_locality},
      {"Branch structure", branch_structure},
      {"Asymptotic cross-quadrature", cross_quadrature},
      {"Spectral-calculus algebra", spectral_algebra},
      {"Inner-product forms and Segal reconstruction", inner_products},
      {"Commuting diagrams", commuting_diagrams},
      {"Oracle arbitration", oracle_arbitration},
      {"Small-state limit", small_state},
      {"Localization and ELP", localization_and_elp},
      {"Newton-Wigner properties", newton_wigner},
      {"Determinism", determinism},
  };
  const std::vector<double> budgets{10.0, 0.0, 0.0, 30.0, 0.0, 0.0, 0.0, 0.0, 60.0, 0.0, 0.0};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budgets[i] > 0.0 && secs >= budgets[i]) {
      out.pass = false;
      out.summary += "; runtime over budget";
    }
    std::printf("[%s] %2zu %s: %s [%.2f s%s]\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.summary.c_str(), secs, budgets[i] > 0.0 ? fmt(" < %g s", budgets[i]).c_str() : "");
    for (const auto& line : out.details) std::printf("         %s\n", line.c_str());
    failed += !out.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
