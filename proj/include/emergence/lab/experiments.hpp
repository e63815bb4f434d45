#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "emergence/asymptotics.hpp"
#include "emergence/fock_oracle.hpp"
#include "emergence/geometry.hpp"
#include "emergence/lab/config.hpp"
#include "emergence/lab/report.hpp"
#include "emergence/newton_wigner.hpp"
#include "emergence/particle.hpp"
#include "emergence/presets.hpp"

namespace emergence::lab {

/// Experiments in the order `all` runs them.
inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"kernel",       "modes-check", "geometry-check", "segal-check", "oracle-verify",
                                              "localize",     "elp",         "nw",             "asymptotics"};
  return names;
}

inline bool is_experiment(const std::string& name) {
  if (name == "all") return true;
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace detail {

/// Independent stream per experiment, all derived from the configured seed.
inline std::mt19937_64 stream(const ExperimentConfig& cfg, const std::string& experiment) {
  const auto& n = experiment_names();
  const auto index = static_cast<std::uint64_t>(std::find(n.begin(), n.end(), experiment) - n.begin());
  const std::uint64_t s = cfg.seed();
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

/// The configured R on a line of `sites` sites: Klein-Gordon, or a mass field
/// m(x) = mass (1 + modulation sin(6 pi x / sites)).
inline ROperator make_operator(const ExperimentConfig& cfg, std::size_t sites, double spacing) {
  const Lattice lat = Lattice::line(static_cast<int>(sites), spacing);
  const double m = cfg.number("mass");
  if (cfg.text("operator") == "klein-gordon") return build_klein_gordon(m, lat);
  std::vector<double> field(sites);
  for (std::size_t x = 0; x < sites; ++x)
    field[x] = m * (1.0 + cfg.number("modulation") * std::sin(6.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(sites)));
  return build_variable_coefficient(field, lat);
}

inline double max_abs_diff(const PhaseVector& a, const PhaseVector& b) { return (a - b).max_abs(); }

/// Largest |a - b| / sqrt(<<u,u>> <<v,v>>) style comparison scale.
inline double pair_scale(const PhaseVector& u, const PhaseVector& v, const Spectrum& spec) {
  return std::sqrt(std::abs(inner_product(u, u, spec, InnerProductForm::qp)) *
                   std::abs(inner_product(v, v, spec, InnerProductForm::qp)));
}

inline Table profile_table(std::string name, const std::vector<KernelSample>& samples) {
  Table t{std::move(name), {"distance", "value", "log_value"}, {}};
  for (const auto& s : samples) t.add({s.distance, s.value, std::log(s.value)});
  return t;
}

}  // namespace detail

inline Section run_kernel(const ExperimentConfig& cfg) {
  Section s{"kernel", {}, json::object(), {}};
  const auto op = detail::make_operator(cfg, cfg.count("sites"), cfg.number("spacing"));
  const auto spec = diagonalize(op);
  const double lc = compton_length(spec);
  const auto window = cfg.numbers("kernel.window");
  s.observations["compton_length"] = lc;
  for (double a : cfg.numbers("kernel.exponents")) {
    const auto profile = kernel_profile(spec, a, 0);
    // Algebraic prefactor r^-p of a simple branch point in d dimensions.
    const double p = (a + 1.0) + 0.5 * (spec.lattice().dimension() - 1);
    const DecayWindow win{window[0] * lc, window[1] * lc};
    const auto fit = fit_decay_length(profile, win, p);
    auto c = check_rel("decay length of R^" + format_number(a) + " kernel", fit.length, lc, cfg.number("kernel.tolerance"));
    c.note = fit.diagnostic;
    s.checks.push_back(c);
    s.observations["fit_residual R^" + format_number(a)] = fit.residual;
    s.observations["plain_exponential_length R^" + format_number(a)] = fit_decay_length(profile, win).length;
    s.tables.push_back(detail::profile_table("kernel_profile_R" + format_number(a), profile.samples));
  }
  // Slowly varying mass field m(x) = mass (1 + a sin(2 pi x / N)): decay of
  // R^-1/2 measured at the lightest and heaviest sites, reported without a gate.
  {
    const std::size_t n = cfg.count("sites");
    const double a = cfg.number("kernel.slow_modulation");
    const double m = cfg.number("mass");
    std::vector<double> field(n);
    for (std::size_t x = 0; x < n; ++x)
      field[x] = m * (1.0 + a * std::sin(2.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(n)));
    const auto slow = diagonalize(build_variable_coefficient(field, Lattice::line(static_cast<int>(n), cfg.number("spacing"))));
    json rows = json::array();
    for (std::size_t source : {3 * n / 4, n / 4}) {
      const double local = 1.0 / field[source];
      const auto fit = fit_decay_length(kernel_profile(slow, -0.5, source), {window[0] * local, window[1] * local});
      rows.push_back(json{{"source", source}, {"local_compton", local}, {"decay_length", fit.length}, {"ratio", fit.length / local}});
    }
    s.observations["slowly_varying_mass R^-0.5"] = rows;
  }

  // R itself is a nearest-neighbour stencil: its kernel vanishes beyond it.
  double beyond = 0.0;
  for (const auto& smp : kernel_profile(op, 1.0, 0).samples)
    if (smp.distance > op.stencil_radius() * cfg.number("spacing") + 1e-9) beyond = std::max(beyond, smp.value);
  s.checks.push_back(check_below("R kernel beyond its stencil", beyond, 0.0));
  return s;
}

inline Section run_modes_check(const ExperimentConfig& cfg) {
  Section s{"modes-check", {}, json::object(), {}};
  const auto op = detail::make_operator(cfg, cfg.count("modes.sites"), cfg.number("spacing"));
  const auto spec = diagonalize(op);
  const double tol = cfg.number("modes.tolerance");
  auto rng = detail::stream(cfg, "modes-check");

  const auto canon = check_canonical(spec);
  s.checks.push_back(check_below("mode orthonormality deviation", canon.orthonormality_deviation, tol));
  s.checks.push_back(check_below("mode completeness deviation", canon.completeness_deviation, tol));

  double round_trip = 0.0, energy = 0.0, diagram = 0.0;
  for (std::size_t i = 0; i < cfg.count("modes.samples"); ++i) {
    const auto u = presets::random_phase(spec.lattice(), rng);
    const auto m = to_modes(u, spec);
    round_trip = std::max(round_trip, detail::max_abs_diff(from_modes(m, spec), u) / u.max_abs());
    const double h_field = field_energy(u, op);
    energy = std::max(energy, std::abs(hamiltonian_energy(m, spec) - h_field) / h_field);
    for (double t : cfg.numbers("modes.times")) {
      const Eigen::VectorXcd lhs = to_modes(evolve_phase(u, spec, t), spec).alpha;
      const Eigen::VectorXcd rhs = evolve_modes(m, spec, t).alpha;
      diagram = std::max(diagram, (lhs - rhs).cwiseAbs().maxCoeff() / m.alpha.cwiseAbs().maxCoeff());
    }
  }
  s.checks.push_back(check_below("from_modes(to_modes(u)) round trip", round_trip, tol));
  s.checks.push_back(check_below("mode energy equals field energy (relative)", energy, tol));
  s.checks.push_back(check_below("evolve-then-map vs map-then-rotate", diagram, tol));

  double single = 0.0;
  for (std::size_t k = 0; k < spec.mode_count(); ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()));
    e[static_cast<Eigen::Index>(k)] = 1.0;
    single = std::max(single, (to_modes(presets::single_mode(spec, k), spec).alpha - e).cwiseAbs().maxCoeff());
  }
  s.checks.push_back(check_below("single-mode preset maps to a unit mode vector", single, tol));

  Table t{"modes_spectrum", {"index", "omega"}, {}};
  for (std::size_t k = 0; k < spec.mode_count(); ++k) t.add({static_cast<double>(k), spec.frequencies()[static_cast<Eigen::Index>(k)]});
  s.tables.push_back(std::move(t));
  return s;
}

inline Section run_geometry_check(const ExperimentConfig& cfg) {
  Section s{"geometry-check", {}, json::object(), {}};
  const auto op = detail::make_operator(cfg, cfg.count("geometry.sites"), cfg.number("spacing"));
  const auto spec = diagonalize(op);
  const double tol = cfg.number("geometry.tolerance");
  auto rng = detail::stream(cfg, "geometry-check");

  double semigroup = 0.0, jj = 0.0, rhs = 0.0;
  const std::vector<std::pair<double, double>> powers{{0.5, 0.5}, {-0.25, 0.75}, {-0.5, -0.5}, {0.3, -1.1}, {1.0, -0.5}};
  for (int i = 0; i < 10; ++i) {
    const auto u = presets::random_phase(spec.lattice(), rng);
    for (const auto& [a, b] : powers) {
      const Eigen::VectorXd lhs = spec.apply_power(a, spec.apply_power(b, u.phi));
      const Eigen::VectorXd ref = spec.apply_power(a + b, u.phi);
      semigroup = std::max(semigroup, (lhs - ref).norm() / ref.norm());
    }
    jj = std::max(jj, detail::max_abs_diff(apply_J(apply_J(u, spec), spec), -1.0 * u) / u.max_abs());
    const auto h = hamilton_rhs(u, op);
    rhs = std::max(rhs, detail::max_abs_diff(schrodinger_rhs(u, spec), h) / h.max_abs());
  }
  s.checks.push_back(check_below("semigroup R^a R^b = R^(a+b) (relative)", semigroup, tol));
  s.checks.push_back(check_below("J^2 = -I", jj, tol));
  s.checks.push_back(check_below("Schrodinger-form rhs equals Hamilton's equations", rhs, tol));

  double forms = 0.0, segal = 0.0, drift = 0.0;
  const double t = cfg.number("geometry.time");
  for (std::size_t i = 0; i < cfg.count("geometry.pairs"); ++i) {
    const auto u = presets::random_phase(spec.lattice(), rng);
    const auto v = presets::random_phase(spec.lattice(), rng);
    const double scale = detail::pair_scale(u, v, spec);
    const cplx qp = inner_product(u, v, spec, InnerProductForm::qp);
    const cplx al = inner_product(u, v, spec, InnerProductForm::alpha);
    const cplx di = inner_product(u, v, spec, InnerProductForm::direct);
    forms = std::max({forms, std::abs(qp - al) / scale, std::abs(qp - di) / scale, std::abs(al - di) / scale});
    segal = std::max(segal, std::abs(segal_inner_product(u, v, spec) - qp) / scale);
    const cplx later = inner_product(evolve_phase(u, spec, t), evolve_phase(v, spec, t), spec, InnerProductForm::qp);
    drift = std::max(drift, std::abs(later - qp) / scale);
  }
  s.checks.push_back(check_below("qp, alpha and direct inner products agree", forms, tol));
  s.checks.push_back(check_below("Segal reconstruction Omega(Ju,v) - i Omega(u,v) agrees", segal, tol));
  s.checks.push_back(check_below("inner product invariant under evolution", drift, cfg.number("geometry.time_tolerance")));

  const double lc = compton_length(spec);
  const auto loc = measure_J_locality(spec, 0, {3.0 * lc, 20.0 * lc});
  s.checks.push_back(check_rel("J block R^-1/2 decay length", loc.upper.length, lc, cfg.number("geometry.locality_tolerance")));
  s.checks.push_back(check_rel("J block R^1/2 decay length", loc.lower.length, lc, cfg.number("geometry.locality_tolerance")));
  s.tables.push_back(detail::profile_table("geometry_J_upper_block", kernel_profile(spec, -0.5, 0).samples));
  s.tables.push_back(detail::profile_table("geometry_J_lower_block", kernel_profile(spec, 0.5, 0).samples));
  return s;
}

inline Section run_segal_check(const ExperimentConfig& cfg) {
  Section s{"segal-check", {}, json::object(), {}};
  const double tol = cfg.number("segal.tolerance");
  auto rng = detail::stream(cfg, "segal-check");
  const std::size_t n = cfg.count("segal.sites");
  std::vector<double> field(n);
  for (std::size_t x = 0; x < n; ++x)
    field[x] = cfg.number("mass") * (1.0 + 0.4 * std::cos(2.0 * std::numbers::pi * 2.0 * static_cast<double>(x) / static_cast<double>(n)));
  const std::vector<std::pair<std::string, ROperator>> ops{
      {"klein-gordon", build_klein_gordon(cfg.number("mass"), Lattice::line(static_cast<int>(n), cfg.number("spacing")))},
      {"mass-field", build_variable_coefficient(field, Lattice::line(static_cast<int>(n), cfg.number("spacing")))}};
  Table table{"segal_samples", {"operator", "pair", "re_segal", "im_segal", "re_qp", "im_qp"}, {}};
  for (std::size_t o = 0; o < ops.size(); ++o) {
    const auto& [label, op] = ops[o];
    const auto spec = diagonalize(op);
    double recon = 0.0, hermitian = 0.0, symplectic_j = 0.0, antisym = 0.0;
    double min_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.count("segal.pairs"); ++i) {
      const auto u = presets::random_phase(spec.lattice(), rng);
      const auto v = presets::random_phase(spec.lattice(), rng);
      const double scale = detail::pair_scale(u, v, spec);
      const cplx sg = segal_inner_product(u, v, spec);
      const cplx qp = inner_product(u, v, spec, InnerProductForm::qp);
      recon = std::max(recon, std::abs(sg - qp) / scale);
      hermitian = std::max(hermitian, std::abs(segal_inner_product(v, u, spec) - std::conj(sg)) / scale);
      const auto ju = apply_J(u, spec), jv = apply_J(v, spec);
      symplectic_j = std::max(symplectic_j, std::abs(symplectic(ju, jv) - symplectic(u, v)) / scale);
      antisym = std::max(antisym, std::abs(symplectic(u, v) + symplectic(v, u)) / scale);
      min_norm = std::min(min_norm, symplectic(ju, u) / std::abs(inner_product(u, u, spec, InnerProductForm::qp)));
      if (i < 10) table.add({static_cast<double>(o), static_cast<double>(i), sg.real(), sg.imag(), qp.real(), qp.imag()});
    }
    s.checks.push_back(check_below(label + ": Segal form equals the quantum inner product", recon, tol));
    s.checks.push_back(check_below(label + ": Segal form is Hermitian", hermitian, tol));
    s.checks.push_back(check_below(label + ": J preserves Omega", symplectic_j, tol));
    s.checks.push_back(check_below(label + ": Omega antisymmetric", antisym, tol));
    s.checks.push_back(check_abs(label + ": Omega(Ju,u) / <<u,u>>", min_norm, 1.0, tol));
  }
  s.observations["operator_codes"] = json{{"0", ops[0].first}, {"1", ops[1].first}};
  s.tables.push_back(std::move(table));
  return s;
}

inline Section run_oracle_verify(const ExperimentConfig& cfg) {
  Section s{"oracle-verify", {}, json::object(), {}};
  auto rng = detail::stream(cfg, "oracle-verify");
  const auto op = detail::make_operator(cfg, cfg.count("oracle.sites"), cfg.number("oracle.spacing"));
  const auto spec = diagonalize(op);
  const int n_max = static_cast<int>(cfg.integer("oracle.n_max"));
  std::vector<std::size_t> subset;
  for (double k : cfg.numbers("oracle.modes")) subset.push_back(static_cast<std::size_t>(k));
  const auto space = build_fock(spec, subset, n_max);
  const auto vac = vacuum(space);
  const std::size_t n = spec.lattice().site_count();

  auto vac_square = [&](const SparseOp& o) { return expectation_of_square(space, vac, o); };

  // One-particle state along a random direction in the retained modes.
  Eigen::VectorXcd dir = presets::random_modes(subset.size(), rng).alpha;
  dir.normalize();
  const auto state = one_particle(space, dir);
  ModeVector m{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()))};
  for (std::size_t j = 0; j < subset.size(); ++j) m.alpha[static_cast<Eigen::Index>(subset[j])] = dir[static_cast<Eigen::Index>(j)];
  const auto particle = particle_from_modes(m, spec);
  const Eigen::VectorXd phi2 = diff_profile(particle, spec, Probe::phi2);
  const Eigen::VectorXd pi2 = diff_profile(particle, spec, Probe::pi2);
  const Eigen::VectorXd energy = diff_profile(particle, spec, Probe::energy_density);

  // Coherent state of the same direction; its fields are the classical ones.
  const Eigen::VectorXcd amp = cfg.number("oracle.coherent_amplitude") * dir;
  const auto coh = coherent_state(space, amp);
  ModeVector mc{m.alpha * cfg.number("oracle.coherent_amplitude")};
  const auto classical = from_modes(mc, spec);

  Table table{"oracle_profiles",
              {"site", "phi2_formula", "phi2_oracle", "pi2_formula", "pi2_oracle", "energy_formula", "energy_oracle"},
              {}};
  double dev_phi = 0.0, dev_pi = 0.0, dev_energy = 0.0, dev_mean = 0.0;
  bool pass_phi = true, pass_pi = true, pass_energy = true, pass_mean = true;
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    const auto fphi = field_operator(space, x, FieldKind::phi);
    const auto fpi = field_operator(space, x, FieldKind::pi);
    const auto froot = field_operator(space, x, FieldKind::root_phi);
    const double o_phi = expectation_of_square(space, state, fphi) - vac_square(fphi);
    const double o_pi = expectation_of_square(space, state, fpi) - vac_square(fpi);
    const double o_energy = 0.5 * (expectation_of_square(space, state, fpi) - vac_square(fpi)) +
                            0.5 * (expectation_of_square(space, state, froot) - vac_square(froot));
    const auto r_phi = compare_with_oracle("phi2_diff", phi2[xi], o_phi, 0.0);
    const auto r_pi = compare_with_oracle("pi2_diff", pi2[xi], o_pi, 0.0);
    const auto r_energy = compare_with_oracle("energy_density_diff", energy[xi], o_energy, 0.0);
    const auto r_mean = compare_with_oracle("coherent <phi>", classical.phi[xi], std::real(expectation(space, coh, fphi)),
                                            coh.truncation_bound);
    pass_phi = pass_phi && r_phi.pass;
    pass_pi = pass_pi && r_pi.pass;
    pass_energy = pass_energy && r_energy.pass;
    pass_mean = pass_mean && r_mean.pass;
    dev_phi = std::max(dev_phi, std::abs(r_phi.analytic - r_phi.oracle));
    dev_pi = std::max(dev_pi, std::abs(r_pi.analytic - r_pi.oracle));
    dev_energy = std::max(dev_energy, std::abs(r_energy.analytic - r_energy.oracle));
    dev_mean = std::max(dev_mean, std::abs(r_mean.analytic - r_mean.oracle));
    table.add({static_cast<double>(x), phi2[xi], o_phi, pi2[xi], o_pi, energy[xi], o_energy});
  }
  const double bound = std::max(1e-8, coh.truncation_bound);
  auto record = [&](const std::string& name, double dev, bool pass, double tol) {
    Check c = check_below(name + " vs Fock oracle (max abs deviation)", dev, tol);
    c.pass = pass;
    c.relation = "max over sites of |formula - oracle| <= tolerance * max(1, |formula|)";
    s.checks.push_back(c);
  };
  record("phi2_diff", dev_phi, pass_phi, 1e-8);
  record("pi2_diff", dev_pi, pass_pi, 1e-8);
  record("energy_density_diff", dev_energy, pass_energy, 1e-8);
  record("coherent-state field mean", dev_mean, pass_mean, bound);
  s.observations["coherent_truncation_bound"] = coh.truncation_bound;

  // Convention factor from single-mode states: oracle phi^2 difference over
  // the bare phase-space square phi^2 + (R^-1/2 pi)^2.
  double kappa_min = std::numeric_limits<double>::infinity(), kappa_max = -kappa_min;
  for (std::size_t k : subset) {
    const auto one = build_fock(spec, {k}, n_max);
    const auto st = one_particle(one, Eigen::VectorXcd::Ones(1));
    ModeVector mk{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()))};
    mk.alpha[static_cast<Eigen::Index>(k)] = 1.0;
    const auto pk = particle_from_modes(mk, spec);
    const Eigen::VectorXd bare =
        pk.progenitor.phi.array().square() + spec.apply_power(-0.5, pk.progenitor.pi).array().square();
    for (std::size_t x = 0; x < n; ++x) {
      if (bare[static_cast<Eigen::Index>(x)] < 1e-6 * bare.maxCoeff()) continue;
      const auto f = field_operator(one, x, FieldKind::phi);
      const double ratio = (expectation_of_square(one, st, f) - expectation_of_square(one, vacuum(one), f)) /
                           bare[static_cast<Eigen::Index>(x)];
      kappa_min = std::min(kappa_min, ratio);
      kappa_max = std::max(kappa_max, ratio);
    }
  }
  s.observations["kappa_measured"] = 0.5 * (kappa_min + kappa_max);
  s.observations["kappa_spread"] = kappa_max - kappa_min;
  s.checks.push_back(check_abs("measured convention factor kappa", 0.5 * (kappa_min + kappa_max), convention_kappa, 1e-8));
  s.checks.push_back(check_below("kappa stable across modes and sites (spread)", kappa_max - kappa_min, 1e-8));

  // Vacuum two-point function against the full-mode oracle of a tiny lattice.
  {
    const auto small = diagonalize(detail::make_operator(cfg, cfg.count("oracle.two_point_sites"), cfg.number("oracle.spacing")));
    std::vector<std::size_t> all_modes(small.mode_count());
    for (std::size_t k = 0; k < all_modes.size(); ++k) all_modes[k] = k;
    const auto full = build_fock(small, all_modes, n_max);
    const auto v0 = vacuum(full);
    double dev = 0.0;
    bool ok = true;
    for (std::size_t x = 0; x < small.mode_count(); ++x) {
      for (std::size_t y = 0; y < small.mode_count(); ++y) {
        const SparseOp prod = field_operator(full, x, FieldKind::phi) * field_operator(full, y, FieldKind::phi);
        const auto r = compare_with_oracle("vacuum_two_point", vacuum_two_point(small, x, y),
                                           std::real(expectation(full, v0, prod)), 0.0);
        ok = ok && r.pass;
        dev = std::max(dev, std::abs(r.analytic - r.oracle));
      }
    }
    record("vacuum_two_point", dev, ok, 1e-8);
  }

  // Small-state limit: D(lambda)|0> - (|0> + lambda |u>) = O(lambda^2).
  const auto sweep = small_state_limit_check(space, dir, cfg.numbers("oracle.lambdas"));
  s.checks.push_back(check_abs("small-state residual power-law exponent", sweep.exponent, 2.0, cfg.number("oracle.exponent_tolerance")));
  s.checks.push_back(check_flag("small-state residual monotone in lambda", sweep.monotone));
  Table small_table{"oracle_small_state", {"lambda", "residual"}, {}};
  for (std::size_t i = 0; i < sweep.lambdas.size(); ++i) small_table.add({sweep.lambdas[i], sweep.residuals[i]});
  s.tables.push_back(std::move(table));
  s.tables.push_back(std::move(small_table));
  return s;
}

inline Section run_localize(const ExperimentConfig& cfg) {
  Section s{"localize", {}, json::object(), {}};
  const auto spec = diagonalize(detail::make_operator(cfg, cfg.count("sites"), cfg.number("spacing")));
  const Lattice& lat = spec.lattice();
  const double lc = compton_length(spec);
  const std::size_t center = lat.site_count() / 2;
  const auto state = make_particle(presets::gaussian_bump(lat, center, cfg.number("localize.width") * lc), spec);
  LocalizationOptions opt;
  opt.gate = cfg.number("localize.gate");
  for (const auto& r : localization_report(state, spec, opt)) {
    auto c = check_below(r.probe + " decay length / L_c", r.fit.length / lc, opt.gate);
    c.note = r.diagnostic;
    c.pass = r.localized;
    s.checks.push_back(c);
    s.observations[r.probe + " support_size"] = r.support_size;
    s.tables.push_back(detail::profile_table("localize_" + r.probe, r.profile));
  }
  s.observations["compton_length"] = lc;
  return s;
}

inline Section run_elp(const ExperimentConfig& cfg) {
  Section s{"elp", {}, json::object(), {}};
  const auto spec = diagonalize(detail::make_operator(cfg, cfg.count("sites"), cfg.number("spacing")));
  const Lattice& lat = spec.lattice();
  const double lc = compton_length(spec);
  const double h = lat.spacing();
  const auto center = static_cast<long>(lat.site_count() / 2);
  const auto half = std::lround(0.5 * cfg.number("elp.offset") / h);
  const double width = cfg.number("localize.width") * lc;
  const auto a = make_particle(presets::gaussian_bump(lat, static_cast<std::size_t>(center - half), width), spec);
  const auto b = make_particle(presets::gaussian_bump(lat, static_cast<std::size_t>(center + half), width, -0.5), spec);
  const auto region = ball_region(lat, static_cast<std::size_t>(center), cfg.number("elp.region_radius"));
  LocalizationOptions opt;
  opt.gate = cfg.number("localize.gate");
  auto rng = detail::stream(cfg, "elp");
  const auto report = elp_check({a, b}, spec, region, rng(), cfg.count("elp.count"), opt);
  s.checks.push_back(check_flag("inputs localized around the common region", report.precondition, report.diagnostic));
  Table t{"elp_superpositions", {"trial", "re_c1", "im_c1", "re_c2", "im_c2", "L_phi2", "L_pi2", "L_energy_density"}, {}};
  for (std::size_t i = 0; i < report.superpositions.size(); ++i) {
    const auto& reps = report.superpositions[i];
    double worst = 0.0;
    for (const auto& r : reps) worst = std::max(worst, r.fit.length / lc);
    auto c = check_below("superposition " + std::to_string(i) + " worst decay length / L_c", worst, opt.gate);
    c.pass = all_localized(reps);
    s.checks.push_back(c);
    const auto& co = report.coefficients[i];
    t.add({static_cast<double>(i), co[0].real(), co[0].imag(), co[1].real(), co[1].imag(), reps[0].fit.length,
           reps[1].fit.length, reps[2].fit.length});
  }
  s.tables.push_back(std::move(t));
  return s;
}

inline Section run_nw(const ExperimentConfig& cfg) {
  Section s{"nw", {}, json::object(), {}};
  const auto spec = diagonalize(detail::make_operator(cfg, cfg.count("nw.sites"), cfg.number("spacing")));
  const Lattice& lat = spec.lattice();
  const double tol = cfg.number("nw.tolerance");
  const double t = cfg.number("nw.time");
  auto rng = detail::stream(cfg, "nw");

  double linear = 0.0, norm = 0.0, diagram = 0.0, round_trip = 0.0;
  for (std::size_t i = 0; i < cfg.count("nw.samples"); ++i) {
    const auto u = presets::random_phase(lat, rng);
    const auto w = to_nw(u, spec);
    const double scale = w.psi.cwiseAbs().maxCoeff();
    linear = std::max(linear, (to_nw(apply_J(u, spec), spec).psi - cplx(0, 1) * w.psi).cwiseAbs().maxCoeff() / scale);
    const double ref = std::sqrt(inner_product(u, u, spec, InnerProductForm::qp).real());
    norm = std::max(norm, std::abs(w.norm() - ref) / ref);
    diagram = std::max(diagram, (to_nw(evolve_phase(u, spec, t), spec).psi - evolve_nw(w, spec, t).psi).cwiseAbs().maxCoeff() / scale);
    round_trip = std::max(round_trip, detail::max_abs_diff(from_nw(w, spec), u) / u.max_abs());
  }
  s.checks.push_back(check_below("i N = N J", linear, tol));
  s.checks.push_back(check_below("NW norm equals <<u,u>>^1/2 (relative)", norm, tol));
  s.checks.push_back(check_below("to_nw(evolve) = evolve_nw(to_nw)", diagram, tol));
  s.checks.push_back(check_below("from_nw(to_nw(u)) round trip", round_trip, tol));

  const std::size_t x0 = lat.site_count() / 2;
  const auto delta = nw_delta_localization(spec, x0);
  auto literal = check_below("NW delta phi^2 profile equals 1/2 kappa [R^1/4 delta]^2", delta.literal_form_residual, tol);
  literal.note = "closed form of the one-particle ket sum_k f_k*(x0)|k> is [R^-1/4 delta]^2 (= 2 kappa [R^-1/4 delta]^2)";
  s.checks.push_back(literal);
  s.checks.push_back(check_below("NW delta phi^2 profile equals 2 kappa [R^-1/4 psi]^2", delta.phi2_closed_form_residual, tol));
  s.checks.push_back(check_below("NW delta pi^2 profile equals 2 kappa [R^1/4 psi]^2", delta.pi2_closed_form_residual, tol));
  s.checks.push_back(check_flag("NW delta profile peaks at the source", delta.peak_at_source));
  s.checks.push_back(check_rel("NW delta amplitude decay length", delta.amplitude_fit.length, delta.compton, cfg.number("nw.width_tolerance")));
  {
    const double amp = std::sqrt(lat.cell_volume());
    const Eigen::VectorXd down = amp * emergence::detail::power_row(spec, -0.25, x0);
    const Eigen::VectorXd up_row = emergence::detail::power_row(spec, 0.25, x0);
    Table tab{"nw_delta_profile", {"offset", "phi2_profile", "closed_form", "literal_form"}, {}};
    for (std::size_t x = 0; x < lat.site_count(); ++x) {
      const auto xi = static_cast<Eigen::Index>(x);
      tab.add({(static_cast<double>(x) - static_cast<double>(x0)) * lat.spacing(), delta.phi2_profile[xi],
               2.0 * convention_kappa * down[xi] * down[xi],
               lat.cell_volume() * 0.5 * convention_kappa * up_row[xi] * up_row[xi]});
    }
    s.tables.push_back(std::move(tab));
  }

  const auto packet = nw_gaussian(lat, x0, cfg.number("nw.packet_width") / spec.frequencies().minCoeff());
  const auto nr = nonrelativistic_compare(packet, spec, t, cfg.number("nw.fidelity_tolerance"));
  s.observations["low_momentum_weight"] = nr.low_momentum_weight;
  s.observations["nonrelativistic_precondition"] = nr.precondition;
  s.observations["nonrelativistic_distance"] = nr.distance;
  if (nr.precondition)
    s.checks.push_back(check_below("non-relativistic L2 distance", nr.distance, cfg.number("nw.fidelity_tolerance")));

  const auto big = diagonalize(detail::make_operator(cfg, cfg.count("nw.leak_sites"), cfg.number("spacing")));
  const std::size_t c = big.lattice().site_count() / 2;
  const double r0 = cfg.number("nw.leak_radius");
  const auto w0 = nw_gaussian(big.lattice(), c, cfg.number("nw.leak_width"), 0.0, r0);
  const auto leak = superluminal_leakage(w0, big, c, r0, cfg.number("nw.leak_time"));
  s.checks.push_back(check_flag("truncated packet supported within r0", leak.precondition));
  s.checks.push_back(check_above("superluminal leakage beyond r0 + t", leak.leakage, 0.0));
  s.observations["leakage"] = leak.leakage;
  s.observations["phase_space_tail_beyond_cone"] = leak.phase_space_tail;
  return s;
}

inline Section run_asymptotics(const ExperimentConfig& cfg) {
  Section s{"asymptotics", {}, json::object(), {}};
  const double m = cfg.number("mass");
  const auto custom = cfg.numbers("asymptotics.symbol");
  const bool kg = custom.empty();
  const SymbolPolynomial symbol = kg ? SymbolPolynomial::klein_gordon(m) : SymbolPolynomial{custom};
  const auto bs = find_branch_points(symbol);
  const auto pred = predict_compton(symbol);
  s.checks.push_back(check_below("zeros substituted into the symbol (relative)", bs.max_residual, 1e-10));
  Table zeros{"asymptotics_zeros", {"re_k", "im_k", "multiplicity"}, {}};
  for (const auto& z : bs.zeros) zeros.add({z.k.real(), z.k.imag(), static_cast<double>(z.multiplicity)});
  s.tables.push_back(std::move(zeros));
  if (kg) {
    s.checks.push_back(check_flag("k^2 + m^2 has a single upper zero", bs.zeros.size() == 1));
    s.checks.push_back(check_abs("upper zero real part", bs.zeros[0].k.real(), 0.0, 1e-14));
    s.checks.push_back(check_rel("upper zero imaginary part", bs.zeros[0].k.imag(), m, 1e-14));
    s.checks.push_back(check_rel("Compton length 1/v", pred.compton, 1.0 / m, 1e-14));
    const auto two = predict_compton(SymbolPolynomial::product_of_masses({m, 2.0 * m}));
    s.checks.push_back(check_rel("two-factor symbol: lighter mass sets L_c", two.compton, 1.0 / m, 1e-12));
  }
  s.observations["decay_rate"] = pred.decay_rate;
  s.observations["compton_length"] = pred.compton;
  s.observations["asymptotic_form"] = pred.form;

  Table kt{"asymptotics_kernel", {"lambda", "r", "branch_cut", "direct", "relative_difference"}, {}};
  double worst = 0.0;
  for (double lambda : cfg.numbers("asymptotics.lambdas")) {
    for (double r : cfg.numbers("asymptotics.radii")) {
      const double a = branch_cut_kernel(symbol, lambda, r);
      const double b = direct_radial_integral(symbol, lambda, r);
      const double rel = std::abs(a - b) / std::abs(b);
      worst = std::max(worst, rel);
      kt.add({lambda, r, a, b, rel});
    }
  }
  s.checks.push_back(check_below("branch-cut vs direct quadrature (relative)", worst, cfg.number("asymptotics.tolerance")));
  s.tables.push_back(std::move(kt));

  const double v = pred.decay_rate;
  Table ft{"asymptotics_decay", {"lambda", "r", "branch_cut"}, {}};
  for (double lambda : cfg.numbers("asymptotics.lambdas")) {
    std::vector<KernelSample> samples;
    for (int i = 0; i <= 40; ++i) {
      const double r = (5.0 + 10.0 * i / 40.0) / v;
      samples.push_back({r, branch_cut_kernel(symbol, lambda, r)});
      ft.add({lambda, r, samples.back().value});
    }
    const auto fit = fit_decay_length(samples, {5.0 / v, 15.0 / v}, asymptotic_power(symbol, lambda));
    s.checks.push_back(check_rel("fitted decay rate, lambda = " + format_number(lambda), 1.0 / fit.length, v,
                                 cfg.number("asymptotics.rate_tolerance")));
  }
  s.tables.push_back(std::move(ft));

  if (kg) {
    const double h = cfg.number("spacing");
    const std::size_t n = cfg.count("sites");
    const double lc = 1.0 / m;
    const auto coarse = diagonalize(build_klein_gordon(m, Lattice::line(static_cast<int>(n), h)));
    const auto fine = diagonalize(build_klein_gordon(m, Lattice::line(static_cast<int>(2 * n), 0.5 * h)));
    const auto rc = lattice_vs_continuum(symbol, -0.5, kernel_profile(coarse, -0.5, 0), 1, {3.0 * lc, 20.0 * lc});
    const auto rf = lattice_vs_continuum(symbol, -0.5, kernel_profile(fine, -0.5, 0), 1, {3.0 * lc, 20.0 * lc});
    s.checks.push_back(check_below("lattice vs continuum decay length deviation", rc.deviation, cfg.number("asymptotics.lattice_tolerance")));
    s.checks.push_back(check_flag("deviation shrinks when the spacing is halved", rf.deviation < rc.deviation));
    s.observations["lattice_deviation_spacing_h"] = rc.deviation;
    s.observations["lattice_deviation_spacing_h/2"] = rf.deviation;
  } else {
    s.observations["lattice_comparison"] = "skipped: custom symbol has no lattice operator";
  }
  return s;
}

inline Section run_experiment(const std::string& name, const ExperimentConfig& cfg) {
  static const std::map<std::string, std::function<Section(const ExperimentConfig&)>> table{
      {"kernel", run_kernel},   {"modes-check", run_modes_check}, {"geometry-check", run_geometry_check},
      {"segal-check", run_segal_check}, {"oracle-verify", run_oracle_verify}, {"localize", run_localize},
      {"elp", run_elp},         {"nw", run_nw},                   {"asymptotics", run_asymptotics}};
  const auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown experiment '" + name + "'");
  return it->second(cfg);
}

/// Run identifier used in output file names.
inline std::string run_id(const std::string& experiment, const ExperimentConfig& cfg) {
  return experiment + "-seed" + std::to_string(cfg.seed());
}

/// Runs one experiment or, for "all", every experiment in order.
/// `on_section` is called after each experiment (for progress output).
inline RunReport run(const std::string& experiment, const ExperimentConfig& cfg,
                     const std::function<void(const Section&)>& on_section = {}) {
  if (!is_experiment(experiment)) throw InvalidArgument("unknown experiment '" + experiment + "'");
  RunReport report{experiment, run_id(experiment, cfg), cfg, {}};
  const std::vector<std::string> names = experiment == "all" ? experiment_names() : std::vector<std::string>{experiment};
  for (const auto& n : names) {
    report.sections.push_back(run_experiment(n, cfg));
    if (on_section) on_section(report.sections.back());
  }
  return report;
}

}  // namespace emergence::lab
