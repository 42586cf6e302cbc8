#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polytrope/approximations.hpp"
#include "polytrope/invariants.hpp"
#include "polytrope/lane_emden.hpp"
#include "polytrope/noether.hpp"
#include "polytrope/output.hpp"
#include "polytrope/stellar.hpp"

namespace polytrope::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CommonOptions {
  double tol = 1e-10;
  std::string format = "csv";
  std::string out;
  int digits = 12;
  std::string constants;
};

void add_common(CLI::App* cmd, CommonOptions& o, double default_tol) {
  o.tol = default_tol;
  cmd->add_option("--tol", o.tol, "integration tolerance")->capture_default_str();
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output file (default stdout)");
  cmd->add_option("--digits", o.digits, "significant digits in CSV")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();
  cmd->add_option("--constants", o.constants,
                  "key=value constants file (default $POLYTROPE_CONSTANTS)");
}

PhysicalConstants constants_for(const CommonOptions& o) {
  return o.constants.empty() ? constants_from_environment() : load_constants(o.constants);
}

struct Grid {
  double lo;
  double hi;
  std::size_t count;

  std::vector<double> points() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = i + 1 == count ? hi
                            : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
  }
};

// a:b or a:b:count
std::optional<Grid> parse_grid(const std::string& s, std::size_t default_count) {
  if (s.empty()) return std::nullopt;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 3) throw DomainError("grid must be a:b or a:b:count");
  auto num = [&](const std::string& p) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(p, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != p.size()) throw DomainError("bad grid value '" + p + "'");
    return v;
  };
  Grid g{num(parts[0]), num(parts[1]), default_count};
  if (parts.size() == 3) {
    const double c = num(parts[2]);
    if (!(c >= 2.0) || c != std::floor(c)) throw DomainError("grid count must be an integer >= 2");
    g.count = static_cast<std::size_t>(c);
  }
  if (!(g.lo >= 0.0 && g.hi > g.lo)) throw DomainError("grid needs 0 <= a < b");
  return g;
}

void emit(const OutputRecord& rec, const CommonOptions& o, std::ostream& out) {
  auto write = [&](std::ostream& os) {
    if (o.format == "json") {
      write_json(os, rec);
    } else {
      write_csv(os, rec, o.digits);
    }
  };
  if (o.out.empty()) {
    write(out);
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw DomainError("cannot open '" + o.out + "' for writing");
  write(f);
}

void common_metadata(OutputRecord& rec, const CommonOptions& o) {
  rec.meta("tol", o.tol);
}

// Integration range that covers a grid; n = 5 needs an explicit end.
EmdenSolution solve_for(const PolytropicIndex& index, double tol, const std::optional<Grid>& grid,
                        double n5_default) {
  const double xi_max = grid ? std::max(grid->hi, 1e-2) : n5_default;
  return integrate_emden(index, tol, xi_max);
}

Grid default_grid(const EmdenSolution& sol, std::size_t count, double n5_end) {
  return {0.0, sol.has_surface() ? *sol.xi1() : n5_end, count};
}

void check_grid_inside(const EmdenSolution& sol, const Grid& g) {
  if (sol.has_surface() && g.hi > *sol.xi1() * (1.0 + 1e-12)) {
    throw DomainError("grid extends beyond the surface xi1 = " + format_number(*sol.xi1(), 12));
  }
}

// ---------------------------------------------------------------- solve

int cmd_solve(double n, const CommonOptions& o, const std::string& grid_s, std::ostream& out) {
  const PolytropicIndex index(n);
  const auto grid = parse_grid(grid_s, 201);
  const auto sol = solve_for(index, o.tol, grid, 20.0);
  const Grid g = grid ? *grid : default_grid(sol, 201, 20.0);
  check_grid_inside(sol, g);

  const double mass = sol.has_surface()
                          ? -std::pow(*sol.xi1(), 2) * sol.dtheta(*sol.xi1())
                          : std::sqrt(3.0);
  OutputRecord rec;
  rec.command = "solve";
  rec.meta("n", n);
  common_metadata(rec, o);
  rec.meta("xi1", sol.has_surface() ? *sol.xi1() : kInf);

  std::vector<double> xi, th, dth, u, v, w, z, om, rho, mf, rf;
  for (double x : g.points()) {
    const bool surface = sol.has_surface() && x >= *sol.xi1();
    if (surface) x = *sol.xi1();
    const auto t = sol.evaluate(x);
    xi.push_back(x);
    th.push_back(surface ? 0.0 : t.theta);
    dth.push_back(t.dtheta);
    if (surface) {
      u.push_back(0.0);
      v.push_back(kInf);
      w.push_back(index.is_zero() ? 0.0 : kInf);
      z.push_back(3.0);
      om.push_back(index.omega_defined() ? omega_from_slope(sol, x) : kNaN);
      rho.push_back(index.is_zero() ? 1.0 : 0.0);
    } else {
      const auto h = invariants_at(sol, x);
      u.push_back(h.u);
      v.push_back(h.v);
      w.push_back(h.w);
      z.push_back(h.z);
      om.push_back(h.omega.value_or(kNaN));
      rho.push_back(detail::density_power(t.theta, n));
    }
    mf.push_back(x == 0.0 ? 0.0 : -x * x * t.dtheta / mass);
    rf.push_back(sol.has_surface() ? x / *sol.xi1() : 0.0);
  }
  rec.add_column("xi", xi);
  rec.add_column("theta", th);
  rec.add_column("dtheta", dth);
  rec.add_column("u", u);
  rec.add_column("v", v);
  rec.add_column("w", w);
  rec.add_column("z", z);
  if (index.omega_defined()) rec.add_column("omega", om);
  rec.add_column("rho_over_rho_c", rho);
  rec.add_column("m_over_M", mf);
  rec.add_column("r_over_R", rf);
  emit(rec, o, out);
  return kExitOk;
}

// ---------------------------------------------------------------- table1

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(p, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != p.size()) throw DomainError("bad list value '" + p + "'");
    v.push_back(x);
  }
  if (v.empty()) throw DomainError("empty list");
  return v;
}

int cmd_table1(const std::string& list, const CommonOptions& o, std::ostream& out) {
  const auto ns = parse_list(list);
  OutputRecord rec;
  rec.command = "table1";
  common_metadata(rec, o);
  std::vector<Cell> n_col, wt, xi1, ratio, om, rc, mc, expo;
  for (double n : ns) {
    const PolytropicIndex index(n);
    const auto sol = integrate_emden(index, o.tol, 200.0);
    const auto dc = derived_constants(sol);
    n_col.emplace_back(n);
    wt.emplace_back(index.omega_tilde());
    xi1.emplace_back(dc.xi1);
    ratio.emplace_back(dc.rho_ratio);
    if (dc.omega0) {
      om.emplace_back(*dc.omega0);
    } else {
      om.emplace_back(std::string("..."));
    }
    rc.emplace_back(dc.r_core_frac);
    mc.emplace_back(dc.m_core_frac);
    const auto e = mass_radius_exponent(index);
    expo.emplace_back(e ? *e : (index.is_three() ? kInf : kNaN));
  }
  rec.add_column("n").values = n_col;
  rec.add_column("omega_tilde").values = wt;
  rec.add_column("xi1").values = xi1;
  rec.add_column("rho_c_over_rho_mean").values = ratio;
  rec.add_column("omega0").values = om;
  rec.add_column("r_core_over_R").values = rc;
  rec.add_column("m_core_over_M").values = mc;
  rec.add_column("radius_mass_exponent").values = expo;
  emit(rec, o, out);
  return kExitOk;
}

// ---------------------------------------------------------------- approx

int cmd_approx(double n, const std::string& kinds_s, const std::string& grid_s,
               const CommonOptions& o, std::ostream& out) {
  const PolytropicIndex index(n);
  std::vector<ApproximantKind> kinds;
  if (kinds_s == "all") {
    kinds = ApproximantKind::all_for(index);
  } else {
    std::stringstream ss(kinds_s);
    for (std::string p; std::getline(ss, p, ',');) kinds.push_back(ApproximantKind::parse(p));
  }
  for (const auto& k : kinds) validate(k, index);
  const auto grid = parse_grid(grid_s, 141);
  const auto sol = solve_for(index, o.tol, grid, 20.0);
  const Grid g = grid ? *grid : Grid{0.0, sol.has_surface() ? *sol.xi1() : 20.0, 141};
  std::vector<double> pts = g.points();
  if (!sol.has_surface() && g.hi > sol.xi_end()) throw DomainError("grid beyond the integrated range");

  const auto rep = approx_error_report(sol, kinds, pts);
  OutputRecord rec;
  rec.command = "approx";
  rec.meta("n", n);
  common_metadata(rec, o);
  for (const auto& k : kinds) {
    if (k.family == ApproximantKind::Family::pade3) rec.meta("pade_zero", pade3_zero());
  }
  rec.add_column("xi", rep.xi);
  rec.add_column("theta", rep.theta);
  for (const auto& c : rep.columns) {
    rec.add_column(c.kind.name(), c.value);
    rec.add_column(c.kind.name() + "_error", c.error);
  }
  if (rep.picard_overestimates) rec.add_column("picard_overestimates", *rep.picard_overestimates);
  emit(rec, o, out);
  return kExitOk;
}

// ---------------------------------------------------------------- noether

int cmd_noether(double n, const std::string& grid_s, const CommonOptions& o, std::ostream& out) {
  const PolytropicIndex index(n);
  if (!index.omega_defined()) throw DomainError("omega undefined for n=1");
  const auto grid = parse_grid(grid_s, 201);
  const auto sol = solve_for(index, o.tol, grid, 20.0);
  const Grid g = grid ? *grid : default_grid(sol, 201, 20.0);
  check_grid_inside(sol, g);
  const auto d = nonconservation_residual(sol, g.points());

  OutputRecord rec;
  rec.command = "noether";
  rec.meta("n", n);
  common_metadata(rec, o);
  rec.meta("max_residual", d.max_residual);
  rec.meta("max_integral_residual", d.max_integral_residual);
  if (index.is_five()) {
    const auto c = g5_conservation_check(sol, g.points());
    rec.meta("max_abs_g", c.max_abs_g);
    rec.meta("max_abs_invariant", c.max_abs_invariant);
  }
  rec.add_column("xi", d.xi);
  rec.add_column("g", d.g);
  rec.add_column("dg_numeric", d.dg_numeric);
  rec.add_column("dg_analytic", d.dg_analytic);
  rec.add_column("rhs", d.rhs);
  rec.add_column("residual", d.residual);
  rec.add_column("rhs_integral", d.rhs_integral);
  rec.add_column("integral_residual", d.integral_residual);
  rec.add_column("internal", d.internal);
  rec.add_column("gravitational", d.gravitational);
  emit(rec, o, out);
  return kExitOk;
}

// ---------------------------------------------------------------- astro

int cmd_chandrasekhar(double mu_e, const CommonOptions& o, std::ostream& out) {
  const auto k = constants_for(o);
  const auto ch = chandrasekhar_mass(mu_e, k, o.tol);
  OutputRecord rec;
  rec.command = "astro chandrasekhar";
  common_metadata(rec, o);
  rec.add_column("mu_e", std::vector<double>{mu_e});
  rec.add_column("K_WD", std::vector<double>{ch.K_WD});
  rec.add_column("mass_kg", std::vector<double>{ch.mass});
  rec.add_column("mass_msun", std::vector<double>{ch.mass / k.M_sun});
  rec.add_column("closed_form_msun", std::vector<double>{ch.closed_form / k.M_sun});
  emit(rec, o, out);
  return kExitOk;
}

int cmd_eddington(const std::vector<double>& masses, double mu, std::optional<double> kappa,
                  const CommonOptions& o, std::ostream& out) {
  const auto k = constants_for(o);
  OutputRecord rec;
  rec.command = "astro eddington";
  common_metadata(rec, o);
  rec.meta("mu", mu);
  if (kappa) rec.meta("kappa_p", *kappa);
  rec.meta("M_star_msun", eddington_mass_constant(k, o.tol) / k.M_sun);
  std::vector<double> m, beta, km, lf, ledd, l, lcal;
  for (double M : masses) {
    const auto e = eddington_beta(M * k.M_sun, mu, k, o.tol);
    m.push_back(M);
    beta.push_back(e.beta);
    km.push_back(e.K_M);
    lf.push_back(e.L_frac);
    if (kappa) {
      const auto lum = luminosity(e, *kappa, k);
      ledd.push_back(lum.L_edd);
      l.push_back(lum.L);
      lcal.push_back(lum.L_calibrated);
    }
  }
  rec.add_column("M_msun", m);
  rec.add_column("beta", beta);
  rec.add_column("K_M", km);
  rec.add_column("L_over_L_edd", lf);
  if (kappa) {
    rec.add_column("L_edd", ledd);
    rec.add_column("L", l);
    rec.add_column("L_calibrated", lcal);
  }
  emit(rec, o, out);
  return kExitOk;
}

int cmd_entropy(double n, double T, double rho, double mu, const CommonOptions& o,
                std::ostream& out) {
  const auto k = constants_for(o);
  const auto s = entropy_structure(PolytropicIndex(n), T, rho, mu, k);
  OutputRecord rec;
  rec.command = "astro entropy";
  common_metadata(rec, o);
  rec.meta("n", n);
  rec.meta("T", T);
  rec.meta("rho", rho);
  rec.meta("mu", mu);
  rec.add_column("P_rad_over_P_gas", std::vector<double>{s.pressure_ratio});
  rec.add_column("S_rad", std::vector<double>{s.s_rad});
  rec.add_column("S_gas", std::vector<double>{s.s_gas});
  rec.add_column("dS_gas_dlogP", std::vector<double>{s.ds_gas_dlogp});
  rec.add_column("nabla", std::vector<double>{s.nabla});
  rec.add_column("nabla_ad", std::vector<double>{kAdiabaticGradient});
  emit(rec, o, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polytropes: Emden functions, homology invariants and stellar models", "polytrope"};
  app.require_subcommand(1);

  std::function<int()> action;

  CommonOptions solve_o;
  double solve_n = 0.0;
  std::string solve_grid;
  auto* solve = app.add_subcommand("solve", "Emden function and invariant profiles");
  solve->add_option("--n", solve_n, "polytropic index")->required();
  solve->add_option("--grid", solve_grid, "xi range a:b[:count]");
  add_common(solve, solve_o, 1e-10);
  solve->callback([&] { action = [&] { return cmd_solve(solve_n, solve_o, solve_grid, out); }; });

  CommonOptions t1_o;
  std::string t1_list = "0,1,1.5,2,3,4,4.5,5";
  auto* t1 = app.add_subcommand("table1", "surface and core constants per index");
  t1->add_option("--n-list", t1_list, "comma-separated indices")->capture_default_str();
  add_common(t1, t1_o, 1e-12);
  t1->callback([&] { action = [&] { return cmd_table1(t1_list, t1_o, out); }; });

  CommonOptions ap_o;
  double ap_n = 3.0;
  std::string ap_kinds = "all", ap_grid;
  auto* ap = app.add_subcommand("approx", "closed-form approximants and their errors");
  ap->add_option("--n", ap_n, "polytropic index")->required();
  ap->add_option("--kinds", ap_kinds, "all or a list of taylorK, picard, pade")
      ->capture_default_str();
  ap->add_option("--grid", ap_grid, "xi range a:b[:count]");
  add_common(ap, ap_o, 1e-10);
  ap->callback([&] { action = [&] { return cmd_approx(ap_n, ap_kinds, ap_grid, ap_o, out); }; });

  CommonOptions no_o;
  double no_n = 3.0;
  std::string no_grid;
  auto* no = app.add_subcommand("noether", "scaling charge and its non-conservation law");
  no->add_option("--n", no_n, "polytropic index")->required();
  no->add_option("--grid", no_grid, "xi range a:b[:count]");
  add_common(no, no_o, 1e-10);
  no->callback([&] { action = [&] { return cmd_noether(no_n, no_grid, no_o, out); }; });

  auto* astro = app.add_subcommand("astro", "n = 3 stellar applications");
  astro->require_subcommand(1);

  CommonOptions ch_o;
  double mu_e = 2.0;
  auto* ch = astro->add_subcommand("chandrasekhar", "white dwarf limiting mass");
  ch->add_option("--mu-e", mu_e, "electrons per nucleon mass unit")->capture_default_str();
  add_common(ch, ch_o, 1e-12);
  ch->callback([&] { action = [&] { return cmd_chandrasekhar(mu_e, ch_o, out); }; });

  CommonOptions ed_o;
  std::vector<double> ed_mass;
  double ed_mu = 0.61;
  std::optional<double> ed_kappa;
  auto* ed = astro->add_subcommand("eddington", "Eddington standard model");
  ed->add_option("--mass", ed_mass, "stellar mass in solar masses (comma list)")
      ->required()
      ->delimiter(',');
  ed->add_option("--mu", ed_mu, "mean molecular weight")->capture_default_str();
  ed->add_option("--kappa", ed_kappa, "photospheric opacity, m^2/kg");
  add_common(ed, ed_o, 1e-12);
  ed->callback([&] { action = [&] { return cmd_eddington(ed_mass, ed_mu, ed_kappa, ed_o, out); }; });

  CommonOptions en_o;
  double en_n = 3.0, en_T = 1.5e7, en_rho = 1.5e5, en_mu = 0.61;
  auto* en = astro->add_subcommand("entropy", "radiation and gas entropy of a polytrope");
  en->add_option("--n", en_n, "polytropic index")->capture_default_str();
  en->add_option("--T", en_T, "temperature, K")->capture_default_str();
  en->add_option("--rho", en_rho, "density, kg/m^3")->capture_default_str();
  en->add_option("--mu", en_mu, "mean molecular weight")->capture_default_str();
  add_common(en, en_o, 1e-12);
  en->callback([&] { action = [&] { return cmd_entropy(en_n, en_T, en_rho, en_mu, en_o, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace polytrope::cli
