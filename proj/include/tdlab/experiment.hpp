// Experiment runners behind the CLI subcommands: deterministic sweeps over
// seeds and projection windows, assembled into ExperimentReports.
#ifndef TDLAB_EXPERIMENT_HPP
#define TDLAB_EXPERIMENT_HPP

#include <functional>

#include "tdlab/onebody_oracle.hpp"
#include "tdlab/report.hpp"

namespace tdlab {

struct ExperimentContext {
  ConfigMap user;     // unvalidated user overrides
  double budget_seconds = 0.0;
};

namespace experiments {

inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// random Hermitian G at the given cutoff, entries ~ complex Gaussian
inline DensityOperator random_hermitian(int M, std::uint64_t seed) {
  GaussianSource src(seed);
  const int D = 2 * M + 1;
  CMatrix g(D, D);
  for (int i = 0; i < D; ++i) {
    for (int j = i; j < D; ++j) {
      cd z = src.complex_unit_variance();
      if (i == j) {
        g(i, j) = cd(z.real(), 0.0);
      } else {
        g(i, j) = z;
        g(j, i) = std::conj(z);
      }
    }
  }
  return DensityOperator(M, std::move(g));
}

inline DensityOperator hs_normalised(DensityOperator a) {
  double f = a.matrix().frobenius();
  CMatrix g = a.matrix();
  for (cd& v : g.data) v /= f;
  return DensityOperator(a.cutoff(), std::move(g));
}

// random positive trace-one operator of the given rank
inline DensityOperator random_trace_one(int rank, int M, std::uint64_t seed) {
  std::vector<FourierField> vecs = random_orthonormal_system(rank, M, seed);
  GaussianSource src(seed ^ 0xabcdef1234567890ULL);
  std::vector<double> w(static_cast<std::size_t>(rank));
  double total = 0.0;
  for (double& x : w) {
    double g = src.real();
    x = g * g + 0.05;
    total += x;
  }
  for (double& x : w) x /= total;
  return from_rank_one_sum(w, vecs);
}

// the fit window drops the smallest N (transient constants)
inline std::vector<std::pair<double, double>> fit_window(
    const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() > 3) return {pairs.begin() + 1, pairs.end()};
  return pairs;
}

inline double l3_norm_cosine_closed_form(int N, double rel_tol = 1e-6) {
  // time-independent profile: ||rho_bar||_{L3(T^2)} = (2pi)^{1/3} ||.||_{L3(T_x)}
  int K = 8 * (2 * (2 * N) + 1);
  auto pass = [&](int k) {
    double sum = 0.0, comp = 0.0;
    for (int j = 0; j < k; ++j) {
      double x = two_pi * j / k;
      double term = std::pow(std::abs(dirichlet_closed_form(N, x)), 3.0) - comp;
      double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    return std::cbrt(sum / k * two_pi);
  };
  double prev = pass(K);
  for (int level = 0; level < 6; ++level) {
    K *= 2;
    double cur = pass(K);
    if (std::abs(cur - prev) <= rel_tol * cur) return std::cbrt(two_pi) * cur;
    prev = cur;
  }
  throw ConvergenceError("l3_norm_cosine_closed_form: no quadrature convergence", prev, pass(2 * K));
}

// ---- l2-check ------------------------------------------------------------

inline ConfigMap l2_check_defaults() {
  return {{"cutoff", "32"}, {"count", "200"}, {"seed", "1234"}, {"tol", "1e-12"}};
}

inline ExperimentReport run_l2_check(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "l2-check";
  rep.config = cfg;
  const int M = cfg_int(cfg, "cutoff");
  const int count = cfg_int(cfg, "count");
  const double tol = cfg_double(cfg, "tol");
  const std::uint64_t seed = cfg_seed(cfg);

  Table t{"identity", {"index", "l2_exact", "offdiag_l2", "schatten2", "abs_diff"}, {}};
  double max_diff = 0.0, max_excess = -1e300;
  for (int i = 0; i < count; ++i) {
    budget.check("l2-check seed " + std::to_string(i));
    DensityOperator g = random_hermitian(M, seed + static_cast<std::uint64_t>(i));
    double l2 = l2_norm_exact(spacetime_density(g, M, true));
    double off = g.offdiagonal_l2();
    double s2 = schatten_norm(g, 2.0);
    double diff = std::abs(l2 - off);
    max_diff = std::max(max_diff, diff);
    max_excess = std::max(max_excess, l2 - s2);
    t.rows.push_back({static_cast<double>(i), l2, off, s2, diff});
  }
  rep.tables.push_back(std::move(t));
  rep.assertions.push_back(assert_le("l2_equals_offdiagonal_l2", max_diff, tol));
  rep.assertions.push_back(assert_le("l2_below_schatten2", max_excess, tol));
  return rep;
}

// ---- l2-sharpness ----------------------------------------------------------

inline ConfigMap l2_sharpness_defaults() {
  return {{"N_list", "4,8,16,32,64,128,256,512"},
          {"alphas", "2.5,3,inf"},
          {"ratio_tol", "1e-9"},
          {"slope_tol", "0.01"},
          {"seed", "1234"}};
}

inline ExperimentReport run_l2_sharpness(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "l2-sharpness";
  rep.config = cfg;
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const std::vector<double> alphas = cfg_double_list(cfg, "alphas");
  const double ratio_tol = cfg_double(cfg, "ratio_tol");
  const double slope_tol = cfg_double(cfg, "slope_tol");

  Table t{"sharpness", {"N", "l2_norm", "schatten2", "ratio"}, {}};
  std::map<double, std::vector<std::pair<double, double>>> alpha_pairs;
  double max_ratio_dev = 0.0;
  for (int N : n_list) {
    budget.check("l2-sharpness N=" + std::to_string(N));
    DensityOperator g = cosine_family(N, N);
    double l2 = l2_norm_exact(spacetime_density(g, N, true));
    double s2 = schatten_norm(g, 2.0);
    double ratio = l2 / s2;
    max_ratio_dev = std::max(max_ratio_dev, std::abs(ratio - kInvSqrt2));
    t.rows.push_back({static_cast<double>(N), l2, s2, ratio});
    for (double a : alphas) alpha_pairs[a].emplace_back(N, l2 / schatten_norm(g, a));
  }
  rep.tables.push_back(std::move(t));
  rep.assertions.push_back(assert_le("ratio_is_inv_sqrt2", max_ratio_dev, ratio_tol));
  for (double a : alphas) {
    ScalingFit fit = scaling_fit(fit_window(alpha_pairs[a]));
    std::string name = std::isinf(a) ? "ratio_exponent_alpha_inf"
                                     : "ratio_exponent_alpha_" + fmt_double(a);
    rep.fits.push_back(to_fit_row(name, fit, alpha_pairs[a]));
    double target = 0.5 - (std::isinf(a) ? 0.0 : 1.0 / a);
    rep.assertions.push_back(assert_close(name, fit.exponent, target, slope_tol));
  }
  return rep;
}

// ---- l3-necessity ----------------------------------------------------------

inline ConfigMap l3_necessity_defaults() {
  return {{"N_list", "16,32,64,128,256,512,1024"},
          {"window_lo", "0.61"},
          {"window_hi", "0.72"},
          {"quad_tol", "1e-6"},
          {"seed", "1234"}};
}

inline ExperimentReport run_l3_necessity(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "l3-necessity";
  rep.config = cfg;
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const double lo = cfg_double(cfg, "window_lo");
  const double hi = cfg_double(cfg, "window_hi");
  const double quad_tol = cfg_double(cfg, "quad_tol");

  Table t{"l3", {"N", "l3_norm"}, {}};
  std::vector<std::pair<double, double>> pairs;
  for (int N : n_list) {
    budget.check("l3-necessity N=" + std::to_string(N));
    double v = l3_norm_cosine_closed_form(N, quad_tol);
    pairs.emplace_back(N, v);
    t.rows.push_back({static_cast<double>(N), v});
  }
  rep.tables.push_back(std::move(t));
  ScalingFit fit = scaling_fit(fit_window(pairs));
  rep.fits.push_back(to_fit_row("l3_exponent", fit, pairs));
  rep.notes.push_back("fit window drops the smallest N");
  rep.assertions.push_back(assert_in("l3_exponent", fit.exponent, lo, hi));
  return rep;
}

// ---- l4-scaling ------------------------------------------------------------

inline ConfigMap l4_scaling_defaults() {
  return {{"N_list", "8,16,24,32,48,64"}, {"seeds_per_n", "3"},   {"seed", "1234"},
          {"slope_max", "0.30"},          {"agree_tol", "1e-8"},  {"agree_n_max", "64"},
          {"coeff_budget", "20000"}};
}

inline ExperimentReport run_l4_scaling(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "l4-scaling";
  rep.config = cfg;
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const int seeds = cfg_int(cfg, "seeds_per_n");
  const std::uint64_t seed0 = cfg_seed(cfg);
  const double slope_max = cfg_double(cfg, "slope_max");
  const double agree_tol = cfg_double(cfg, "agree_tol");
  const int agree_n_max = cfg_int(cfg, "agree_n_max");
  const std::size_t coeff_budget = static_cast<std::size_t>(cfg_int(cfg, "coeff_budget"));

  struct Point {
    double exact_mean = 0.0;
    double agree_diff = -1.0;
  };
  std::vector<Point> pts(n_list.size());

  parallel_chunks(n_list.size(), static_cast<int>(n_list.size()), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      int N = n_list[idx];
      double acc = 0.0;
      for (int s = 0; s < seeds; ++s) {
        DensityOperator g = hs_normalised(
            random_hermitian(N, seed0 + 1000 * static_cast<std::uint64_t>(idx) + static_cast<std::uint64_t>(s)));
        SpaceTimeDensity rho = spacetime_density(g, N, true);
        double exact = l4_norm_exact(rho, coeff_budget);
        acc += exact;
        if (s == 0 && N <= agree_n_max) {
          double quad = lp_norm_quadrature(rho, 4.0);
          pts[idx].agree_diff = std::abs(quad - exact);
        }
      }
      pts[idx].exact_mean = acc / seeds;
    }
  });
  budget.check("l4-scaling sweep");

  Table t{"l4", {"N", "l4_exact_mean", "quad_agreement_abs_diff"}, {}};
  std::vector<std::pair<double, double>> pairs;
  double max_agree = 0.0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    pairs.emplace_back(n_list[i], pts[i].exact_mean);
    if (pts[i].agree_diff >= 0.0) max_agree = std::max(max_agree, pts[i].agree_diff);
    t.rows.push_back({static_cast<double>(n_list[i]), pts[i].exact_mean,
                      pts[i].agree_diff >= 0.0 ? pts[i].agree_diff : 0.0});
  }
  rep.tables.push_back(std::move(t));
  ScalingFit fit = scaling_fit(fit_window(pairs));
  rep.fits.push_back(to_fit_row("l4_exponent", fit, pairs));
  rep.assertions.push_back(assert_le("l4_exponent", fit.exponent, slope_max));
  rep.assertions.push_back(assert_le("coeff_vs_quadrature", max_agree, agree_tol));
  return rep;
}

// ---- counting --------------------------------------------------------------

inline ConfigMap counting_defaults() {
  return {{"N_list", "4,8,16,32,64"}, {"slope_max", "1.15"}, {"c_max", "8"},
          {"parity_n_max", "32"},     {"seed", "1234"},      {"budget_n", "64"}};
}

inline bool parity_characterisation_holds(int N) {
  SupportSet s = support_set(N);
  std::vector<std::pair<i64, i64>> alt;
  for (i64 k = -2 * N; k <= 2 * N; ++k) {
    if (k == 0) continue;
    for (i64 t = -(2 * N - std::abs(k)); t <= 2 * N - std::abs(k); ++t)
      if (((t - k) % 2 + 2) % 2 == 0) alt.emplace_back(k, k * t);
  }
  std::sort(alt.begin(), alt.end());
  alt.erase(std::unique(alt.begin(), alt.end()), alt.end());
  return alt == s.points;
}

inline ExperimentReport run_counting(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "counting";
  rep.config = cfg;
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const double slope_max = cfg_double(cfg, "slope_max");
  const double c_max = cfg_double(cfg, "c_max");
  const int parity_n_max = cfg_int(cfg, "parity_n_max");
  const int budget_n = cfg_int(cfg, "budget_n");

  Table t{"rmax", {"N", "alpha", "beta", "r", "bound", "ratio"}, {}};
  std::vector<std::pair<double, double>> pairs;
  double worst_ratio = 0.0;
  bool argmax_alpha_even = true;
  for (int N : n_list) {
    budget.check("counting N=" + std::to_string(N));
    CountReport r = r_max(N, budget_n);
    pairs.emplace_back(N, static_cast<double>(r.r_max));
    worst_ratio = std::max(worst_ratio, r.bound_ratio);
    if (r.argmax_alpha % 2 != 0) argmax_alpha_even = false;
    t.rows.push_back({static_cast<double>(N), static_cast<double>(r.argmax_alpha),
                      static_cast<double>(r.argmax_beta), static_cast<double>(r.r_max),
                      r.analytic_bound, r.bound_ratio});
  }
  rep.tables.push_back(std::move(t));
  ScalingFit fit = scaling_fit(pairs);
  rep.fits.push_back(to_fit_row("r_max_slope", fit, pairs));
  rep.assertions.push_back(assert_le("r_max_slope", fit.exponent, slope_max));
  rep.assertions.push_back(assert_le("bound_ratio_c", worst_ratio, c_max));

  bool parity_ok = true;
  for (int N = 1; N <= parity_n_max; ++N) {
    budget.check("counting parity N=" + std::to_string(N));
    if (!parity_characterisation_holds(N)) {
      parity_ok = false;
      break;
    }
  }
  rep.assertions.push_back(assert_ge("parity_characterisation", parity_ok ? 1.0 : 0.0, 1.0));
  rep.notes.push_back(std::string("argmax alpha observed ") +
                      (argmax_alpha_even ? "even at every swept N" : "odd at some N") +
                      " (reported, not asserted)");
  if (fit.exponent > slope_max)
    rep.notes.push_back("r_max grows faster than the asymptotic N^{1+eps} ceiling at desk scale: "
                        "the maximizing shifts sit on high-divisor-count beta, and max d(beta) "
                        "behaves like a genuine power of N in this range; the analytic bound "
                        "N(1+ln N d) still holds with margin (see ratio column)");
  return rep;
}

// ---- support-set -------------------------------------------------------------

inline ConfigMap support_set_defaults() {
  return {{"n_max", "32"}, {"seed", "1234"}};
}

inline ExperimentReport run_support_set(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "support-set";
  rep.config = cfg;
  const int n_max = cfg_int(cfg, "n_max");
  Table t{"support", {"N", "cardinality", "expected", "parity_ok"}, {}};
  bool all_ok = true;
  for (int N = 1; N <= n_max; ++N) {
    budget.check("support-set N=" + std::to_string(N));
    SupportSet s = support_set(N);
    double card = static_cast<double>(s.points.size());
    double expect = static_cast<double>((2 * N + 1)) * (2 * N + 1) - (2 * N + 1);
    bool parity = parity_characterisation_holds(N);
    all_ok = all_ok && parity && card == expect;
    t.rows.push_back({static_cast<double>(N), card, expect, parity ? 1.0 : 0.0});
  }
  rep.tables.push_back(std::move(t));
  rep.assertions.push_back(assert_ge("support_characterisation", all_ok ? 1.0 : 0.0, 1.0));
  return rep;
}

// ---- propagator-check ---------------------------------------------------------

inline ConfigMap propagator_check_defaults() {
  return {{"cutoff", "32"},     {"bandwidth", "8"},    {"steps", "2000"},
          {"fields", "5"},      {"seed", "1234"},      {"iso_tol", "1e-8"},
          {"comp_tol", "1e-7"}, {"inv_tol", "1e-7"},   {"order_min", "1.9"},
          {"duhamel_tol", "1e-5"}, {"gauge_tol", "1e-10"}, {"const_gauge_tol", "1e-12"}};
}

inline ExperimentReport run_propagator_check(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "propagator-check";
  rep.config = cfg;
  PropagatorCheckConfig pc;
  pc.cutoff = cfg_int(cfg, "cutoff");
  pc.bandwidth = cfg_int(cfg, "bandwidth");
  pc.steps = cfg_int(cfg, "steps");
  pc.field_count = cfg_int(cfg, "fields");
  pc.seed = cfg_seed(cfg);

  PotentialField v = PotentialField::from_function(
      [](double t, double x) { return std::cos(t) * std::cos(x); }, two_pi, 129, 64);
  PropagatorCheckReport pr = propagator_check(v, pc);
  budget.check("propagator-check suite");

  // constant-potential gauge phase, exact to roundoff
  double const_gauge = 0.0;
  {
    const double c = 0.7, T = two_pi;
    PotentialField vc = PotentialField::constant(c, T);
    FourierField f = random_field(pc.bandwidth, pc.seed + 99);
    double nrm = f.l2_norm();
    for (cd& z : f.coeffs) z /= nrm;
    FourierField lhs = split_step_evolve(f, vc, 0.0, T, pc.steps);
    FourierField rhs = free_evolve(f, T);
    cd phase = std::polar(1.0, -c * T);
    double s = 0.0;
    for (int n = -f.cutoff; n <= f.cutoff; ++n) s += std::norm(lhs.at(n) - phase * rhs.at(n));
    const_gauge = std::sqrt(s);
  }

  Table t{"checks", {"isometry", "composition", "inverse", "order", "duhamel", "gauge", "const_gauge"}, {}};
  t.rows.push_back({pr.max_isometry_drift, pr.max_composition_residual, pr.max_inverse_residual,
                    pr.observed_order, pr.split_vs_duhamel, pr.gauge_phase_error, const_gauge});
  rep.tables.push_back(std::move(t));
  Table cont{"continuity", {"dt", "increment"}, {}};
  for (auto& [dt, inc] : pr.continuity) cont.rows.push_back({dt, inc});
  rep.tables.push_back(std::move(cont));

  rep.assertions.push_back(assert_le("isometry_drift", pr.max_isometry_drift, cfg_double(cfg, "iso_tol")));
  rep.assertions.push_back(assert_le("composition_residual", pr.max_composition_residual, cfg_double(cfg, "comp_tol")));
  rep.assertions.push_back(assert_le("inverse_residual", pr.max_inverse_residual, cfg_double(cfg, "inv_tol")));
  rep.assertions.push_back(assert_ge("split_step_order", pr.observed_order, cfg_double(cfg, "order_min")));
  rep.assertions.push_back(assert_le("split_vs_duhamel", pr.split_vs_duhamel, cfg_double(cfg, "duhamel_tol")));
  rep.assertions.push_back(assert_le("gauge_covariance", pr.gauge_phase_error, cfg_double(cfg, "gauge_tol")));
  rep.assertions.push_back(assert_le("const_gauge_phase", const_gauge, cfg_double(cfg, "const_gauge_tol")));
  return rep;
}

// ---- nlss ----------------------------------------------------------------------

inline ConfigMap nlss_defaults() {
  return {{"seed", "1234"},        {"cutoff", "8"},        {"bandwidth", "3"},
          {"horizon", "0.5"},      {"mesh_points", "65"},  {"substeps", "8"},
          {"window", "0.25"},      {"picard_tol", "1e-9"}, {"oracle_steps", "4096"},
          {"oracle_grid", "128"},  {"oracle_tol", "1e-6"}, {"drift_tol", "1e-8"},
          {"stationary_n", "6"},   {"stationary_alpha", "2"}, {"stationary_eps", "0.1"},
          {"stationary_horizon", "1.0"}, {"stationary_steps", "1024"}};
}

inline NlssTolerances nlss_tol_from(const ConfigMap& cfg) {
  NlssTolerances tol;
  tol.picard_tol = cfg_double(cfg, "picard_tol");
  tol.mesh_points = cfg_int(cfg, "mesh_points");
  tol.substeps = cfg_int(cfg, "substeps");
  tol.initial_window = cfg_double(cfg, "window");
  return tol;
}

inline ExperimentReport run_nlss(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "nlss";
  rep.config = cfg;
  const std::uint64_t seed = cfg_seed(cfg);
  const double T = cfg_double(cfg, "horizon");
  const double oracle_tol = cfg_double(cfg, "oracle_tol");
  const double drift_tol = cfg_double(cfg, "drift_tol");

  // rank-one trajectory against the independent one-body oracle
  NlssProblem p;
  {
    FourierField u0(cfg_int(cfg, "cutoff"));
    FourierField rnd = random_field(cfg_int(cfg, "bandwidth"), seed);
    for (int n = -rnd.cutoff; n <= rnd.cutoff; ++n) u0.at(n) = rnd.at(n);
    double nrm = u0.l2_norm();
    for (cd& c : u0.coeffs) c /= nrm;
    p.gamma0 = from_rank_one_sum({1.0}, {u0});
    p.sign = +1;
    p.renormalised = false;
    p.horizon = T;
    p.tol = nlss_tol_from(cfg);

    NlssTrajectory traj = solve_fixed_point(p);
    budget.check("nlss fixed point");

    const int mesh_total = static_cast<int>(traj.times.size()) - 1;
    int oracle_steps = cfg_int(cfg, "oracle_steps");
    oracle_steps = (oracle_steps / mesh_total) * mesh_total;  // align record times
    OneBodyDensityTrajectory ob = onebody_cubic_nls_oracle(u0, p.sign, T, oracle_steps,
                                                           oracle_steps / mesh_total,
                                                           cfg_int(cfg, "oracle_grid"));
    budget.check("nlss oracle");

    NlssTrajectory oracle_traj;
    oracle_traj.grid_size = traj.grid_size;
    oracle_traj.times = traj.times;
    TorusGrid g(traj.grid_size);
    for (const FourierField& rho : ob.density) {
      SampledField s = synthesize(rho, g);
      std::vector<double> row(static_cast<std::size_t>(g.size));
      for (int j = 0; j < g.size; ++j) row[static_cast<std::size_t>(j)] = s.values[static_cast<std::size_t>(j)].real();
      oracle_traj.density_rows.push_back(std::move(row));
    }
    double dist = NlssTrajectory::density_distance(traj, oracle_traj);
    rep.assertions.push_back(assert_le("rank_one_vs_onebody_oracle", dist, oracle_tol));
    rep.assertions.push_back(
        assert_le("fixed_point_residual", traj.fixed_point_residual, 10.0 * p.tol.picard_tol));

    ConservationReport cons = conservation_check(
        traj, {1.0, 2.0, std::numeric_limits<double>::infinity()});
    Table ct{"conservation", {"alpha", "max_relative_drift"}, {}};
    double worst = 0.0;
    for (const ConservationRow& r : cons.rows) {
      ct.rows.push_back({r.alpha, r.max_relative_drift});
      worst = std::max(worst, r.max_relative_drift);
    }
    rep.tables.push_back(std::move(ct));
    rep.assertions.push_back(assert_le("schatten_drift", worst, drift_tol));
    rep.assertions.push_back(assert_le("trace_drift", cons.trace_drift, drift_tol));
  }

  // stationary family drift under the coupled integrator
  {
    int N = cfg_int(cfg, "stationary_n");
    DensityOperator gN = stationary_family(N, cfg_double(cfg, "stationary_alpha"),
                                           cfg_double(cfg, "stationary_eps"), N + 2);
    NlssProblem ps;
    ps.gamma0 = gN;
    ps.sign = +1;
    ps.renormalised = false;
    ps.horizon = cfg_double(cfg, "stationary_horizon");
    ps.tol = nlss_tol_from(cfg);
    NlssTrajectory traj = solve_coupled(ps, cfg_int(cfg, "stationary_steps"));
    budget.check("nlss stationary");
    double drift = 0.0;
    const DensityOperator& g0 = traj.snapshots.front();
    for (const DensityOperator& g : traj.snapshots) {
      double s = 0.0;
      for (int m = -g0.cutoff(); m <= g0.cutoff(); ++m)
        for (int n = -g0.cutoff(); n <= g0.cutoff(); ++n)
          s += std::norm(g.entry(m, n) - g0.entry(m, n));
      drift = std::max(drift, std::sqrt(s));
    }
    rep.assertions.push_back(assert_le("stationary_family_drift", drift, drift_tol));
  }
  return rep;
}

// ---- rnlss ---------------------------------------------------------------------

inline ConfigMap rnlss_defaults() {
  return {{"seed", "1234"},   {"cutoff", "8"},       {"rank", "4"},
          {"horizon", "0.5"}, {"mesh_points", "65"}, {"substeps", "8"},
          {"window", "0.25"}, {"picard_tol", "1e-9"}, {"agree_tol", "1e-6"},
          {"coupled_tol", "1e-5"}, {"hs_scale", "0.8"}};
}

inline ExperimentReport run_rnlss(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "rnlss";
  rep.config = cfg;
  const std::uint64_t seed = cfg_seed(cfg);
  const int M = cfg_int(cfg, "cutoff");
  const int rank = cfg_int(cfg, "rank");
  const double T = cfg_double(cfg, "horizon");

  // random rank-R Hermitian, Hilbert-Schmidt norm pinned
  std::vector<FourierField> vecs = random_orthonormal_system(rank, M, seed);
  GaussianSource src(seed ^ 0x5851f42d4c957f2dULL);
  std::vector<double> w(static_cast<std::size_t>(rank));
  double fro = 0.0;
  for (double& x : w) {
    x = src.real();
    fro += x * x;
  }
  double scale = cfg_double(cfg, "hs_scale") / std::sqrt(fro);
  for (double& x : w) x *= scale;
  DensityOperator gamma0 = from_rank_one_sum(w, vecs);

  NlssProblem p;
  p.gamma0 = gamma0;
  p.sign = +1;
  p.horizon = T;
  p.tol = nlss_tol_from(cfg);

  p.renormalised = false;
  NlssTrajectory plain = solve_fixed_point(p);
  budget.check("rnlss plain run");
  p.renormalised = true;
  NlssTrajectory renorm = solve_fixed_point(p);
  budget.check("rnlss renormalised run");

  if (plain.times.size() != renorm.times.size())
    throw std::runtime_error("rnlss: solver meshes diverged between the two runs");
  double snap_dist = 0.0;
  for (std::size_t i = 0; i < plain.times.size(); ++i) {
    const DensityOperator& a = plain.snapshots[i];
    const DensityOperator& b = renorm.snapshots[i];
    double s = 0.0;
    for (int m = -a.cutoff(); m <= a.cutoff(); ++m)
      for (int n = -a.cutoff(); n <= a.cutoff(); ++n) s += std::norm(a.entry(m, n) - b.entry(m, n));
    snap_dist = std::max(snap_dist, std::sqrt(s));
  }
  rep.assertions.push_back(
      assert_le("plain_vs_renormalised_snapshots", snap_dist, cfg_double(cfg, "agree_tol")));

  // coupled-mode cross-check against the fixed point (same mesh)
  {
    int mesh_total = static_cast<int>(plain.times.size()) - 1;
    int steps = mesh_total * p.tol.substeps;
    p.renormalised = false;
    NlssTrajectory coupled = solve_coupled(p, steps);
    budget.check("rnlss coupled run");
    double dist = NlssTrajectory::density_distance(plain, coupled);
    rep.assertions.push_back(assert_le("fixed_point_vs_coupled", dist, cfg_double(cfg, "coupled_tol")));
  }

  Table t{"summary", {"times", "snapshot_distance", "residual_plain", "residual_renorm"}, {}};
  t.rows.push_back({static_cast<double>(plain.times.size()), snap_dist,
                    plain.fixed_point_residual, renorm.fixed_point_residual});
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---- ill-posedness ---------------------------------------------------------------

inline ConfigMap illposed_nlss_defaults() {
  return {{"alpha", "2"},  {"eps", "0.1"}, {"N_list", "8,16,32,64,128,256"},
          {"horizon", "6.283185307179586"}, {"exponent_tol", "0.02"}, {"schatten_tol", "1e-12"},
          {"seed", "1234"}};
}

inline ExperimentReport run_illposed_nlss(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "illposed-nlss";
  rep.config = cfg;
  const double alpha = cfg_double(cfg, "alpha");
  const double eps = cfg_double(cfg, "eps");
  IllposednessDemo demo = illposedness_demo(NlssMode::plain, alpha, cfg_int_list(cfg, "N_list"),
                                            cfg_double(cfg, "horizon"), eps);
  budget.check("illposed-nlss sweep");
  Table t{"family", {"N", "schatten_alpha", "density_l2"}, {}};
  double max_s_dev = 0.0;
  std::vector<std::pair<double, double>> spairs, dpairs;
  for (const IllposednessRow& r : demo.rows) {
    max_s_dev = std::max(max_s_dev, std::abs(r.schatten_alpha - std::pow(r.n, -eps)));
    t.rows.push_back({static_cast<double>(r.n), r.schatten_alpha, r.density_norm});
    spairs.emplace_back(r.n, r.schatten_alpha);
    dpairs.emplace_back(r.n, r.density_norm);
  }
  rep.tables.push_back(std::move(t));
  rep.fits.push_back(to_fit_row("schatten_exponent", demo.schatten_fit, spairs));
  rep.fits.push_back(to_fit_row("density_exponent", demo.density_fit, dpairs));
  rep.assertions.push_back(assert_close("density_norm_exponent", demo.density_fit.exponent,
                                        1.0 - 1.0 / alpha - eps, cfg_double(cfg, "exponent_tol")));
  rep.assertions.push_back(
      assert_le("schatten_norm_exact", max_s_dev, cfg_double(cfg, "schatten_tol")));
  return rep;
}

inline ConfigMap illposed_rnlss_defaults() {
  return {{"alpha", "3"}, {"N_list", "8,16,32,64,128,256"}, {"schatten_tol", "1e-12"},
          {"output_tol", "1e-9"}, {"seed", "1234"}};
}

inline ExperimentReport run_illposed_rnlss(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "illposed-rnlss";
  rep.config = cfg;
  const double alpha = cfg_double(cfg, "alpha");
  IllposednessDemo demo =
      illposedness_demo(NlssMode::renormalised, alpha, cfg_int_list(cfg, "N_list"));
  budget.check("illposed-rnlss sweep");
  Table t{"family", {"N", "schatten_alpha", "renormalised_l2"}, {}};
  double max_s_dev = 0.0, max_out_dev = 0.0;
  std::vector<std::pair<double, double>> spairs;
  for (const IllposednessRow& r : demo.rows) {
    double expected_s = std::pow(r.n, 1.0 / alpha - 0.5);
    max_s_dev = std::max(max_s_dev, std::abs(r.schatten_alpha - expected_s));
    max_out_dev = std::max(max_out_dev, std::abs(r.density_norm - kInvSqrt2));
    t.rows.push_back({static_cast<double>(r.n), r.schatten_alpha, r.density_norm});
    spairs.emplace_back(r.n, r.schatten_alpha);
  }
  rep.tables.push_back(std::move(t));
  rep.fits.push_back(to_fit_row("schatten_exponent", demo.schatten_fit, spairs));
  rep.assertions.push_back(
      assert_le("input_norm_exact", max_s_dev, cfg_double(cfg, "schatten_tol")));
  rep.assertions.push_back(
      assert_le("output_norm_pinned", max_out_dev, cfg_double(cfg, "output_tol")));
  rep.notes.push_back("input Schatten norm vanishes while the output norm stays bounded below: "
                      "the discontinuity witness for any would-be continuous extension");
  return rep;
}

// ---- highdim-necessity --------------------------------------------------------------

inline ConfigMap highdim_defaults() {
  return {{"d_list", "2,3"}, {"N_list", "64,128,256,512,1024"}, {"slope_tol", "0.01"},
          {"alphas", "1.5,2,3"}, {"sigma_tol", "0.02"}, {"seed", "1234"}};
}

inline ExperimentReport run_highdim(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "highdim-necessity";
  rep.config = cfg;
  const std::vector<int> d_list = cfg_int_list(cfg, "d_list");
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const std::vector<double> alphas = cfg_double_list(cfg, "alphas");
  const double slope_tol = cfg_double(cfg, "slope_tol");
  const double sigma_tol = cfg_double(cfg, "sigma_tol");

  for (int d : d_list) {
    budget.check("highdim d=" + std::to_string(d));
    Table t{"family_d" + std::to_string(d), {"N", "cardinality", "lp_norm"}, {}};
    std::vector<std::pair<double, double>> norm_pairs;
    std::map<double, std::vector<std::pair<double, double>>> schatten_vs_card;
    bool cardinality_exact = true;
    for (int N : n_list) {
      HighdimRecord r = highdim_necessity(d, N, 0.0, alphas);
      i64 expect = 1;
      for (int i = 1; i < d; ++i) expect *= 2 * static_cast<i64>(N) + 1;
      cardinality_exact = cardinality_exact && (r.cardinality == expect);
      norm_pairs.emplace_back(N, r.lp_norm);
      for (auto& [a, s] : r.schatten)
        schatten_vs_card[a].emplace_back(static_cast<double>(r.cardinality), s);
      t.rows.push_back({static_cast<double>(N), static_cast<double>(r.cardinality), r.lp_norm});
    }
    rep.tables.push_back(std::move(t));
    rep.assertions.push_back(assert_ge("cardinality_exact_d" + std::to_string(d),
                                       cardinality_exact ? 1.0 : 0.0, 1.0));
    ScalingFit nfit = scaling_fit(fit_window(norm_pairs));
    rep.fits.push_back(to_fit_row("lp_growth_d" + std::to_string(d), nfit, norm_pairs));
    rep.assertions.push_back(assert_close("lp_growth_slope_d" + std::to_string(d), nfit.exponent,
                                          d - 1.0, slope_tol));
    Table ineq{"slope_inequality_d" + std::to_string(d),
               {"alpha", "sigma_required_fit", "sigma_theory", "constraint_margin"}, {}};
    for (double a : alphas) {
      ScalingFit sfit = scaling_fit(schatten_vs_card[a]);  // slope = 1/alpha vs cardinality
      double sigma_fit = nfit.exponent - (d - 1.0) * sfit.exponent;
      double sigma_theory = (d - 1.0) * (1.0 - 1.0 / a);
      // "1/alpha >= 1 - sigma/(d-1)" at sigma = sigma_fit, as a margin
      double margin = 1.0 / a - (1.0 - sigma_fit / (d - 1.0));
      ineq.rows.push_back({a, sigma_fit, sigma_theory, margin});
      rep.assertions.push_back(assert_close(
          "sigma_required_d" + std::to_string(d) + "_alpha_" + fmt_double(a), sigma_fit,
          sigma_theory, sigma_tol));
      rep.assertions.push_back(assert_ge(
          "schatten_constraint_d" + std::to_string(d) + "_alpha_" + fmt_double(a), margin, 0.0,
          sigma_tol));
    }
    rep.tables.push_back(std::move(ineq));
  }
  return rep;
}

// ---- duality-check --------------------------------------------------------------------

inline ConfigMap duality_defaults() {
  return {{"pairs", "100"}, {"cutoff", "16"}, {"v_bandwidth", "12"}, {"seed", "1234"},
          {"tol", "1e-10"}};
}

inline ExperimentReport run_duality(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "duality-check";
  rep.config = cfg;
  const int pairs = cfg_int(cfg, "pairs");
  const int M = cfg_int(cfg, "cutoff");
  const int bv = cfg_int(cfg, "v_bandwidth");
  const std::uint64_t seed = cfg_seed(cfg);
  const double tol = cfg_double(cfg, "tol");

  Table t{"pairs", {"index", "quadrature", "operator_side", "abs_diff"}, {}};
  double worst = 0.0;
  TorusGrid grid = TorusGrid::for_bandwidth(2 * M + bv, 2);
  for (int i = 0; i < pairs; ++i) {
    budget.check("duality pair " + std::to_string(i));
    DensityOperator a = random_hermitian(M, seed + static_cast<std::uint64_t>(2 * i));
    // random real trig polynomial of bandwidth bv
    FourierField vf(bv);
    GaussianSource src(seed + static_cast<std::uint64_t>(2 * i + 1));
    for (int n = 1; n <= bv; ++n) {
      cd z = src.complex_unit_variance();
      vf.at(n) = z;
      vf.at(-n) = std::conj(z);
    }
    vf.at(0) = cd(src.real(), 0.0);
    SampledField v = synthesize(vf, grid);
    for (cd& z : v.values) z = cd(z.real(), 0.0);  // kill roundoff imaginaries

    cd lhs = duality_pairing(a, v);
    cd rhs = duality_pairing_operator_side(a, v);
    double diff = std::abs(lhs - rhs);
    worst = std::max(worst, diff);
    t.rows.push_back({static_cast<double>(i), lhs.real(), rhs.real(), diff});
  }
  rep.tables.push_back(std::move(t));
  rep.assertions.push_back(assert_le("duality_max_abs_diff", worst, tol));
  return rep;
}

// ---- l3-sufficiency ----------------------------------------------------------------------

inline ConfigMap l3_sufficiency_defaults() {
  return {{"N_list", "8,12,16,24,32"}, {"rank", "4"}, {"seeds_per_n", "2"}, {"seed", "1234"},
          {"bound", "0.38333333333333336"}};
}

inline ExperimentReport run_l3_sufficiency(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "l3-sufficiency";
  rep.config = cfg;
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const int rank = cfg_int(cfg, "rank");
  const int seeds = cfg_int(cfg, "seeds_per_n");
  const std::uint64_t seed0 = cfg_seed(cfg);

  std::vector<double> means(n_list.size(), 0.0);
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    int N = n_list[idx];
    double acc = 0.0;
    for (int s = 0; s < seeds; ++s) {
      budget.check("l3-sufficiency N=" + std::to_string(N));
      DensityOperator g = random_trace_one(
          rank, N, seed0 + 100 * static_cast<std::uint64_t>(idx) + static_cast<std::uint64_t>(s));
      SpaceTimeDensity rho = spacetime_density(g, N, false);
      acc += lp_norm_quadrature(rho, 3.0);
    }
    means[idx] = acc / seeds;
  }

  Table t{"l3", {"N", "l3_norm_mean"}, {}};
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    pairs.emplace_back(n_list[i], means[i]);
    t.rows.push_back({static_cast<double>(n_list[i]), means[i]});
  }
  rep.tables.push_back(std::move(t));
  ScalingFit fit = scaling_fit(fit_window(pairs));
  rep.fits.push_back(to_fit_row("l3_exponent", fit, pairs));
  rep.assertions.push_back(assert_le("l3_exponent", fit.exponent, cfg_double(cfg, "bound")));
  return rep;
}

// ---- conjecture-probe ----------------------------------------------------------------------

inline ConfigMap conjecture_probe_defaults() {
  return {{"alpha_list", "1.5,1.6,1.75,1.9"}, {"N_list", "16,32,64,128,256,512,1024"},
          {"quad_tol", "1e-6"}, {"seed", "1234"}};
}

inline ExperimentReport run_conjecture_probe(const ConfigMap& cfg, const BudgetGuard& budget) {
  ExperimentReport rep;
  rep.experiment = "conjecture-probe";
  rep.config = cfg;
  const std::vector<double> alphas = cfg_double_list(cfg, "alpha_list");
  const std::vector<int> n_list = cfg_int_list(cfg, "N_list");
  const double quad_tol = cfg_double(cfg, "quad_tol");

  std::vector<double> l3(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    budget.check("conjecture-probe N=" + std::to_string(n_list[i]));
    l3[i] = l3_norm_cosine_closed_form(n_list[i], quad_tol);
  }
  Table t{"probe", {"alpha", "fitted_exponent", "conjectured_bound", "excess"}, {}};
  for (double a : alphas) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < n_list.size(); ++i)
      pairs.emplace_back(n_list[i], l3[i] / std::pow(static_cast<double>(n_list[i]), 1.0 / a));
    ScalingFit fit = scaling_fit(fit_window(pairs));
    double bound = 2.0 / 3.0 - 1.0 / a;
    t.rows.push_back({a, fit.exponent, bound, fit.exponent - bound});
    rep.fits.push_back(to_fit_row("sigma_hat_alpha_" + fmt_double(a), fit, pairs));
  }
  rep.tables.push_back(std::move(t));
  rep.notes.push_back("conjecture probe: data reported without pass/fail adjudication");
  return rep;
}

}  // namespace experiments

// ---- density comparison harness -------------------------------------------

enum class DensityFamily { diagonal, cosine, random_hermitian_hs };

inline const char* family_name(DensityFamily f) {
  switch (f) {
    case DensityFamily::diagonal: return "diagonal";
    case DensityFamily::cosine: return "cosine";
    case DensityFamily::random_hermitian_hs: return "random-hs";
  }
  return "?";
}

// Side-by-side table of plain and renormalised density norms against the
// Schatten norm: the renormalisation gain is the plain norm growing while
// the renormalised one stays proportional to (or below) the Schatten norm.
inline ExperimentReport compare_densities(DensityFamily family, const std::vector<int>& n_list,
                                          double alpha, double p, std::uint64_t seed = 1234) {
  ExperimentReport rep;
  rep.experiment = std::string("compare-densities-") + family_name(family);
  rep.config = {{"alpha", fmt_double(alpha)},
                {"p", fmt_double(p)},
                {"seed", std::to_string(seed)},
                {"family", family_name(family)}};

  Table t{"comparison", {"N", "rho_norm", "rho_bar_norm", "schatten_alpha", "bar_over_schatten"}, {}};
  std::vector<std::pair<double, double>> plain_pairs, renorm_pairs;
  for (int N : n_list) {
    DensityOperator g;
    switch (family) {
      case DensityFamily::diagonal: {
        std::vector<double> w(static_cast<std::size_t>(N), 1.0);
        std::vector<FourierField> vecs;
        for (int n = 1; n <= N; ++n) vecs.push_back(basis_e(n, N));
        g = from_rank_one_sum(w, vecs);
        break;
      }
      case DensityFamily::cosine:
        g = cosine_family(N, N);
        break;
      case DensityFamily::random_hermitian_hs:
        g = experiments::hs_normalised(
            experiments::random_hermitian(N, seed + static_cast<std::uint64_t>(N)));
        break;
    }
    double plain = lp_norm_quadrature(spacetime_density(g, N, false), p);
    SpaceTimeDensity bar = spacetime_density(g, N, true);
    double renorm = (p == 2.0) ? l2_norm_exact(bar) : lp_norm_quadrature(bar, p);
    double s = schatten_norm(g, alpha);
    t.rows.push_back({static_cast<double>(N), plain, renorm, s, renorm / s});
    plain_pairs.emplace_back(N, std::max(plain, 1e-300));
    renorm_pairs.emplace_back(N, std::max(renorm, 1e-300));
  }
  rep.tables.push_back(std::move(t));
  rep.fits.push_back(
      to_fit_row("rho_exponent", scaling_fit(experiments::fit_window(plain_pairs)), plain_pairs));
  if (renorm_pairs.back().second > 1e-250)
    rep.fits.push_back(to_fit_row("rho_bar_exponent",
                                  scaling_fit(experiments::fit_window(renorm_pairs)), renorm_pairs));
  return rep;
}

// ---- registry -------------------------------------------------------------

struct ExperimentEntry {
  std::string name;
  ConfigMap (*defaults)();
  ExperimentReport (*run)(const ConfigMap&, const BudgetGuard&);
};

inline const std::vector<ExperimentEntry>& experiment_registry() {
  static const std::vector<ExperimentEntry> reg = {
      {"l2-check", experiments::l2_check_defaults, experiments::run_l2_check},
      {"l2-sharpness", experiments::l2_sharpness_defaults, experiments::run_l2_sharpness},
      {"l3-necessity", experiments::l3_necessity_defaults, experiments::run_l3_necessity},
      {"l3-sufficiency", experiments::l3_sufficiency_defaults, experiments::run_l3_sufficiency},
      {"l4-scaling", experiments::l4_scaling_defaults, experiments::run_l4_scaling},
      {"counting", experiments::counting_defaults, experiments::run_counting},
      {"support-set", experiments::support_set_defaults, experiments::run_support_set},
      {"propagator-check", experiments::propagator_check_defaults, experiments::run_propagator_check},
      {"nlss", experiments::nlss_defaults, experiments::run_nlss},
      {"rnlss", experiments::rnlss_defaults, experiments::run_rnlss},
      {"illposed-nlss", experiments::illposed_nlss_defaults, experiments::run_illposed_nlss},
      {"illposed-rnlss", experiments::illposed_rnlss_defaults, experiments::run_illposed_rnlss},
      {"highdim-necessity", experiments::highdim_defaults, experiments::run_highdim},
      {"duality-check", experiments::duality_defaults, experiments::run_duality},
      {"conjecture-probe", experiments::conjecture_probe_defaults, experiments::run_conjecture_probe},
  };
  return reg;
}

inline const ExperimentEntry* find_experiment(const std::string& name) {
  for (const ExperimentEntry& e : experiment_registry())
    if (e.name == name) return &e;
  return nullptr;
}

// Executes the mapped pipeline: merge config, run, stamp timing.
inline ExperimentReport run_experiment(const std::string& name, const ConfigMap& user,
                                       double budget_seconds = 0.0) {
  const ExperimentEntry* e = find_experiment(name);
  if (!e) throw ConfigError("unknown subcommand: " + name);
  ConfigMap cfg = merge_config(e->defaults(), user);
  BudgetGuard guard;
  guard.limit_seconds = budget_seconds;
  ExperimentReport rep = e->run(cfg, guard);
  rep.wall_seconds = guard.elapsed();
  return rep;
}

}  // namespace tdlab

#endif
