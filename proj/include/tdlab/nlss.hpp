// Solvers for the cubic NLS system in density-operator form,
//   i d/dt gamma = [-Delta +- rho_gamma, gamma]        (plain)
//   i d/dt gamma = [-Delta +- rho_bar_gamma, gamma]    (renormalised)
// via the density fixed point Gamma[rho] = rho(U_{+-rho} gamma0 U*_{+-rho})
// with Picard iteration on adaptive windows, and via a direct coupled-mode
// split-step integrator; plus the stationary/ill-posedness families.
#ifndef TDLAB_NLSS_HPP
#define TDLAB_NLSS_HPP

#include "tdlab/operators.hpp"
#include "tdlab/propagator.hpp"
#include "tdlab/strichartz.hpp"

namespace tdlab {

struct NlssTolerances {
  double picard_tol = 1e-9;
  int max_picard = 50;
  double min_window = two_pi / 4096.0;
  double initial_window = 0.25;
  int mesh_points = 33;  // time levels per window, endpoints included
  int substeps = 8;      // split steps per mesh interval
  double rank_tol = 1e-12;
};

struct NlssProblem {
  DensityOperator gamma0;
  int sign = +1;             // +1 defocusing, -1 focusing
  bool renormalised = false;
  double horizon = 0.5;
  int solver_cutoff = 0;     // 0: gamma0.cutoff() + 16 buffer modes
  NlssTolerances tol;
};

struct NlssWindowLog {
  double from = 0.0, to = 0.0;
  int iterations = 0;
  std::vector<double> diffs;  // successive L2_{t,x} Picard differences
  bool converged = false;
};

struct NlssTrajectory {
  std::vector<double> times;
  std::vector<DensityOperator> snapshots;        // at `times`
  int grid_size = 0;                             // x grid of the density rows
  std::vector<std::vector<double>> density_rows; // self-consistent rho at `times`
  std::vector<NlssWindowLog> windows;
  double fixed_point_residual = 0.0;             // ||rho - Gamma[rho]||_{L2_{t,x}}
  double trace0 = 0.0;
  int solver_cutoff = 0;

  // L2_{t,x} distance between two trajectories' density rows on the shared mesh
  static double density_distance(const NlssTrajectory& a, const NlssTrajectory& b) {
    if (a.times.size() != b.times.size() || a.grid_size != b.grid_size)
      throw std::invalid_argument("density_distance: incompatible trajectories");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
      double wt = 0.0;
      if (i > 0) wt += 0.5 * (a.times[i] - a.times[i - 1]);
      if (i + 1 < a.times.size()) wt += 0.5 * (a.times[i + 1] - a.times[i]);
      double row = 0.0;
      for (int j = 0; j < a.grid_size; ++j) {
        double d = a.density_rows[i][static_cast<std::size_t>(j)] -
                   b.density_rows[i][static_cast<std::size_t>(j)];
        row += d * d;
      }
      acc += wt * row * (two_pi / a.grid_size);
    }
    return std::sqrt(acc);
  }
};

namespace detail {

struct ModeSystem {
  std::vector<double> weights;        // eigenvalues of gamma0 (signed)
  std::vector<std::vector<cd>> state; // samples on the working grid
  int cutoff = 0;
  int grid = 0;

  FourierField field(std::size_t j) const { return samples_to_field(state[j], cutoff); }

  DensityOperator snapshot() const {
    const int M = cutoff;
    CMatrix g(2 * M + 1, 2 * M + 1);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      FourierField f = field(j);
      for (int m = -M; m <= M; ++m) {
        cd fm = f.at(m);
        if (fm == cd(0.0, 0.0)) continue;
        for (int n = -M; n <= M; ++n) g(m + M, n + M) += weights[j] * fm * std::conj(f.at(n));
      }
    }
    return DensityOperator(M, std::move(g));
  }

  void density_row(std::vector<double>& out, double subtract_constant) const {
    out.assign(static_cast<std::size_t>(grid), -subtract_constant);
    for (std::size_t j = 0; j < weights.size(); ++j)
      for (int ix = 0; ix < grid; ++ix)
        out[static_cast<std::size_t>(ix)] += weights[j] * std::norm(state[j][static_cast<std::size_t>(ix)]);
  }
};

inline ModeSystem decompose(const DensityOperator& gamma0, int solver_cutoff, double rank_tol,
                            int grid) {
  if (!gamma0.hermitian()) throw std::invalid_argument("nlss: gamma0 must be Hermitian");
  const SpectralData& sd = hermitian_eig(gamma0);
  double top = sd.singular_values.empty() ? 0.0 : sd.singular_values.front();
  ModeSystem sys;
  sys.cutoff = solver_cutoff;
  sys.grid = grid;
  for (std::size_t j = 0; j < sd.singular_values.size(); ++j) {
    if (sd.singular_values[j] <= rank_tol * std::max(1.0, top)) break;
    FourierField embedded(solver_cutoff);
    const FourierField& v = sd.left[j];
    for (int n = -v.cutoff; n <= v.cutoff; ++n) embedded.at(n) = v.at(n);
    sys.weights.push_back(sd.eigenvalues[j]);
    sys.state.push_back(field_to_samples(embedded, grid));
  }
  if (sys.weights.empty()) {  // zero operator: keep a null mode for bookkeeping
    sys.weights.push_back(0.0);
    sys.state.push_back(std::vector<cd>(static_cast<std::size_t>(grid), cd(0.0, 0.0)));
  }
  return sys;
}

}  // namespace detail

// Picard fixed point per window: iterate rho <- (rho or rho_bar)(U_{+-rho}
// gamma U*_{+-rho}), eigenvectors propagated through the split-step
// propagator on one fixed grid per window, starting from the free-evolution
// density; the window is halved on non-contraction and windows concatenate
// to reach the horizon.
inline NlssTrajectory solve_fixed_point(const NlssProblem& p) {
  const NlssTolerances& tol = p.tol;
  const int M = p.solver_cutoff > 0 ? p.solver_cutoff : p.gamma0.cutoff() + 16;
  const int kw = detail::next_pow2(4 * (2 * M + 1));
  detail::ModeSystem sys = detail::decompose(p.gamma0, M, tol.rank_tol, kw);
  const double trace0 = p.gamma0.trace().real();
  const double subtract = p.renormalised ? trace0 / two_pi : 0.0;

  NlssTrajectory traj;
  traj.grid_size = kw;
  traj.trace0 = trace0;
  traj.solver_cutoff = M;

  const int J = tol.mesh_points - 1;  // intervals per window
  if (J < 1) throw std::invalid_argument("nlss: need at least two mesh points per window");

  double cur = 0.0;
  double window = std::min(tol.initial_window, p.horizon);

  // record t = 0
  traj.times.push_back(0.0);
  traj.snapshots.push_back(sys.snapshot());
  {
    std::vector<double> row;
    sys.density_row(row, subtract);
    traj.density_rows.push_back(std::move(row));
  }

  auto propagate_rows = [&](const detail::ModeSystem& start, const PotentialField& v, double w,
                            std::vector<std::vector<std::vector<cd>>>& per_mode_rows,
                            detail::ModeSystem& end) {
    // evolve every eigenvector over [0, w] under v, recording mesh rows
    per_mode_rows.assign(start.weights.size(), {});
    end = start;
    for (std::size_t j = 0; j < start.weights.size(); ++j) {
      FourierField phi = detail::samples_to_field(start.state[j], M);
      split_step_run(phi, v, 0.0, w, J * tol.substeps, kw, tol.substeps, &per_mode_rows[j]);
      end.state[j] = per_mode_rows[j].back();
    }
  };

  auto density_of_rows = [&](const std::vector<std::vector<std::vector<cd>>>& per_mode_rows,
                             std::vector<std::vector<double>>& rows) {
    rows.assign(static_cast<std::size_t>(J + 1),
                std::vector<double>(static_cast<std::size_t>(kw), -subtract));
    for (std::size_t j = 0; j < per_mode_rows.size(); ++j)
      for (int i = 0; i <= J; ++i)
        for (int ix = 0; ix < kw; ++ix)
          rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)] +=
              sys.weights[j] * std::norm(per_mode_rows[j][static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)]);
  };

  auto rows_distance = [&](const std::vector<std::vector<double>>& a,
                           const std::vector<std::vector<double>>& b, double dt) {
    double acc = 0.0;
    for (int i = 0; i <= J; ++i) {
      double wt = (i == 0 || i == J) ? 0.5 * dt : dt;
      double row = 0.0;
      for (int ix = 0; ix < kw; ++ix) {
        double d = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)] -
                   b[static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)];
        row += d * d;
      }
      acc += wt * row * (two_pi / kw);
    }
    return std::sqrt(acc);
  };

  double residual_sq = 0.0;
  while (cur < p.horizon - 1e-14) {
    double w = std::min(window, p.horizon - cur);
    double dt = w / J;

    // initial iterate: density of the free evolution from the window start
    std::vector<std::vector<double>> rho(static_cast<std::size_t>(J + 1));
    {
      detail::ModeSystem free_sys = sys;
      for (int i = 0; i <= J; ++i) {
        for (std::size_t j = 0; j < sys.weights.size(); ++j) {
          FourierField f = detail::samples_to_field(sys.state[j], M);
          free_sys.state[j] = detail::field_to_samples(free_evolve(f, i * dt), kw);
        }
        free_sys.density_row(rho[static_cast<std::size_t>(i)], subtract);
      }
    }

    NlssWindowLog log;
    log.from = cur;
    log.to = cur + w;
    bool converged = false;
    double prev_diff = -1.0;
    std::vector<std::vector<std::vector<cd>>> per_mode_rows;
    detail::ModeSystem end = sys;

    for (int iter = 0; iter < tol.max_picard; ++iter) {
      PotentialField v(w, J + 1, kw);
      for (int i = 0; i <= J; ++i)
        for (int ix = 0; ix < kw; ++ix)
          v.at(i, ix) = p.sign * rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)];

      propagate_rows(sys, v, w, per_mode_rows, end);
      std::vector<std::vector<double>> next;
      density_of_rows(per_mode_rows, next);

      double diff = rows_distance(next, rho, dt);
      rho.swap(next);
      ++log.iterations;
      log.diffs.push_back(diff);
      if (diff < tol.picard_tol) {
        converged = true;
        break;
      }
      if (prev_diff > 0.0 && diff > prev_diff && iter >= 3) break;  // non-contraction
      prev_diff = diff;
    }
    log.converged = converged;

    if (!converged) {
      if (window / 2.0 < tol.min_window)
        throw ConvergenceError("solve_fixed_point: no contraction at the minimum window",
                               log.diffs.size() > 1 ? log.diffs[log.diffs.size() - 2] : -1.0,
                               log.diffs.empty() ? -1.0 : log.diffs.back());
      window /= 2.0;
      continue;
    }

    // the certificate residual || rho - Gamma[rho] || of the returned
    // density, by one more propagation pass under it
    {
      PotentialField v(w, J + 1, kw);
      for (int i = 0; i <= J; ++i)
        for (int ix = 0; ix < kw; ++ix)
          v.at(i, ix) = p.sign * rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(ix)];
      std::vector<std::vector<std::vector<cd>>> check_rows;
      detail::ModeSystem check_end = sys;
      propagate_rows(sys, v, w, check_rows, check_end);
      std::vector<std::vector<double>> gamma_rho;
      density_of_rows(check_rows, gamma_rho);
      double res = rows_distance(gamma_rho, rho, dt);
      residual_sq += res * res;
    }
    traj.windows.push_back(std::move(log));

    // append mesh rows (skip the duplicated window start)
    for (int i = 1; i <= J; ++i) {
      traj.times.push_back(cur + i * dt);
      traj.density_rows.push_back(rho[static_cast<std::size_t>(i)]);
      detail::ModeSystem at = sys;
      for (std::size_t j = 0; j < sys.weights.size(); ++j)
        at.state[j] = per_mode_rows[j][static_cast<std::size_t>(i)];
      traj.snapshots.push_back(at.snapshot());
    }

    sys = end;
    cur += w;
  }

  traj.fixed_point_residual = std::sqrt(residual_sq);
  return traj;
}

// Direct coupled-mode integrator: all eigenvectors evolve together by Strang
// split steps, the mean-field density recomputed from the current modes at
// every step.
inline NlssTrajectory solve_coupled(const NlssProblem& p, int steps) {
  if (steps < 1) throw std::invalid_argument("solve_coupled: steps must be >= 1");
  const NlssTolerances& tol = p.tol;
  const int M = p.solver_cutoff > 0 ? p.solver_cutoff : p.gamma0.cutoff() + 16;
  const int kw = detail::next_pow2(4 * (2 * M + 1));
  detail::ModeSystem sys = detail::decompose(p.gamma0, M, tol.rank_tol, kw);
  const double trace0 = p.gamma0.trace().real();
  const double subtract = p.renormalised ? trace0 / two_pi : 0.0;
  const double h = p.horizon / steps;
  const int record_stride = std::max(1, steps / ((tol.mesh_points - 1) *
                                                 std::max(1, static_cast<int>(std::ceil(p.horizon / tol.initial_window)))));

  NlssTrajectory traj;
  traj.grid_size = kw;
  traj.trace0 = trace0;
  traj.solver_cutoff = M;

  std::vector<cd> half_kin(static_cast<std::size_t>(kw));
  for (int b = 0; b < kw; ++b) {
    long long n = (b <= kw / 2) ? b : b - kw;
    half_kin[static_cast<std::size_t>(b)] = std::polar(1.0, -static_cast<double>(n) * n * h / 2.0);
  }
  auto apply_half_kin = [&](std::vector<cd>& state) {
    fft_pow2(state, -1);
    const double inv = 1.0 / kw;
    for (int b = 0; b < kw; ++b) state[static_cast<std::size_t>(b)] *= half_kin[static_cast<std::size_t>(b)] * inv;
    fft_pow2(state, +1);
  };

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(sys.snapshot());
    std::vector<double> row;
    sys.density_row(row, subtract);
    traj.density_rows.push_back(std::move(row));
  };

  record(0.0);
  std::vector<double> rho;
  for (int step = 0; step < steps; ++step) {
    for (std::vector<cd>& st : sys.state) apply_half_kin(st);
    sys.density_row(rho, subtract);
    for (std::vector<cd>& st : sys.state)
      for (int ix = 0; ix < kw; ++ix)
        st[static_cast<std::size_t>(ix)] *= std::polar(1.0, -p.sign * rho[static_cast<std::size_t>(ix)] * h);
    for (std::vector<cd>& st : sys.state) apply_half_kin(st);
    if ((step + 1) % record_stride == 0 || step + 1 == steps) record((step + 1) * h);
  }
  return traj;
}

// gamma_N = N^{-1/alpha-eps} sum_{n=1}^N |e_n><e_n|: a stationary family with
// constant density; Schatten-alpha norm N^{-eps}.
inline DensityOperator stationary_family(int N, double alpha, double eps, int M) {
  if (M < N || N < 1) throw std::invalid_argument("stationary_family: need M >= N >= 1");
  double scale = std::pow(static_cast<double>(N), -1.0 / alpha - eps);
  std::vector<double> w(static_cast<std::size_t>(N), scale);
  std::vector<FourierField> vecs;
  for (int n = 1; n <= N; ++n) vecs.push_back(basis_e(n, M));
  return from_rank_one_sum(w, vecs);
}

enum class NlssMode { plain, renormalised };

struct IllposednessRow {
  int n = 0;
  double schatten_alpha = 0.0;
  double density_norm = 0.0;  // L2([0,T] x T) of rho, or L2(T^2) of rho_bar
};

struct IllposednessDemo {
  NlssMode mode;
  double alpha = 0.0;
  double eps = 0.0;
  double horizon = 0.0;
  std::vector<IllposednessRow> rows;
  ScalingFit schatten_fit;
  ScalingFit density_fit;
};

// The discontinuity witnesses: for the plain system the stationary family
// has vanishing Schatten norm but exploding density norm; for the
// renormalised system gamma_{0,N} = N^{-1/2} x cosine family has vanishing
// S^alpha norm while the renormalised output norm stays pinned at 1/sqrt(2).
inline IllposednessDemo illposedness_demo(NlssMode mode, double alpha, const std::vector<int>& n_list,
                                          double horizon = two_pi, double eps = 0.1) {
  IllposednessDemo demo;
  demo.mode = mode;
  demo.alpha = alpha;
  demo.eps = eps;
  demo.horizon = horizon;
  if (mode == NlssMode::plain && !(alpha > 1.0))
    throw std::invalid_argument("illposedness_demo: the plain system is well-posed for alpha <= 1");
  if (mode == NlssMode::renormalised && !(alpha > 2.0))
    throw std::invalid_argument("illposedness_demo: the renormalised system is well-posed for alpha <= 2");

  std::vector<std::pair<double, double>> s_pairs, d_pairs;
  for (int N : n_list) {
    IllposednessRow row;
    row.n = N;
    if (mode == NlssMode::plain) {
      DensityOperator g = stationary_family(N, alpha, eps, N);
      row.schatten_alpha = schatten_norm(g, alpha);
      // constant density Tr/(2pi) over [0,T] x T
      double c = g.trace().real() / two_pi;
      row.density_norm = c * std::sqrt(two_pi * horizon);
    } else {
      std::vector<double> w(static_cast<std::size_t>(N), std::pow(static_cast<double>(N), -0.5));
      std::vector<FourierField> vecs;
      const double r = 1.0 / std::sqrt(2.0);
      for (int n = 1; n <= N; ++n) {
        FourierField f(N);
        f.at(n) = cd(r, 0.0);
        f.at(-n) = cd(r, 0.0);
        vecs.push_back(std::move(f));
      }
      DensityOperator g = from_rank_one_sum(w, vecs);
      row.schatten_alpha = schatten_norm(g, alpha);
      row.density_norm = l2_norm_exact(spacetime_density(g, N, true));
    }
    s_pairs.emplace_back(N, row.schatten_alpha);
    d_pairs.emplace_back(N, row.density_norm);
    demo.rows.push_back(row);
  }
  demo.schatten_fit = scaling_fit(s_pairs);
  demo.density_fit = scaling_fit(d_pairs);
  return demo;
}

struct ConservationRow {
  double alpha = 0.0;
  double max_relative_drift = 0.0;
};

struct ConservationReport {
  std::vector<ConservationRow> rows;
  double trace_drift = 0.0;
};

inline ConservationReport conservation_check(const NlssTrajectory& traj,
                                             const std::vector<double>& alphas) {
  ConservationReport rep;
  if (traj.snapshots.empty()) return rep;
  for (double a : alphas) {
    double base = schatten_norm(traj.snapshots.front(), a);
    double drift = 0.0;
    for (const DensityOperator& g : traj.snapshots)
      drift = std::max(drift, std::abs(schatten_norm(g, a) - base));
    rep.rows.push_back({a, drift / std::max(base, 1e-300)});
  }
  double tr0 = traj.snapshots.front().trace().real();
  for (const DensityOperator& g : traj.snapshots)
    rep.trace_drift = std::max(rep.trace_drift, std::abs(g.trace().real() - tr0));
  return rep;
}

}  // namespace tdlab

#endif
