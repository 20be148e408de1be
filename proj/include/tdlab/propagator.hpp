// The potential propagator U_V(t,s) for real space-time potentials on
// [0,T] x T: a Strang split-step production path on a power-of-two spectral
// grid (unitary up to roundoff), and a Duhamel-Picard oracle path.
#ifndef TDLAB_PROPAGATOR_HPP
#define TDLAB_PROPAGATOR_HPP

#include <fstream>
#include <functional>

#include "tdlab/linalg.hpp"
#include "tdlab/strichartz.hpp"  // ConvergenceError

namespace tdlab {

// Real potential V(t,x) on a uniform grid over [0,T] x T; trigonometric
// interpolation in x, piecewise-linear interpolation in t.
struct PotentialField {
  double duration = 0.0;      // T
  int time_count = 0;         // nt >= 2 levels, t_i = i T/(nt-1)
  TorusGrid xgrid;            // K points
  std::vector<double> values; // row-major [it * K + ix]

  PotentialField() = default;
  PotentialField(double T, int nt, int K)
      : duration(T), time_count(nt), xgrid(K),
        values(static_cast<std::size_t>(nt) * K, 0.0) {
    if (!(T > 0.0)) throw std::invalid_argument("PotentialField: duration must be positive");
    if (nt < 2) throw std::invalid_argument("PotentialField: need at least two time levels");
  }

  double& at(int it, int ix) { return values[static_cast<std::size_t>(it) * xgrid.size + ix]; }
  double at(int it, int ix) const { return values[static_cast<std::size_t>(it) * xgrid.size + ix]; }
  double dt() const { return duration / (time_count - 1); }

  static PotentialField from_function(const std::function<double(double, double)>& f, double T,
                                      int nt, int K) {
    PotentialField v(T, nt, K);
    for (int it = 0; it < nt; ++it) {
      double t = T * it / (nt - 1);
      for (int ix = 0; ix < K; ++ix) v.at(it, ix) = f(t, v.xgrid.point(ix));
    }
    return v;
  }

  static PotentialField constant(double c, double T, int nt = 2, int K = 8) {
    return from_function([c](double, double) { return c; }, T, nt, K);
  }

  // Reality is a precondition of the whole module; complex input is rejected
  // here rather than silently drifting mass downstream.
  static PotentialField from_complex_samples(const std::vector<cd>& samples, double T, int nt,
                                             int K) {
    if (samples.size() != static_cast<std::size_t>(nt) * K)
      throw std::invalid_argument("from_complex_samples: size mismatch");
    double scale = 0.0;
    for (const cd& v : samples) scale = std::max(scale, std::abs(v));
    PotentialField v(T, nt, K);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::abs(samples[i].imag()) > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("PotentialField: complex-valued potential rejected "
                                    "(reality precondition)");
      v.values[i] = samples[i].real();
    }
    return v;
  }

  double value_at(double t, double x) const {
    // PL in t, trig interpolation in x evaluated directly (test/debug path)
    double u = std::clamp(t / dt(), 0.0, static_cast<double>(time_count - 1));
    int i0 = std::min(static_cast<int>(u), time_count - 2);
    double w = u - i0;
    const int K = xgrid.size;
    std::vector<double> row(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) row[static_cast<std::size_t>(j)] = (1.0 - w) * at(i0, j) + w * at(i0 + 1, j);
    const int half = (K - 1) / 2;
    double acc = 0.0;
    for (int l = -half; l <= half; ++l) {
      cd vhat(0.0, 0.0);
      for (int j = 0; j < K; ++j) vhat += row[static_cast<std::size_t>(j)] * std::polar(1.0, -l * xgrid.point(j));
      vhat /= static_cast<double>(K);
      acc += (vhat * std::polar(1.0, l * x)).real();
    }
    if (K % 2 == 0) {  // real Nyquist coefficient, split across +-K/2
      double vhat = 0.0;
      for (int j = 0; j < K; ++j) vhat += row[static_cast<std::size_t>(j)] * ((j % 2 == 0) ? 1.0 : -1.0);
      vhat /= static_cast<double>(K);
      acc += vhat * std::cos((K / 2) * x);
    }
    return acc;
  }

  // Exact L2 of the piecewise-linear-in-t interpolant, trapezoid-exact in x.
  double l2_norm() const {
    const int K = xgrid.size;
    double acc = 0.0;
    for (int it = 0; it + 1 < time_count; ++it)
      for (int ix = 0; ix < K; ++ix) {
        double a = at(it, ix), b = at(it + 1, ix);
        acc += (a * a + a * b + b * b) / 3.0;
      }
    return std::sqrt(acc * dt() * (two_pi / K));
  }
};

inline void save_potential(const PotentialField& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_potential: cannot open " + path);
  out << "tdlab-potential 1\n";
  out.precision(17);
  out << "T " << v.duration << "\n";
  out << "nt " << v.time_count << "\n";
  out << "nx " << v.xgrid.size << "\n";
  for (double x : v.values) out << x << "\n";
  if (!out) throw std::runtime_error("save_potential: write failure on " + path);
}

inline PotentialField load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_potential: cannot open " + path);
  std::string magic, key;
  int version = 0;
  in >> magic >> version;
  if (magic != "tdlab-potential" || version != 1)
    throw std::runtime_error("load_potential: bad header in " + path);
  double T = 0.0;
  int nt = 0, nx = 0;
  in >> key >> T;
  if (key != "T") throw std::runtime_error("load_potential: bad duration line");
  in >> key >> nt;
  if (key != "nt") throw std::runtime_error("load_potential: bad time-count line");
  in >> key >> nx;
  if (key != "nx") throw std::runtime_error("load_potential: bad space-count line");
  PotentialField v(T, nt, nx);
  for (double& x : v.values)
    if (!(in >> x)) throw std::runtime_error("load_potential: truncated values");
  return v;
}

namespace detail {

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// V prepared for a power-of-two working grid: x-mode rows per time level,
// PL-combined in t and synthesized on demand.
class PotentialOnGrid {
 public:
  PotentialOnGrid(const PotentialField& v, int grid_size) : v_(&v), kw_(grid_size) {
    const int K = v.xgrid.size;
    if (K == kw_) {
      same_grid_ = true;  // PL time combination of the raw rows, no resample
      return;
    }
    const int half = (K - 1) / 2;
    rows_.assign(static_cast<std::size_t>(v.time_count), std::vector<cd>(static_cast<std::size_t>(kw_), cd(0.0, 0.0)));
    PhasorTable tab(K);
    for (int it = 0; it < v.time_count; ++it) {
      std::vector<cd>& bins = rows_[static_cast<std::size_t>(it)];
      for (int l = -half; l <= half; ++l) {
        cd acc(0.0, 0.0);
        std::int64_t idx = 0;
        for (int j = 0; j < K; ++j, idx += l) acc += v.at(it, j) * std::conj(tab.forward(idx));
        bins[static_cast<std::size_t>((l % kw_ + kw_) % kw_)] = acc / static_cast<double>(K);
      }
      if (K % 2 == 0) {  // real Nyquist coefficient split across +-K/2
        cd acc(0.0, 0.0);
        for (int j = 0; j < K; ++j) acc += v.at(it, j) * ((j % 2 == 0) ? 1.0 : -1.0);
        acc /= static_cast<double>(2 * K);
        bins[static_cast<std::size_t>(K / 2)] += acc;
        bins[static_cast<std::size_t>(kw_ - K / 2)] += acc;
      }
    }
  }

  // samples of V(t, .) on the working grid
  void row_at(double t, std::vector<double>& out) const {
    double u = std::clamp(t / v_->dt(), 0.0, static_cast<double>(v_->time_count - 1));
    int i0 = std::min(static_cast<int>(u), v_->time_count - 2);
    double w = u - i0;
    out.resize(static_cast<std::size_t>(kw_));
    if (same_grid_) {
      for (int j = 0; j < kw_; ++j)
        out[static_cast<std::size_t>(j)] = (1.0 - w) * v_->at(i0, j) + w * v_->at(i0 + 1, j);
      return;
    }
    std::vector<cd> bins(static_cast<std::size_t>(kw_));
    const std::vector<cd>& r0 = rows_[static_cast<std::size_t>(i0)];
    const std::vector<cd>& r1 = rows_[static_cast<std::size_t>(i0 + 1)];
    for (int b = 0; b < kw_; ++b)
      bins[static_cast<std::size_t>(b)] = (1.0 - w) * r0[static_cast<std::size_t>(b)] + w * r1[static_cast<std::size_t>(b)];
    fft_pow2(bins, +1);
    for (int j = 0; j < kw_; ++j) out[static_cast<std::size_t>(j)] = bins[static_cast<std::size_t>(j)].real();
  }

  int grid_size() const { return kw_; }

 private:
  const PotentialField* v_;
  int kw_;
  bool same_grid_ = false;
  std::vector<std::vector<cd>> rows_;
};

inline int working_grid_size(int cutoff, const PotentialField& v, int override_size = 0) {
  if (override_size > 0) {
    if ((override_size & (override_size - 1)) != 0)
      throw std::invalid_argument("working grid override must be a power of two");
    return override_size;
  }
  return next_pow2(std::max({4 * (2 * cutoff + 1), 2 * v.xgrid.size, 64}));
}

// field coefficients -> samples on the power-of-two grid (e_n normalisation)
inline std::vector<cd> field_to_samples(const FourierField& f, int kw) {
  std::vector<cd> bins(static_cast<std::size_t>(kw), cd(0.0, 0.0));
  for (int n = -f.cutoff; n <= f.cutoff; ++n)
    bins[static_cast<std::size_t>((n % kw + kw) % kw)] += f.at(n);
  fft_pow2(bins, +1);
  for (cd& v : bins) v *= inv_sqrt_two_pi;
  return bins;
}

inline FourierField samples_to_field(std::vector<cd> samples, int cutoff) {
  const int kw = static_cast<int>(samples.size());
  fft_pow2(samples, -1);
  FourierField f(cutoff);
  double scale = std::sqrt(two_pi) / kw;
  for (int n = -cutoff; n <= cutoff; ++n)
    f.at(n) = samples[static_cast<std::size_t>((n % kw + kw) % kw)] * scale;
  return f;
}

inline double grid_l2(const std::vector<cd>& samples) {
  double s = 0.0;
  for (const cd& v : samples) s += std::norm(v);
  return std::sqrt(s * two_pi / static_cast<double>(samples.size()));
}

}  // namespace detail

struct PropagatorRun {
  double from = 0.0, to = 0.0;
  int steps = 0;
  std::string method;
  double mass_drift = 0.0;
  FourierField output;
};

// Strang splitting: half kinetic phase e^{-i n^2 h/2}, full potential phase
// e^{-i V(t_mid, x) h} in sample space, half kinetic; V is sampled at the
// temporal midpoint of each step.  All factors are unimodular, so the grid
// L2 norm is conserved to roundoff; the only loss is the final truncation
// back to the field cutoff.
inline PropagatorRun split_step_run(const FourierField& phi, const PotentialField& v, double s,
                                    double t, int steps, int grid_override = 0,
                                    int record_stride = 0,
                                    std::vector<std::vector<cd>>* recorded_samples = nullptr) {
  if (steps < 1) throw std::invalid_argument("split_step_evolve: steps must be >= 1");
  double lo = std::min(s, t), hi = std::max(s, t);
  if (lo < -1e-12 || hi > v.duration + 1e-12)
    throw std::invalid_argument("split_step_evolve: window outside the potential's domain");

  const int kw = detail::working_grid_size(phi.cutoff, v, grid_override);
  detail::PotentialOnGrid vg(v, kw);
  const double h = (t - s) / steps;

  // kinetic phase tables on the grid modes
  std::vector<cd> half_kin(static_cast<std::size_t>(kw)), full_kin(static_cast<std::size_t>(kw));
  for (int b = 0; b < kw; ++b) {
    long long n = (b <= kw / 2) ? b : b - kw;
    double w = static_cast<double>(n) * n;
    half_kin[static_cast<std::size_t>(b)] = std::polar(1.0, -w * h / 2.0);
    full_kin[static_cast<std::size_t>(b)] = std::polar(1.0, -w * h);
  }

  std::vector<cd> state = detail::field_to_samples(phi, kw);
  const double mass_in = detail::grid_l2(state);
  if (recorded_samples) {
    recorded_samples->clear();
    recorded_samples->push_back(state);
  }

  std::vector<double> vrow;
  auto apply_modes = [&](const std::vector<cd>& table) {
    fft_pow2(state, -1);
    const double inv = 1.0 / kw;
    for (int b = 0; b < kw; ++b) state[static_cast<std::size_t>(b)] *= table[static_cast<std::size_t>(b)] * inv;
    fft_pow2(state, +1);
  };

  // per-step Strang factors; adjacent half-kinetic phases merge exactly, and
  // the state right after a full kinetic IS the next step's midpoint state
  apply_modes(half_kin);
  for (int j = 0; j < steps; ++j) {
    double t_mid = s + (j + 0.5) * h;
    vg.row_at(t_mid, vrow);
    for (int ix = 0; ix < kw; ++ix)
      state[static_cast<std::size_t>(ix)] *= std::polar(1.0, -vrow[static_cast<std::size_t>(ix)] * h);
    bool at_boundary = recorded_samples && record_stride > 0 && ((j + 1) % record_stride == 0);
    if (j + 1 < steps) {
      if (at_boundary) {
        // land exactly on the step boundary for the record, then continue
        apply_modes(half_kin);
        recorded_samples->push_back(state);
        apply_modes(half_kin);
      } else {
        apply_modes(full_kin);
      }
    } else {
      apply_modes(half_kin);
      if (at_boundary) recorded_samples->push_back(state);
    }
  }

  PropagatorRun run;
  run.from = s;
  run.to = t;
  run.steps = steps;
  run.method = "split-step";
  run.output = detail::samples_to_field(std::move(state), phi.cutoff);
  run.mass_drift = std::abs(run.output.l2_norm() - mass_in);
  return run;
}

inline FourierField split_step_evolve(const FourierField& phi, const PotentialField& v, double s,
                                      double t, int steps) {
  return split_step_run(phi, v, s, t, steps).output;
}

struct DuhamelWindowLog {
  double from = 0.0, to = 0.0;
  int iterations = 0;
  std::vector<double> ratios;  // successive-difference contraction ratios
  double final_diff = 0.0;
};

struct DuhamelResult {
  FourierField output;
  std::vector<DuhamelWindowLog> windows;
};

// Picard iteration on the discrete Duhamel map
//   (Gamma u)(t_i) = U(t_i - a) u0 - i int_a^{t_i} U(t_i - t') V(t') u(t') dt'
// with the integral by cumulative trapezoid on the window mesh, iterated
// until the sup-in-t L2 difference of successive iterates drops below tol.
// Windows are halved on non-contraction and concatenated to span [s, t].
inline DuhamelResult duhamel_picard_run(const FourierField& phi, const PotentialField& v, double s,
                                        double t, double tol, int mesh_per_unit_time = 512,
                                        int max_iterations = 60, double initial_window = 0.0) {
  if (t < s) throw std::invalid_argument("duhamel_picard: forward windows only (t >= s)");
  if (s < -1e-12 || t > v.duration + 1e-12)
    throw std::invalid_argument("duhamel_picard: window outside the potential's domain");

  const int M = phi.cutoff;
  const int kw = detail::working_grid_size(M, v);
  detail::PotentialOnGrid vg(v, kw);

  DuhamelResult result;
  result.output = phi;
  if (t == s) return result;

  double window = (initial_window > 0.0) ? std::min(initial_window, t - s) : (t - s);
  const double min_window = (t - s) / 1024.0;
  double cur = s;
  FourierField u0 = phi;

  std::vector<double> vrow;
  auto multiply_by_v = [&](const FourierField& u, double time) {
    std::vector<cd> samples = detail::field_to_samples(u, kw);
    vg.row_at(time, vrow);
    for (int ix = 0; ix < kw; ++ix) samples[static_cast<std::size_t>(ix)] *= vrow[static_cast<std::size_t>(ix)];
    return detail::samples_to_field(std::move(samples), M);
  };

  while (cur < t - 1e-15) {
    double b = std::min(cur + window, t);
    double w = b - cur;
    int J = std::max(16, static_cast<int>(std::ceil(w * mesh_per_unit_time)));
    double dt = w / J;

    std::vector<FourierField> u(static_cast<std::size_t>(J + 1));
    for (int i = 0; i <= J; ++i) u[static_cast<std::size_t>(i)] = free_evolve(u0, i * dt);

    DuhamelWindowLog log;
    log.from = cur;
    log.to = b;
    double prev_diff = -1.0;
    bool converged = false;

    for (int iter = 0; iter < max_iterations; ++iter) {
      // interaction-picture integrand, then cumulative trapezoid
      std::vector<FourierField> what(static_cast<std::size_t>(J + 1));
      for (int i = 0; i <= J; ++i)
        what[static_cast<std::size_t>(i)] =
            free_evolve(multiply_by_v(u[static_cast<std::size_t>(i)], cur + i * dt), -(i * dt));

      double diff = 0.0;
      FourierField prefix(M);
      for (int i = 0; i <= J; ++i) {
        if (i > 0)
          for (int n = -M; n <= M; ++n)
            prefix.at(n) += 0.5 * dt * (what[static_cast<std::size_t>(i - 1)].at(n) +
                                        what[static_cast<std::size_t>(i)].at(n));
        FourierField inner(M);
        for (int n = -M; n <= M; ++n) inner.at(n) = u0.at(n) - cd(0.0, 1.0) * prefix.at(n);
        FourierField next = free_evolve(inner, i * dt);
        double d = 0.0;
        for (int n = -M; n <= M; ++n) d += std::norm(next.at(n) - u[static_cast<std::size_t>(i)].at(n));
        diff = std::max(diff, std::sqrt(d));
        u[static_cast<std::size_t>(i)] = std::move(next);
      }

      ++log.iterations;
      if (prev_diff > 0.0) log.ratios.push_back(diff / prev_diff);
      prev_diff = diff;
      log.final_diff = diff;
      if (diff < tol) {
        converged = true;
        break;
      }
      if (!log.ratios.empty() && log.ratios.back() >= 1.0 && log.iterations > 3) break;
    }

    if (!converged) {
      if (window / 2.0 < min_window)
        throw ConvergenceError("duhamel_picard: no contraction at the minimum window; last ratio " +
                                   std::to_string(log.ratios.empty() ? -1.0 : log.ratios.back()),
                               log.ratios.empty() ? -1.0 : log.ratios.back(), log.final_diff);
      window /= 2.0;
      continue;
    }

    result.windows.push_back(std::move(log));
    u0 = u[static_cast<std::size_t>(J)];
    cur = b;
  }

  result.output = std::move(u0);
  return result;
}

inline FourierField duhamel_picard(const FourierField& phi, const PotentialField& v, double s,
                                   double t, double tol) {
  return duhamel_picard_run(phi, v, s, t, tol).output;
}

inline PropagatorRun duhamel_run(const FourierField& phi, const PotentialField& v, double s,
                                 double t, double tol) {
  DuhamelResult res = duhamel_picard_run(phi, v, s, t, tol);
  PropagatorRun run;
  run.from = s;
  run.to = t;
  run.steps = static_cast<int>(res.windows.size());
  run.method = "duhamel";
  run.output = std::move(res.output);
  run.mass_drift = std::abs(run.output.l2_norm() - phi.l2_norm());
  return run;
}

// ---- Appendix-style property suite -------------------------------------

struct PropagatorCheckConfig {
  int field_count = 5;
  std::uint64_t seed = 1234;
  int cutoff = 32;     // working cutoff of the evolved fields
  int bandwidth = 8;   // initial fields are band-limited well below the cutoff
  int steps = 2000;    // for the full window [0, T]
  double duhamel_tol = 1e-9;
  std::vector<double> continuity_offsets = {0.2, 0.1, 0.05, 0.025, 0.0125};
};

struct PropagatorCheckReport {
  double max_isometry_drift = 0.0;
  double max_composition_residual = 0.0;
  double max_inverse_residual = 0.0;
  double gauge_phase_error = 0.0;
  double split_vs_duhamel = 0.0;
  double observed_order = 0.0;
  std::vector<std::pair<double, double>> continuity;  // (|dt|, L2 increment)
  bool passed = false;
  std::string worst_case;
};

namespace detail {
inline double field_distance(const FourierField& a, const FourierField& b) {
  double s = 0.0;
  int M = std::max(a.cutoff, b.cutoff);
  for (int n = -M; n <= M; ++n) s += std::norm(a.coeff_or_zero(n) - b.coeff_or_zero(n));
  return std::sqrt(s);
}
}  // namespace detail

inline PropagatorCheckReport propagator_check(const PotentialField& v,
                                              const PropagatorCheckConfig& cfg = {}) {
  PropagatorCheckReport rep;
  const double T = v.duration;
  const int steps = cfg.steps;
  const double mesh = T / steps;

  std::vector<FourierField> fields;
  for (int i = 0; i < cfg.field_count; ++i) {
    // band-limited data inside a larger working cutoff, so the evolved field
    // stays representable and the checks probe the propagator, not truncation
    FourierField f(cfg.cutoff);
    FourierField seed_field = random_field(cfg.bandwidth, cfg.seed + static_cast<std::uint64_t>(i));
    for (int n = -cfg.bandwidth; n <= cfg.bandwidth; ++n) f.at(n) = seed_field.at(n);
    double nrm = f.l2_norm();
    for (cd& c : f.coeffs) c /= nrm;
    fields.push_back(std::move(f));
  }

  std::mt19937_64 eng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  auto mesh_time = [&](double lo, double hi) {
    // a random step boundary inside [lo, hi]
    long long a = static_cast<long long>(std::ceil(lo / mesh));
    long long b = static_cast<long long>(std::floor(hi / mesh));
    if (b <= a) return lo;
    return static_cast<double>(a + static_cast<long long>(eng() % static_cast<std::uint64_t>(b - a + 1))) * mesh;
  };

  for (std::size_t i = 0; i < fields.size(); ++i) {
    const FourierField& f = fields[i];
    double s = (i == 0) ? 0.0 : mesh_time(0.0, T / 4);
    double r = mesh_time(T / 3, 2 * T / 3);
    double tt = (i == 0) ? T : mesh_time(3 * T / 4, T);
    int n_sr = std::max(1, static_cast<int>(std::llround((r - s) / mesh)));
    int n_rt = std::max(1, static_cast<int>(std::llround((tt - r) / mesh)));
    int n_st = n_sr + n_rt;

    FourierField whole = split_step_evolve(f, v, s, tt, n_st);
    double iso = std::abs(whole.l2_norm() - f.l2_norm());
    if (iso > rep.max_isometry_drift) {
      rep.max_isometry_drift = iso;
      rep.worst_case = "isometry at field " + std::to_string(i);
    }

    FourierField mid = split_step_evolve(f, v, s, r, n_sr);
    FourierField comp = split_step_evolve(mid, v, r, tt, n_rt);
    rep.max_composition_residual =
        std::max(rep.max_composition_residual, detail::field_distance(whole, comp));

    FourierField back = split_step_evolve(whole, v, tt, s, n_st);
    rep.max_inverse_residual = std::max(rep.max_inverse_residual, detail::field_distance(back, f));
  }

  // gauge covariance: adding a constant multiplies the propagator by a phase
  {
    const double c = 0.7;
    PotentialField shifted = v;
    for (double& x : shifted.values) x += c;
    FourierField a = split_step_evolve(fields[0], v, 0.0, T, steps);
    FourierField b = split_step_evolve(fields[0], shifted, 0.0, T, steps);
    cd phase = std::polar(1.0, -c * T);
    FourierField a_phased = a;
    for (cd& z : a_phased.coeffs) z *= phase;
    rep.gauge_phase_error = detail::field_distance(a_phased, b);
  }

  // split-step observed order via Richardson against a fine reference
  {
    const FourierField& f = fields[0];
    FourierField ref = split_step_evolve(f, v, 0.0, T, 8 * steps);
    double e1 = detail::field_distance(split_step_evolve(f, v, 0.0, T, steps / 2), ref);
    double e2 = detail::field_distance(split_step_evolve(f, v, 0.0, T, steps), ref);
    rep.observed_order = std::log2(e1 / e2);
  }

  // cross-method agreement on a small leading window
  {
    double w = T / 16.0;
    FourierField a = split_step_evolve(fields[0], v, 0.0, w, std::max(512, steps / 4));
    FourierField b = duhamel_picard(fields[0], v, 0.0, w, cfg.duhamel_tol);
    rep.split_vs_duhamel = detail::field_distance(a, b);
  }

  // strong continuity: increments as t_n -> t
  {
    double t_star = T / 2.0;
    FourierField at = split_step_evolve(fields[0], v, 0.0, t_star, steps / 2);
    for (double off : cfg.continuity_offsets) {
      double tn = t_star + off * T / 4.0;
      int n = std::max(1, static_cast<int>(std::llround(tn / mesh)));
      double t_snapped = n * mesh;
      FourierField atn = split_step_evolve(fields[0], v, 0.0, t_snapped, n);
      rep.continuity.emplace_back(std::abs(t_snapped - t_star), detail::field_distance(atn, at));
    }
  }

  rep.passed = rep.max_isometry_drift < 1e-8 && rep.max_composition_residual < 1e-7 &&
               rep.max_inverse_residual < 1e-7 && rep.gauge_phase_error < 1e-10 &&
               rep.split_vs_duhamel < 1e-5 && rep.observed_order >= 1.9;
  return rep;
}

}  // namespace tdlab

#endif
