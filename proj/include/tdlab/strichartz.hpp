// Space-time densities of freely evolved operators on T^2 = T_t x T_x:
// exact coefficient-space L2/L4 norms, quadrature Lp norms, the sharpness
// and necessity families, and exponent fitting.
#ifndef TDLAB_STRICHARTZ_HPP
#define TDLAB_STRICHARTZ_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>

#include "tdlab/counting.hpp"
#include "tdlab/operators.hpp"
#include "tdlab/parallel.hpp"

namespace tdlab {

struct ConvergenceError : std::runtime_error {
  double previous_value;
  double last_value;
  ConvergenceError(const std::string& what, double prev, double last)
      : std::runtime_error(what), previous_value(prev), last_value(last) {}
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// varrho(t,x) = constant_part + (1/2pi) sum b(k,tau) e^{ikx - i tau t},
// with b(m-n, m^2-n^2) = G(m,n) over the retained off-diagonal modes.
struct SpaceTimeDensity {
  struct Coeff {
    i64 k;
    i64 tau;
    cd b;
  };

  int window = 0;            // projection window N
  double constant_part = 0;  // Tr/(2pi); 0 when renormalised
  bool renormalised = false;
  std::vector<Coeff> coeffs;  // sorted by (k, tau)

  i64 k_max() const {
    i64 m = 0;
    for (const Coeff& c : coeffs) m = std::max(m, std::abs(c.k));
    return m;
  }
  i64 tau_max() const {
    i64 m = 0;
    for (const Coeff& c : coeffs) m = std::max(m, std::abs(c.tau));
    return m;
  }
  bool time_independent() const { return tau_max() == 0; }

  double coeff_l2() const {
    double s = 0.0;
    for (const Coeff& c : coeffs) s += std::norm(c.b);
    return std::sqrt(s);
  }

  cd sample(double t, double x) const {
    cd acc(constant_part, 0.0);
    for (const Coeff& c : coeffs)
      acc += c.b * std::polar(1.0 / two_pi, static_cast<double>(c.k) * x - static_cast<double>(c.tau) * t);
    return acc;
  }
};

inline SpaceTimeDensity spacetime_density(const DensityOperator& gamma0, int N, bool renormalise) {
  if (N > gamma0.cutoff())
    throw std::invalid_argument("spacetime_density: window exceeds the operator cutoff");
  SpaceTimeDensity rho;
  rho.window = N;
  rho.renormalised = renormalise;
  cd tr(0.0, 0.0);
  for (int m = -N; m <= N; ++m) {
    for (int n = -N; n <= N; ++n) {
      if (m == n) {
        tr += gamma0.entry(m, m);
        continue;
      }
      cd b = gamma0.entry(m, n);
      if (b == cd(0.0, 0.0)) continue;  // keep the sparse families sparse
      rho.coeffs.push_back({static_cast<i64>(m) - n,
                            static_cast<i64>(m) * m - static_cast<i64>(n) * n, b});
    }
  }
  rho.constant_part = renormalise ? 0.0 : tr.real() / two_pi;
  std::sort(rho.coeffs.begin(), rho.coeffs.end(),
            [](const SpaceTimeDensity::Coeff& a, const SpaceTimeDensity::Coeff& b) {
              return std::make_pair(a.k, a.tau) < std::make_pair(b.k, b.tau);
            });
  return rho;
}

// || rho_bar ||_{L2(T^2)} = || b ||_{l2}: Plancherel on the (k, tau) lattice.
inline double l2_norm_exact(const SpaceTimeDensity& rho) {
  if (!rho.renormalised)
    throw std::invalid_argument("l2_norm_exact: requires a renormalised density "
                                "(the constant would contribute; use the quadrature path)");
  return rho.coeff_l2();
}

struct L4Terms {
  double sum_abs_g_sq = 0.0;  // sum over all (alpha beta) of |g_hat|^2
  double g00_sq = 0.0;        // |g_hat(0,0)|^2 = ||b||_{l2}^4
};

// Autocorrelation g_hat(alpha,beta) = sum_{k,tau} b(k,tau) conj(b(k-alpha,
// tau-beta)) accumulated densely in beta per alpha; O(|coeffs|^2) pairs.
inline L4Terms l4_terms(const SpaceTimeDensity& rho, std::size_t coeff_budget = 20000) {
  if (rho.coeffs.size() > coeff_budget)
    throw BudgetError("l4_terms: " + std::to_string(rho.coeffs.size()) +
                      " coefficients exceed the budget of " + std::to_string(coeff_budget) +
                      " (O(count^2) pair cost)");
  L4Terms out;
  if (rho.coeffs.empty()) return out;

  const i64 kmax = rho.k_max();
  const i64 tmax = rho.tau_max();
  // columns by k
  std::vector<std::vector<std::pair<i64, cd>>> col(static_cast<std::size_t>(2 * kmax + 1));
  for (const SpaceTimeDensity::Coeff& c : rho.coeffs)
    col[static_cast<std::size_t>(c.k + kmax)].emplace_back(c.tau, c.b);

  std::vector<cd> acc(static_cast<std::size_t>(4 * tmax + 1), cd(0.0, 0.0));
  std::vector<std::size_t> touched;
  touched.reserve(4096);
  for (i64 alpha = -2 * kmax; alpha <= 2 * kmax; ++alpha) {
    touched.clear();
    for (i64 k1 = -kmax; k1 <= kmax; ++k1) {
      i64 k2 = k1 - alpha;
      if (k2 < -kmax || k2 > kmax) continue;
      const auto& c1 = col[static_cast<std::size_t>(k1 + kmax)];
      const auto& c2 = col[static_cast<std::size_t>(k2 + kmax)];
      if (c1.empty() || c2.empty()) continue;
      for (const auto& [t1, b1] : c1)
        for (const auto& [t2, b2] : c2) {
          std::size_t idx = static_cast<std::size_t>(t1 - t2 + 2 * tmax);
          if (acc[idx] == cd(0.0, 0.0)) touched.push_back(idx);
          acc[idx] += b1 * std::conj(b2);
        }
    }
    for (std::size_t idx : touched) {
      double w = std::norm(acc[idx]);
      out.sum_abs_g_sq += w;
      if (alpha == 0 && static_cast<i64>(idx) == 2 * tmax) out.g00_sq = w;
      acc[idx] = cd(0.0, 0.0);
    }
  }
  return out;
}

// || rho_bar ||^4_{L4(T^2)} = (1/4pi^2) sum |g_hat(alpha,beta)|^2.
inline double l4_norm_exact(const SpaceTimeDensity& rho, std::size_t coeff_budget = 20000) {
  if (!rho.renormalised) throw std::invalid_argument("l4_norm_exact: requires a renormalised density");
  L4Terms t = l4_terms(rho, coeff_budget);
  return std::pow(t.sum_abs_g_sq / (two_pi * two_pi), 0.25);
}

namespace detail {

// One tensor-trapezoid pass over [0,2pi]^2 with Tt x Kx samples.  Phases are
// table lookups with exact integer index reduction.
inline double lp_pass(const SpaceTimeDensity& rho, double p, int t_count, int x_count) {
  const i64 kmax = std::max<i64>(rho.k_max(), 0);
  std::vector<std::vector<std::pair<i64, cd>>> col(static_cast<std::size_t>(2 * kmax + 1));
  for (const SpaceTimeDensity::Coeff& c : rho.coeffs)
    col[static_cast<std::size_t>(c.k + kmax)].emplace_back(c.tau, c.b);

  PhasorTable xt(x_count);
  PhasorTable tt(t_count);
  const int chunks = 64;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  parallel_chunks(static_cast<std::size_t>(t_count), chunks, [&](int chunk, std::size_t tb, std::size_t te) {
    std::vector<cd> ck(static_cast<std::size_t>(2 * kmax + 1));
    std::vector<cd> profile(static_cast<std::size_t>(x_count));
    double sum = 0.0, comp = 0.0;
    for (std::size_t it = tb; it < te; ++it) {
      for (i64 k = -kmax; k <= kmax; ++k) {
        cd acc(0.0, 0.0);
        for (const auto& [tau, b] : col[static_cast<std::size_t>(k + kmax)])
          acc += b * std::conj(tt.forward(tau * static_cast<i64>(it)));  // e^{-i tau t}
        ck[static_cast<std::size_t>(k + kmax)] = acc / two_pi;
      }
      for (int j = 0; j < x_count; ++j) {
        cd acc(rho.constant_part, 0.0);
        std::int64_t idx = -kmax * static_cast<std::int64_t>(j);
        for (i64 k = -kmax; k <= kmax; ++k, idx += j) acc += ck[static_cast<std::size_t>(k + kmax)] * xt.forward(idx);
        profile[static_cast<std::size_t>(j)] = acc;
      }
      for (const cd& v : profile) {
        double term = std::pow(std::abs(v), p) - comp;
        double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
      }
    }
    partial[static_cast<std::size_t>(chunk)] = sum;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  double mean = total / (static_cast<double>(t_count) * x_count);
  return std::pow(mean * two_pi * two_pi, 1.0 / p);
}

inline double lp_pass_time_independent(const SpaceTimeDensity& rho, double p, int x_count) {
  std::vector<cd> ck;
  i64 kmax = std::max<i64>(rho.k_max(), 0);
  ck.assign(static_cast<std::size_t>(2 * kmax + 1), cd(0.0, 0.0));
  for (const SpaceTimeDensity::Coeff& c : rho.coeffs) ck[static_cast<std::size_t>(c.k + kmax)] += c.b / two_pi;
  PhasorTable xt(x_count);
  double sum = 0.0, comp = 0.0;
  for (int j = 0; j < x_count; ++j) {
    cd acc(rho.constant_part, 0.0);
    std::int64_t idx = -kmax * static_cast<std::int64_t>(j);
    for (i64 k = -kmax; k <= kmax; ++k, idx += j) acc += ck[static_cast<std::size_t>(k + kmax)] * xt.forward(idx);
    double term = std::pow(std::abs(acc), p) - comp;
    double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  // the time integral of a t-constant profile is a factor (2pi)^{1/p}
  return std::pow(sum / x_count * two_pi * two_pi, 1.0 / p);
}

}  // namespace detail

// Tensor trapezoid over [0,2pi]^2, refined (grid doubling) until the relative
// change is below 1e-6, at most 6 levels.  Time-independent densities skip
// the t integral.  Even p <= 4 uses the band-exact grid directly.
inline double lp_norm_quadrature(const SpaceTimeDensity& rho, double p, int t_samples = 0,
                                 bool refine = true, double rel_tol = 1e-6) {
  if (p < 1.0) throw std::invalid_argument("lp_norm_quadrature: p must be >= 1");
  const i64 kmax = std::max<i64>(rho.k_max(), 1);
  const i64 tmax = rho.tau_max();
  const bool even_p = (p == 2.0 || p == 4.0);
  const int ip = static_cast<int>(std::ceil(p));

  int x_count = even_p ? static_cast<int>(p) * static_cast<int>(kmax) + 2
                       : 8 * (2 * static_cast<int>(kmax) + 1);
  if (rho.time_independent()) {
    double prev = detail::lp_pass_time_independent(rho, p, x_count);
    if (even_p || !refine) return prev;
    for (int level = 0; level < 6; ++level) {
      double cur = detail::lp_pass_time_independent(rho, p, x_count * 2);
      if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
      prev = cur;
      x_count *= 2;
    }
    double last = detail::lp_pass_time_independent(rho, p, x_count * 2);
    if (std::abs(last - prev) <= rel_tol * std::max(std::abs(last), 1e-300)) return last;
    throw ConvergenceError("lp_norm_quadrature: refinement did not converge in 6 levels", prev, last);
  }

  int t_count = t_samples > 0 ? t_samples
                              : (even_p ? static_cast<int>(p * static_cast<double>(tmax)) + 2
                                        : (2 * ip + 2) * static_cast<int>(tmax) + 9);
  double prev = detail::lp_pass(rho, p, t_count, x_count);
  if ((even_p && t_samples == 0) || !refine) return prev;
  for (int level = 0; level < 6; ++level) {
    double cur = detail::lp_pass(rho, p, 2 * t_count, 2 * x_count);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
    prev = cur;
    t_count *= 2;
    x_count *= 2;
  }
  double last = detail::lp_pass(rho, p, 2 * t_count, 2 * x_count);
  if (std::abs(last - prev) <= rel_tol * std::max(std::abs(last), 1e-300)) return last;
  throw ConvergenceError("lp_norm_quadrature: refinement did not converge in 6 levels", prev, last);
}

// Rank-N projection onto phi_n = (e_n + e_{-n})/sqrt(2), n = 1..N.
inline DensityOperator cosine_family(int N, int M) {
  if (N < 1 || M < N) throw std::invalid_argument("cosine_family: need M >= N >= 1");
  std::vector<double> w(static_cast<std::size_t>(N), 1.0);
  std::vector<FourierField> phi;
  phi.reserve(static_cast<std::size_t>(N));
  const double r = 1.0 / std::sqrt(2.0);
  for (int n = 1; n <= N; ++n) {
    FourierField f(M);
    f.at(n) = cd(r, 0.0);
    f.at(-n) = cd(r, 0.0);
    phi.push_back(std::move(f));
  }
  return from_rank_one_sum(w, phi);
}

// (1/2pi) sum_{n=1}^N cos(2nx) = (1/4pi)(sin((2N+1)x)/sin(x) - 1), with a
// direct-summation fallback near the sin(x) zeros (cancellation).
inline double dirichlet_closed_form(int N, double x) {
  double s = std::sin(x);
  if (std::abs(s) < 1e-8) {
    double acc = 0.0;
    for (int n = N; n >= 1; --n) acc += std::cos(2.0 * n * x);
    return acc / two_pi;
  }
  return (std::sin((2.0 * N + 1.0) * x) / s - 1.0) / (2.0 * two_pi);
}

inline std::vector<FourierField> random_orthonormal_system(int count, int M, std::uint64_t seed) {
  if (count > 2 * M + 1)
    throw std::invalid_argument("random_orthonormal_system: count exceeds the dimension 2M+1");
  if (count < 1) throw std::invalid_argument("random_orthonormal_system: count must be >= 1");
  GaussianSource src(seed);
  std::vector<FourierField> vecs;
  vecs.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    FourierField f(M);
    for (int n = -M; n <= M; ++n) f.at(n) = src.complex_unit_variance();
    vecs.push_back(std::move(f));
  }
  return orthonormalize(std::move(vecs));
}

struct ScalingFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double residual_rms = 0.0;
  int points = 0;
};

// Least-squares slope of log(value) against log(N).
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, v] : pairs) {
    if (!(v > 0.0) || !(n > 0.0)) throw std::invalid_argument("scaling_fit: nonpositive value");
    double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = static_cast<double>(pairs.size());
  double denom = m * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("scaling_fit: degenerate abscissae");
  ScalingFit fit;
  fit.exponent = (m * sxy - sx * sy) / denom;
  fit.log_prefactor = (sy - fit.exponent * sx) / m;
  double rss = 0.0;
  for (const auto& [n, v] : pairs) {
    double r = std::log(v) - (fit.log_prefactor + fit.exponent * std::log(n));
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / m);
  fit.points = static_cast<int>(m);
  return fit;
}

// The d >= 2 necessity family: modes A_N = {(0, n_2..n_d) : |n_i| <= N} and
// phi_n = (e_{n+k} + e_{n-k})/sqrt(2) with k = (1,0,..,0).  Its renormalised
// density is (#A_N/(2pi)^d) cos(2 x_1); everything is closed-form in x_1.
struct HighdimRecord {
  int d = 0;
  int n = 0;
  i64 cardinality = 0;          // #A_N = (2N+1)^{d-1}
  double p_star = 0.0;          // (d+2)/d unless overridden
  double density_amplitude = 0; // #A_N/(2pi)^d
  double lp_norm = 0.0;         // L^{p*}(T^{1+d}) of the renormalised density
  std::vector<std::pair<double, double>> schatten;  // (alpha, (#A_N)^{1/alpha})
};

inline double abs_cos_power_integral(double p) {
  // int_0^{2pi} |cos u|^p du = 2 sqrt(pi) Gamma((p+1)/2) / Gamma(p/2 + 1)
  return 2.0 * std::sqrt(two_pi / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::tgamma(p / 2.0 + 1.0);
}

inline HighdimRecord highdim_necessity(int d, int N, double p_star = 0.0,
                                       const std::vector<double>& alphas = {1.5, 2.0, 3.0}) {
  if (d != 2 && d != 3) throw std::invalid_argument("highdim_necessity: d must be 2 or 3");
  HighdimRecord rec;
  rec.d = d;
  rec.n = N;
  rec.p_star = p_star > 0.0 ? p_star : (d + 2.0) / d;
  rec.cardinality = 1;
  for (int i = 1; i < d; ++i) rec.cardinality *= 2 * static_cast<i64>(N) + 1;
  double vol = std::pow(two_pi, d);
  rec.density_amplitude = static_cast<double>(rec.cardinality) / vol;
  // |c cos(2x_1)| integrated over T^{1+d}: d flat directions give (2pi)^d
  double integral = std::pow(rec.density_amplitude, rec.p_star) * std::pow(two_pi, d) *
                    abs_cos_power_integral(rec.p_star);
  rec.lp_norm = std::pow(integral, 1.0 / rec.p_star);
  for (double a : alphas)
    rec.schatten.emplace_back(a, std::pow(static_cast<double>(rec.cardinality), 1.0 / a));
  return rec;
}

}  // namespace tdlab

#endif
