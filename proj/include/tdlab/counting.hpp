// The Diophantine counting quantity r(alpha, beta) behind the L4 estimate:
// exact support-set enumeration, shift counts, the pair-difference maximum,
// the divisor function, and the gcd/Bezout solution structure.
#ifndef TDLAB_COUNTING_HPP
#define TDLAB_COUNTING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdlab {

using i64 = std::int64_t;

// Support of b: points (k, tau) = (m - n, m^2 - n^2) for |m|,|n| <= N, m != n.
// Equivalently {(k, k*s) : k != 0, |k| + |s| <= 2N, s == k (mod 2)}.
struct SupportSet {
  int n = 0;
  std::vector<std::pair<i64, i64>> points;  // sorted

  bool contains(i64 k, i64 tau) const {
    return std::binary_search(points.begin(), points.end(), std::make_pair(k, tau));
  }
};

inline SupportSet support_set(int N) {
  if (N < 1) throw std::invalid_argument("support_set: N must be >= 1");
  SupportSet s;
  s.n = N;
  s.points.reserve(static_cast<std::size_t>(2 * N + 1) * (2 * N));
  for (int m = -N; m <= N; ++m)
    for (int n = -N; n <= N; ++n)
      if (m != n)
        s.points.emplace_back(static_cast<i64>(m) - n,
                              static_cast<i64>(m) * m - static_cast<i64>(n) * n);
  std::sort(s.points.begin(), s.points.end());
  // off-diagonal (m,n) -> (k,tau) is injective, so no duplicates to erase
  return s;
}

inline i64 r_count(const SupportSet& s, i64 alpha, i64 beta) {
  if (alpha == 0 && beta == 0) throw std::invalid_argument("r_count: zero shift rejected");
  i64 c = 0;
  for (const auto& [k, tau] : s.points)
    if (s.contains(k - alpha, tau - beta)) ++c;
  return c;
}

inline i64 r_count(int N, i64 alpha, i64 beta) { return r_count(support_set(N), alpha, beta); }

inline int divisor_count(i64 alpha) {
  if (alpha == 0) throw std::invalid_argument("divisor_count: zero input");
  i64 a = std::abs(alpha);
  int c = 0;
  for (i64 i = 1; i * i <= a; ++i)
    if (a % i == 0) c += (i * i == a) ? 1 : 2;
  return c;
}

struct CountReport {
  int n = 0;
  i64 r_max = 0;
  i64 argmax_alpha = 0, argmax_beta = 0;
  // max_beta r(alpha, beta) per alpha in [-4N, 4N]
  std::vector<i64> per_alpha_max;
  // full nonzero table, kept only for small N (memory)
  std::map<std::pair<i64, i64>, i64> counts;
  double analytic_bound = 0.0;  // N (1 + ln N * max_{1<=a<=4N} d(a))
  double bound_ratio = 0.0;     // r_max / analytic_bound

  i64 alpha_of_index(std::size_t i) const { return static_cast<i64>(i) - 4 * n; }
};

// Exact maximum of r over all shifts != (0,0), by histogramming differences
// of support-point pairs: one pass over pairs, grouped by the k-columns so
// the per-alpha accumulator is a dense beta vector.
inline CountReport r_max(int N, int budget = 64, bool keep_full_table = false) {
  if (N > 256) throw std::invalid_argument("r_max: N exceeds the hard budget of 256");
  if (N > budget)
    throw std::invalid_argument("r_max: N=" + std::to_string(N) + " exceeds budget " +
                                std::to_string(budget));
  CountReport rep;
  rep.n = N;
  rep.per_alpha_max.assign(static_cast<std::size_t>(8 * N + 1), 0);

  // columns: for each k, the sorted tau values
  std::vector<std::vector<i64>> col(static_cast<std::size_t>(4 * N + 1));
  SupportSet s = support_set(N);
  for (const auto& [k, tau] : s.points) col[static_cast<std::size_t>(k + 2 * N)].push_back(tau);

  const i64 beta_span = 2 * static_cast<i64>(N) * N;
  std::vector<i64> acc(static_cast<std::size_t>(4 * beta_span + 1), 0);
  std::vector<std::size_t> touched;
  touched.reserve(4096);

  const bool keep_table = keep_full_table && N <= 16;
  for (i64 alpha = -4 * N; alpha <= 4 * N; ++alpha) {
    touched.clear();
    for (i64 k1 = -2 * N; k1 <= 2 * N; ++k1) {
      i64 k2 = k1 - alpha;
      if (k2 < -2 * N || k2 > 2 * N) continue;
      const auto& c1 = col[static_cast<std::size_t>(k1 + 2 * N)];
      const auto& c2 = col[static_cast<std::size_t>(k2 + 2 * N)];
      if (c1.empty() || c2.empty()) continue;
      for (i64 t1 : c1)
        for (i64 t2 : c2) {
          std::size_t idx = static_cast<std::size_t>(t1 - t2 + 2 * beta_span);
          if (acc[idx] == 0) touched.push_back(idx);
          ++acc[idx];
        }
    }
    for (std::size_t idx : touched) {
      i64 beta = static_cast<i64>(idx) - 2 * beta_span;
      i64 c = acc[idx];
      acc[idx] = 0;
      if (alpha == 0 && beta == 0) continue;
      rep.per_alpha_max[static_cast<std::size_t>(alpha + 4 * N)] =
          std::max(rep.per_alpha_max[static_cast<std::size_t>(alpha + 4 * N)], c);
      if (keep_table) rep.counts[{alpha, beta}] = c;
      if (c > rep.r_max) {
        rep.r_max = c;
        rep.argmax_alpha = alpha;
        rep.argmax_beta = beta;
      }
    }
  }

  int dmax = 0;
  for (i64 a = 1; a <= 4 * N; ++a) dmax = std::max(dmax, divisor_count(a));
  rep.analytic_bound = N * (1.0 + std::log(static_cast<double>(N)) * dmax);
  rep.bound_ratio = static_cast<double>(rep.r_max) / rep.analytic_bound;
  return rep;
}

// Bezout structure of k s - (k - alpha) s' = beta: a particular solution and
// the lattice step ((k-alpha)/g, k/g), empty when g = gcd(k, alpha) does not
// divide beta.
struct GcdSolution {
  i64 g = 0;
  i64 s0 = 0, s0_prime = 0;
  i64 step_s = 0, step_s_prime = 0;
};

namespace detail {
inline i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
  if (b == 0) {
    x = (a >= 0) ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  i64 x1 = 0, y1 = 0;
  i64 g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}
}  // namespace detail

inline std::optional<GcdSolution> gcd_solution_structure(i64 k, i64 alpha, i64 beta) {
  if (k == 0 || k == alpha) throw std::invalid_argument("gcd_solution_structure: degenerate k");
  i64 km = k - alpha;
  i64 x = 0, y = 0;
  // solve k*x + (-km)*y = g
  i64 g = detail::ext_gcd(k, -km, x, y);
  if (beta % g != 0) return std::nullopt;
  i64 q = beta / g;
  GcdSolution sol;
  sol.g = g;
  sol.s0 = x * q;
  sol.s0_prime = y * q;
  sol.step_s = km / g;
  sol.step_s_prime = k / g;
  // substitution check; the algebra above must close exactly
  if (k * sol.s0 - km * sol.s0_prime != beta)
    throw std::runtime_error("gcd_solution_structure: residual after substitution");
  if (k * sol.step_s - km * sol.step_s_prime != 0)
    throw std::runtime_error("gcd_solution_structure: lattice step is not null");
  return sol;
}

// Number of (k, s, s') solving the boxed Diophantine system
//   k s - (k-alpha) s' = beta, |k|+|s| <= 2N, |k-alpha|+|s'| <= 2N,
//   k != 0, k != alpha,
// walked along the solution lattice per k.  The system drops the parity
// constraint, so this upper-bounds r_count.
inline i64 diophantine_count(int N, i64 alpha, i64 beta) {
  if (alpha == 0 && beta == 0) throw std::invalid_argument("diophantine_count: zero shift");
  i64 total = 0;
  for (i64 k = -2 * N; k <= 2 * N; ++k) {
    if (k == 0 || k == alpha) continue;
    i64 km = k - alpha;
    i64 b1 = 2 * N - std::abs(k);
    i64 b2 = 2 * N - std::abs(km);
    if (b1 < 0 || b2 < 0) continue;
    auto sol = gcd_solution_structure(k, alpha, beta);
    if (!sol) continue;
    // |s0 + t*step_s| <= b1 and |s0' + t*step_s'| <= b2, steps are nonzero
    auto ceil_div = [](i64 p, i64 q) {
      return p / q + ((p % q != 0 && (p > 0) == (q > 0)) ? 1 : 0);
    };
    auto floor_div = [](i64 p, i64 q) {
      return p / q - ((p % q != 0 && (p > 0) != (q > 0)) ? 1 : 0);
    };
    auto t_range = [&](i64 c, i64 st, i64 bound, i64& lo, i64& hi) {
      // -bound - c <= t*st <= bound - c
      i64 a = -bound - c, b = bound - c;
      if (st > 0) {
        lo = ceil_div(a, st);
        hi = floor_div(b, st);
      } else {
        lo = ceil_div(b, st);
        hi = floor_div(a, st);
      }
    };
    i64 lo1, hi1, lo2, hi2;
    t_range(sol->s0, sol->step_s, b1, lo1, hi1);
    t_range(sol->s0_prime, sol->step_s_prime, b2, lo2, hi2);
    i64 lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
    if (hi >= lo) total += hi - lo + 1;
  }
  return total;
}

}  // namespace tdlab

#endif
