// Torus Fourier representation against the orthonormal basis
// e_n(x) = (2*pi)^{-1/2} e^{inx}, with exact trigonometric quadrature,
// free Schroedinger evolution, and Dirichlet projection.
#ifndef TDLAB_FOURIER_HPP
#define TDLAB_FOURIER_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdlab {

using cd = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double inv_sqrt_two_pi = 0.39894228040143267793994605993438;

// A trigonometric polynomial of bandwidth M, stored as coefficients against
// e_n for n in [-M, M].  Parseval: squared L2 norm = sum of |coeff|^2.
struct FourierField {
  int cutoff = 0;
  std::vector<cd> coeffs;  // index n + cutoff

  FourierField() = default;
  explicit FourierField(int M) : cutoff(M), coeffs(2 * M + 1, cd(0.0, 0.0)) {
    if (M < 0) throw std::invalid_argument("FourierField: cutoff must be >= 0");
  }

  cd& at(int n) { return coeffs[static_cast<std::size_t>(n + cutoff)]; }
  const cd& at(int n) const { return coeffs[static_cast<std::size_t>(n + cutoff)]; }

  // Coefficient read that treats modes outside [-M, M] as zero.
  cd coeff_or_zero(int n) const {
    if (n < -cutoff || n > cutoff) return cd(0.0, 0.0);
    return at(n);
  }

  double l2_norm_sq() const {
    double s = 0.0;
    for (const cd& c : coeffs) s += std::norm(c);
    return s;
  }
  double l2_norm() const { return std::sqrt(l2_norm_sq()); }
};

inline cd inner_product(const FourierField& f, const FourierField& g) {
  // <f, g> = sum conj(f_n) g_n over the common window.
  int M = std::min(f.cutoff, g.cutoff);
  cd s(0.0, 0.0);
  for (int n = -M; n <= M; ++n) s += std::conj(f.at(n)) * g.at(n);
  return s;
}

inline FourierField basis_e(int n, int M) {
  if (std::abs(n) > M)
    throw std::invalid_argument("basis_e: |n| exceeds the cutoff (" +
                                std::to_string(n) + " vs M=" + std::to_string(M) + ")");
  FourierField f(M);
  f.at(n) = cd(1.0, 0.0);
  return f;
}

// Phase of e^{i theta} for theta = factor * t with integer factor, reducing t
// modulo 2*pi first.  Integer-frequency evolutions are exactly 2*pi periodic
// under this reduction (std::remainder is exact).
inline cd integer_frequency_phase(long long factor, double t) {
  double r = std::remainder(t, two_pi);
  return std::polar(1.0, static_cast<double>(factor) * r);
}

// u(t) = U(t) u0: multiply the n-th coefficient by e^{-i n^2 t}.
inline FourierField free_evolve(const FourierField& f, double t) {
  FourierField out = f;
  for (int n = -f.cutoff; n <= f.cutoff; ++n)
    out.at(n) = f.at(n) * integer_frequency_phase(-static_cast<long long>(n) * n, t);
  return out;
}

// P_{<=N}: zero all coefficients with |n| > N.  Idempotent, L2-contractive.
inline FourierField dirichlet_project(const FourierField& f, int N) {
  if (N < 0) throw std::invalid_argument("dirichlet_project: N must be >= 0");
  FourierField out = f;
  for (int n = -f.cutoff; n <= f.cutoff; ++n)
    if (std::abs(n) > N) out.at(n) = cd(0.0, 0.0);
  return out;
}

// Uniform grid x_k = 2*pi*k/K.  Trapezoid quadrature on it integrates any
// trigonometric monomial e^{inx} with |n| < K exactly.
struct TorusGrid {
  int size = 1;

  TorusGrid() = default;
  explicit TorusGrid(int K) : size(K) {
    if (K < 1) throw std::invalid_argument("TorusGrid: need at least one point");
  }
  static TorusGrid for_bandwidth(int M, int oversample = 4) {
    return TorusGrid(oversample * (2 * M + 1));
  }

  double point(int k) const { return two_pi * static_cast<double>(k) / size; }
  double weight() const { return two_pi / size; }
};

// Unit phasor table W[j] = e^{2 pi i j / K}; indices are reduced exactly in
// integer arithmetic so uniform-grid synthesis stays reproducible bit for bit.
struct PhasorTable {
  int size;
  std::vector<cd> w;
  explicit PhasorTable(int K) : size(K), w(static_cast<std::size_t>(K)) {
    for (int j = 0; j < K; ++j) w[static_cast<std::size_t>(j)] = std::polar(1.0, two_pi * j / K);
  }
  const cd& forward(std::int64_t idx) const {  // e^{+2 pi i idx / K}
    std::int64_t r = idx % size;
    if (r < 0) r += size;
    return w[static_cast<std::size_t>(r)];
  }
};

struct SampledField {
  TorusGrid grid;
  std::vector<cd> values;

  SampledField() = default;
  explicit SampledField(const TorusGrid& g) : grid(g), values(static_cast<std::size_t>(g.size), cd(0.0, 0.0)) {}
};

inline SampledField synthesize(const FourierField& f, const TorusGrid& g) {
  SampledField s(g);
  PhasorTable tab(g.size);
  const int M = f.cutoff;
  for (int j = 0; j < g.size; ++j) {
    cd acc(0.0, 0.0);
    std::int64_t idx = static_cast<std::int64_t>(-M) * j;
    for (int n = -M; n <= M; ++n, idx += j) acc += f.at(n) * tab.forward(idx);
    s.values[static_cast<std::size_t>(j)] = acc * inv_sqrt_two_pi;
  }
  return s;
}

// Discrete analysis normalized against e_n: coeff(n) ~ int conj(e_n) s dx by
// the trapezoid rule.  Exact inverse of synthesize when K >= 2M+1.
inline FourierField analyze(const SampledField& s, int M) {
  const int K = s.grid.size;
  if (K < 2 * M + 1)
    throw std::invalid_argument("analyze: grid of " + std::to_string(K) +
                                " points aliases bandwidth " + std::to_string(M) +
                                " (need K >= 2M+1)");
  FourierField f(M);
  PhasorTable tab(K);
  const double scale = std::sqrt(two_pi) / K;
  for (int n = -M; n <= M; ++n) {
    cd acc(0.0, 0.0);
    std::int64_t idx = 0;
    for (int j = 0; j < K; ++j, idx += n)
      acc += s.values[static_cast<std::size_t>(j)] * std::conj(tab.forward(idx));
    f.at(n) = acc * scale;
  }
  return f;
}

// (sum w |v|^p)^{1/p} over an equal-weight block of samples; `measure` is the
// total measure of the domain the samples tile (2*pi for the torus, 4*pi^2
// for space-time blocks).  p = infinity is the max.
inline double lp_norm_block(const std::vector<cd>& values, double p, double measure) {
  if (values.empty()) throw std::invalid_argument("lp_norm: empty sample block");
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cd& v : values) m = std::max(m, std::abs(v));
    return m;
  }
  // Kahan-compensated accumulation; blocks can hold millions of samples.
  double sum = 0.0, comp = 0.0;
  for (const cd& v : values) {
    double term = std::pow(std::abs(v), p) - comp;
    double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  double mean = sum / static_cast<double>(values.size());
  return std::pow(mean * measure, 1.0 / p);
}

inline double lp_norm(const SampledField& s, double p) {
  return lp_norm_block(s.values, p, two_pi);
}

// Seeded standard complex Gaussian draws.  Hand-rolled Box-Muller on top of
// mt19937_64 so the stream does not depend on the standard library's
// distribution internals.
struct GaussianSource {
  std::mt19937_64 engine;
  explicit GaussianSource(std::uint64_t seed) : engine(seed) {}

  double real() {
    // u1 in (0,1], u2 in [0,1)
    double u1 = (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }
  cd complex_unit_variance() { return cd(real(), real()) * std::sqrt(0.5); }
};

inline FourierField random_field(int M, std::uint64_t seed) {
  GaussianSource src(seed);
  FourierField f(M);
  for (int n = -M; n <= M; ++n) f.at(n) = src.complex_unit_variance();
  return f;
}

}  // namespace tdlab

#endif
