// Dense complex matrices, a cyclic Jacobi eigensolver for Hermitian
// matrices, and a radix-2 FFT for the propagator grids.
#ifndef TDLAB_LINALG_HPP
#define TDLAB_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tdlab/fourier.hpp"

namespace tdlab {

struct CMatrix {
  int rows = 0, cols = 0;
  std::vector<cd> data;  // row-major

  CMatrix() = default;
  CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, cd(0.0, 0.0)) {}

  cd& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const cd& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  double frobenius() const {
    double s = 0.0;
    for (const cd& v : data) s += std::norm(v);
    return std::sqrt(s);
  }

  CMatrix adjoint() const {
    CMatrix a(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(j, i) = std::conj((*this)(i, j));
    return a;
  }

  bool is_hermitian(double tol = 1e-12) const {
    if (rows != cols) return false;
    double scale = std::max(1.0, frobenius());
    for (int i = 0; i < rows; ++i)
      for (int j = i; j < cols; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol * scale) return false;
    return true;
  }
};

inline CMatrix multiply(const CMatrix& a, const CMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("multiply: shape mismatch");
  CMatrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      cd aik = a(i, k);
      if (aik == cd(0.0, 0.0)) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

struct EigenResult {
  std::vector<double> eigenvalues;  // unsorted, as produced by the sweep
  CMatrix vectors;                  // columns are eigenvectors
};

// Cyclic Jacobi rotations for a complex Hermitian matrix.  Off-diagonal
// threshold 1e-13 (relative to the Frobenius norm), at most 30 sweeps.
inline EigenResult jacobi_hermitian_eigensolve(const CMatrix& input,
                                               double off_threshold = 1e-13,
                                               int max_sweeps = 30) {
  if (input.rows != input.cols) throw std::invalid_argument("jacobi: square matrix required");
  const int n = input.rows;
  CMatrix a = input;
  CMatrix v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = cd(1.0, 0.0);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  const double stop = off_threshold * std::max(1.0, input.frobenius());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        cd g = a(p, q);
        double ag = std::abs(g);
        if (ag <= 1e-300) continue;
        double alpha = a(p, p).real();
        double beta = a(q, q).real();
        double tau = (beta - alpha) / (2.0 * ag);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double sigma = t * c;
        cd phase = g / ag;
        cd s = sigma * phase;

        // columns p, q of A and V (A column-updated, rows follow by symmetry)
        for (int i = 0; i < n; ++i) {
          cd aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - std::conj(s) * aiq;
          a(i, q) = s * aip + c * aiq;
          cd vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - std::conj(s) * viq;
          v(i, q) = s * vip + c * viq;
        }
        for (int j = 0; j < n; ++j) {
          cd apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = std::conj(s) * apj + c * aqj;
        }
        a(p, q) = cd(0.0, 0.0);
        a(q, p) = cd(0.0, 0.0);
        a(p, p) = cd(a(p, p).real(), 0.0);
        a(q, q) = cd(a(q, q).real(), 0.0);
      }
    }
  }

  EigenResult res;
  res.eigenvalues.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) res.eigenvalues[static_cast<std::size_t>(i)] = a(i, i).real();
  res.vectors = std::move(v);
  return res;
}

// In-place iterative radix-2 FFT, sign = -1 forward / +1 inverse (unscaled).
// Twiddles come from a cached table of direct sincos values; a multiplicative
// twiddle recurrence would accumulate O(K eps) per pass, which is visible in
// long split-step phase compositions.
inline const std::vector<cd>& fft_twiddle_table(std::size_t n) {
  thread_local std::vector<std::vector<cd>> cache;  // index log2(n)
  std::size_t lg = 0;
  while ((std::size_t{1} << lg) < n) ++lg;
  if (cache.size() <= lg) cache.resize(lg + 1);
  std::vector<cd>& tab = cache[lg];
  if (tab.size() != n / 2) {
    tab.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j)
      tab[j] = std::polar(1.0, -two_pi * static_cast<double>(j) / static_cast<double>(n));
  }
  return tab;
}

inline void fft_pow2(std::vector<cd>& x, int sign) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: size must be a power of two");
  if (n == 1) return;
  const std::vector<cd>& tab = fft_twiddle_table(n);
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cd w = tab[k * stride];
        if (sign > 0) w = std::conj(w);
        cd u = x[i + k];
        cd t = w * x[i + k + len / 2];
        x[i + k] = u + t;
        x[i + k + len / 2] = u - t;
      }
    }
  }
}

// Modified Gram-Schmidt with one re-orthogonalization pass.
inline std::vector<FourierField> orthonormalize(std::vector<FourierField> vecs) {
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < vecs.size(); ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        cd proj = inner_product(vecs[i], vecs[j]);
        for (int n = -vecs[j].cutoff; n <= vecs[j].cutoff; ++n)
          vecs[j].at(n) -= proj * vecs[i].coeff_or_zero(n);
      }
      double nrm = vecs[j].l2_norm();
      if (nrm < 1e-14) throw std::runtime_error("orthonormalize: rank deficiency");
      for (cd& c : vecs[j].coeffs) c /= nrm;
    }
  }
  return vecs;
}

}  // namespace tdlab

#endif
