// Finite-rank density operators on L2(T) in Fourier representation:
// G(m,n) = <e_m, gamma e_n> over the window [-M, M]^2, with Schatten norms,
// densities, renormalised densities, free conjugation, and duality pairing.
#ifndef TDLAB_OPERATORS_HPP
#define TDLAB_OPERATORS_HPP

#include <algorithm>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>

#include "tdlab/fourier.hpp"
#include "tdlab/linalg.hpp"

namespace tdlab {

// Singular value decomposition data: a_j >= a_{j+1} >= 0 with orthonormal
// left/right mode-coefficient vectors, A = sum a_j |phi_j><psi_j|.
struct SpectralData {
  std::vector<double> singular_values;
  std::vector<FourierField> left;   // phi_j
  std::vector<FourierField> right;  // psi_j
  std::vector<double> eigenvalues;  // signed, Hermitian route only (else empty)
};

class DensityOperator {
 public:
  DensityOperator() = default;
  explicit DensityOperator(int M) : cutoff_(M), g_(2 * M + 1, 2 * M + 1), cache_(std::make_shared<Cache>()) {}
  DensityOperator(int M, CMatrix g) : cutoff_(M), g_(std::move(g)), cache_(std::make_shared<Cache>()) {
    if (g_.rows != 2 * M + 1 || g_.cols != 2 * M + 1)
      throw std::invalid_argument("DensityOperator: matrix shape does not match cutoff");
  }

  int cutoff() const { return cutoff_; }
  int dim() const { return 2 * cutoff_ + 1; }

  cd entry(int m, int n) const { return g_(m + cutoff_, n + cutoff_); }
  void set_entry(int m, int n, cd v) { g_(m + cutoff_, n + cutoff_) = v; }
  const CMatrix& matrix() const { return g_; }

  cd trace() const {
    cd t(0.0, 0.0);
    for (int m = -cutoff_; m <= cutoff_; ++m) t += entry(m, m);
    return t;
  }

  bool hermitian(double tol = 1e-12) const { return g_.is_hermitian(tol); }

  double offdiagonal_l2() const {
    double s = 0.0;
    for (int m = -cutoff_; m <= cutoff_; ++m)
      for (int n = -cutoff_; n <= cutoff_; ++n)
        if (m != n) s += std::norm(entry(m, n));
    return std::sqrt(s);
  }

  // Cached decomposition, computed once under a single-initialization guard.
  const SpectralData& spectral_data() const {
    std::call_once(cache_->flag, [this]() { cache_->data = compute_spectral_data(); });
    return cache_->data;
  }

  // For operators assembled from an already-orthonormal rank-one sum the
  // decomposition is known exactly; skip the eigensolve.
  void install_known_spectrum(SpectralData sd) const {
    std::call_once(cache_->flag, [&]() { cache_->data = std::move(sd); });
  }

 private:
  struct Cache {
    std::once_flag flag;
    SpectralData data;
  };

  SpectralData compute_spectral_data() const;

  int cutoff_ = 0;
  CMatrix g_;
  std::shared_ptr<Cache> cache_;
};

namespace detail {

inline FourierField column_to_field(const CMatrix& mat, int col, int M) {
  FourierField f(M);
  for (int i = 0; i < mat.rows; ++i) f.coeffs[static_cast<std::size_t>(i)] = mat(i, col);
  return f;
}

}  // namespace detail

inline SpectralData DensityOperator::compute_spectral_data() const {
  SpectralData sd;
  const int n = dim();
  if (hermitian()) {
    EigenResult er = jacobi_hermitian_eigensolve(g_);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double fa = std::abs(er.eigenvalues[static_cast<std::size_t>(a)]);
      double fb = std::abs(er.eigenvalues[static_cast<std::size_t>(b)]);
      if (fa != fb) return fa > fb;
      return a < b;
    });
    for (int idx : order) {
      double lam = er.eigenvalues[static_cast<std::size_t>(idx)];
      FourierField v = detail::column_to_field(er.vectors, idx, cutoff_);
      sd.eigenvalues.push_back(lam);
      sd.singular_values.push_back(std::abs(lam));
      sd.left.push_back(v);
      if (lam < 0.0)
        for (cd& c : v.coeffs) c = -c;
      sd.right.push_back(std::move(v));
    }
  } else {
    // Singular values through the Hermitian eigenproblem of A^* A; negative
    // eigenvalues above -1e-14 are clamped to zero.
    CMatrix ata = multiply(g_.adjoint(), g_);
    EigenResult er = jacobi_hermitian_eigensolve(ata);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double fa = er.eigenvalues[static_cast<std::size_t>(a)];
      double fb = er.eigenvalues[static_cast<std::size_t>(b)];
      if (fa != fb) return fa > fb;
      return a < b;
    });
    double scale = std::max(1.0, g_.frobenius());
    for (int idx : order) {
      double lam = er.eigenvalues[static_cast<std::size_t>(idx)];
      if (lam < 0.0) {
        if (lam < -1e-14 * scale * scale)
          throw std::runtime_error("spectral_data: A*A produced a significantly negative eigenvalue");
        lam = 0.0;
      }
      double sv = std::sqrt(lam);
      FourierField psi = detail::column_to_field(er.vectors, idx, cutoff_);
      sd.singular_values.push_back(sv);
      sd.right.push_back(psi);
      FourierField phi(cutoff_);
      if (sv > 1e-14 * scale) {
        for (int i = 0; i < n; ++i) {
          cd acc(0.0, 0.0);
          for (int j = 0; j < n; ++j) acc += g_(i, j) * psi.coeffs[static_cast<std::size_t>(j)];
          phi.coeffs[static_cast<std::size_t>(i)] = acc / sv;
        }
      }
      sd.left.push_back(std::move(phi));
    }
  }
  return sd;
}

inline DensityOperator from_rank_one_sum(const std::vector<double>& weights,
                                         const std::vector<FourierField>& vectors) {
  if (weights.size() != vectors.size())
    throw std::invalid_argument("from_rank_one_sum: weights/vectors length mismatch");
  if (vectors.empty()) throw std::invalid_argument("from_rank_one_sum: empty family");
  const int M = vectors.front().cutoff;
  for (const FourierField& v : vectors)
    if (v.cutoff != M) throw std::invalid_argument("from_rank_one_sum: vectors must share a cutoff");

  DensityOperator out(M);
  CMatrix g(2 * M + 1, 2 * M + 1);
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    // only touch the nonzero support of each vector
    std::vector<int> supp;
    for (int n = -M; n <= M; ++n)
      if (vectors[j].at(n) != cd(0.0, 0.0)) supp.push_back(n);
    for (int m : supp)
      for (int n : supp)
        g(m + M, n + M) += weights[j] * vectors[j].at(m) * std::conj(vectors[j].at(n));
  }
  out = DensityOperator(M, std::move(g));

  // If the family is orthonormal the decomposition is the input itself.
  bool orthonormal = true;
  for (std::size_t i = 0; i < vectors.size() && orthonormal; ++i)
    for (std::size_t j = i; j < vectors.size() && orthonormal; ++j) {
      cd ip = inner_product(vectors[i], vectors[j]);
      cd expect = (i == j) ? cd(1.0, 0.0) : cd(0.0, 0.0);
      if (std::abs(ip - expect) > 1e-12) orthonormal = false;
    }
  if (orthonormal) {
    SpectralData sd;
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (std::abs(weights[a]) != std::abs(weights[b])) return std::abs(weights[a]) > std::abs(weights[b]);
      return a < b;
    });
    for (std::size_t j : order) {
      sd.eigenvalues.push_back(weights[j]);
      sd.singular_values.push_back(std::abs(weights[j]));
      sd.left.push_back(vectors[j]);
      FourierField psi = vectors[j];
      if (weights[j] < 0.0)
        for (cd& c : psi.coeffs) c = -c;
      sd.right.push_back(std::move(psi));
    }
    out.install_known_spectrum(std::move(sd));
  }
  return out;
}

inline double schatten_norm(const DensityOperator& a, double alpha) {
  if (alpha < 1.0) throw std::invalid_argument("schatten_norm: alpha must be >= 1");
  if (alpha == 2.0) return a.matrix().frobenius();
  const std::vector<double>& sv = a.spectral_data().singular_values;
  if (std::isinf(alpha)) return sv.empty() ? 0.0 : *std::max_element(sv.begin(), sv.end());
  double s = 0.0;
  for (double v : sv) s += std::pow(v, alpha);
  return std::pow(s, 1.0 / alpha);
}

// Density as a trig polynomial of bandwidth 2M:
//   rho_A(x) = (1/2pi) sum_{m,n} G(m,n) e^{i(m-n)x},
// returned in coefficient form against e_k (coeff k = c_k / sqrt(2pi) with
// c_k the k-th diagonal sum of G).
inline FourierField density_coeffs(const DensityOperator& a) {
  const int M = a.cutoff();
  FourierField f(2 * M);
  for (int m = -M; m <= M; ++m)
    for (int n = -M; n <= M; ++n) f.at(m - n) += a.entry(m, n);
  for (cd& c : f.coeffs) c *= inv_sqrt_two_pi;
  return f;
}

inline SampledField density(const DensityOperator& a, const TorusGrid& g) {
  return synthesize(density_coeffs(a), g);
}

inline FourierField renormalised_density_coeffs(const DensityOperator& a) {
  FourierField f = density_coeffs(a);
  f.at(0) = cd(0.0, 0.0);  // subtract Tr(A)/(2pi)
  return f;
}

inline SampledField renormalised_density(const DensityOperator& a, const TorusGrid& g) {
  return synthesize(renormalised_density_coeffs(a), g);
}

// U(t) A U(t)^*: G(m,n) -> e^{-it(m^2-n^2)} G(m,n).
inline DensityOperator conjugate_free(const DensityOperator& a, double t) {
  const int M = a.cutoff();
  CMatrix g(2 * M + 1, 2 * M + 1);
  for (int m = -M; m <= M; ++m)
    for (int n = -M; n <= M; ++n) {
      long long f = static_cast<long long>(n) * n - static_cast<long long>(m) * m;
      g(m + M, n + M) = a.entry(m, n) * integer_frequency_phase(f, t);
    }
  return DensityOperator(M, std::move(g));
}

// Multiplication operator by V in mode space: (M_V)(m,n) = v_{m-n} where
// v_k = (1/2pi) int V e^{-ikx} dx, a convolution (Toeplitz) matrix.
inline CMatrix multiplication_matrix(const SampledField& v, int M) {
  const int K = v.grid.size;
  PhasorTable tab(K);
  std::vector<cd> vk(static_cast<std::size_t>(4 * M + 1));
  for (int k = -2 * M; k <= 2 * M; ++k) {
    cd acc(0.0, 0.0);
    std::int64_t idx = 0;
    for (int j = 0; j < K; ++j, idx += k)
      acc += v.values[static_cast<std::size_t>(j)] * std::conj(tab.forward(idx));
    vk[static_cast<std::size_t>(k + 2 * M)] = acc / static_cast<double>(K);
  }
  CMatrix m(2 * M + 1, 2 * M + 1);
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j) m(i + M, j + M) = vk[static_cast<std::size_t>((i - j) + 2 * M)];
  return m;
}

// Quadrature side of the duality int rho_A V dx = Tr(A M_V), on V's grid.
// The grid must integrate bandwidth 2M + bw(V) exactly; K >= 4M+2 enforced.
inline cd duality_pairing(const DensityOperator& a, const SampledField& v) {
  if (v.grid.size < 4 * a.cutoff() + 2)
    throw std::invalid_argument("duality_pairing: grid under-resolved for bandwidth 2M");
  SampledField rho = density(a, v.grid);
  cd acc(0.0, 0.0);
  for (std::size_t j = 0; j < rho.values.size(); ++j) acc += rho.values[j] * v.values[j];
  return acc * v.grid.weight();
}

// Operator side: Tr(A M_V) = sum_{m,n} G(m,n) v_{n-m}.
inline cd duality_pairing_operator_side(const DensityOperator& a, const SampledField& v) {
  const int M = a.cutoff();
  CMatrix mv = multiplication_matrix(v, M);
  cd acc(0.0, 0.0);
  for (int m = 0; m < a.dim(); ++m)
    for (int n = 0; n < a.dim(); ++n) acc += a.matrix()(m, n) * mv(n, m);
  return acc;
}

inline const SpectralData& hermitian_eig(const DensityOperator& a) {
  if (!a.hermitian())
    throw std::invalid_argument("hermitian_eig: operator is not Hermitian (use singular_data)");
  return a.spectral_data();
}

inline const SpectralData& singular_data(const DensityOperator& a) { return a.spectral_data(); }

// ---- container format -------------------------------------------------
// Text container: header (version, cutoff, hermitian flag) followed by the
// row-major complex entries, one "re im" pair per line.
inline void save_operator(const DensityOperator& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_operator: cannot open " + path);
  out << "tdlab-operator 1\n";
  out << "cutoff " << a.cutoff() << "\n";
  out << "hermitian " << (a.hermitian() ? 1 : 0) << "\n";
  out.precision(17);
  for (const cd& v : a.matrix().data) out << v.real() << " " << v.imag() << "\n";
  if (!out) throw std::runtime_error("save_operator: write failure on " + path);
}

inline DensityOperator load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_operator: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "tdlab-operator" || version != 1)
    throw std::runtime_error("load_operator: bad header in " + path);
  std::string key;
  int M = -1, herm = 0;
  in >> key >> M;
  if (key != "cutoff" || M < 0) throw std::runtime_error("load_operator: bad cutoff line");
  in >> key >> herm;
  if (key != "hermitian") throw std::runtime_error("load_operator: bad hermitian line");
  CMatrix g(2 * M + 1, 2 * M + 1);
  for (cd& v : g.data) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) throw std::runtime_error("load_operator: truncated entries");
    v = cd(re, im);
  }
  return DensityOperator(M, std::move(g));
}

}  // namespace tdlab

#endif
