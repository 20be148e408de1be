#include <catch2/catch_amalgamated.hpp>

#include "tdlab/linalg.hpp"

using namespace tdlab;

namespace {

CMatrix random_hermitian_matrix(int n, std::uint64_t seed) {
  GaussianSource src(seed);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      cd z = src.complex_unit_variance();
      if (i == j) {
        a(i, j) = cd(z.real(), 0.0);
      } else {
        a(i, j) = z;
        a(j, i) = std::conj(z);
      }
    }
  return a;
}

}  // namespace

TEST_CASE("jacobi eigensolver on a 2x2 swap block") {
  CMatrix a(2, 2);
  a(0, 1) = cd(1.0, 0.0);
  a(1, 0) = cd(1.0, 0.0);
  EigenResult er = jacobi_hermitian_eigensolve(a);
  std::vector<double> ev = er.eigenvalues;
  std::sort(ev.begin(), ev.end());
  REQUIRE(ev[0] == Catch::Approx(-1.0).margin(1e-14));
  REQUIRE(ev[1] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("jacobi eigensolver residuals on random hermitian 65x65") {
  CMatrix a = random_hermitian_matrix(65, 99);
  EigenResult er = jacobi_hermitian_eigensolve(a);
  for (int j = 0; j < 65; ++j) {
    double resid = 0.0, vnorm = 0.0;
    for (int i = 0; i < 65; ++i) {
      cd av(0.0, 0.0);
      for (int k = 0; k < 65; ++k) av += a(i, k) * er.vectors(k, j);
      resid += std::norm(av - er.eigenvalues[static_cast<std::size_t>(j)] * er.vectors(i, j));
      vnorm += std::norm(er.vectors(i, j));
    }
    REQUIRE(std::sqrt(resid) < 1e-10);
    REQUIRE(std::sqrt(vnorm) == Catch::Approx(1.0).margin(1e-12));
  }
  // orthonormality of eigenvectors
  for (int j = 0; j < 10; ++j)
    for (int k = j + 1; k < 10; ++k) {
      cd ip(0.0, 0.0);
      for (int i = 0; i < 65; ++i) ip += std::conj(er.vectors(i, j)) * er.vectors(i, k);
      REQUIRE(std::abs(ip) < 1e-10);
    }
}

TEST_CASE("fft against the direct transform") {
  const int k = 64;
  std::vector<cd> x(k);
  GaussianSource src(5);
  for (cd& v : x) v = src.complex_unit_variance();
  std::vector<cd> y = x;
  fft_pow2(y, -1);
  for (int b = 0; b < k; b += 7) {
    cd acc(0.0, 0.0);
    for (int j = 0; j < k; ++j) acc += x[static_cast<std::size_t>(j)] * std::polar(1.0, -two_pi * b * j / k);
    REQUIRE(std::abs(acc - y[static_cast<std::size_t>(b)]) < 1e-11);
  }
  // inverse round trip
  fft_pow2(y, +1);
  for (int j = 0; j < k; ++j)
    REQUIRE(std::abs(y[static_cast<std::size_t>(j)] / static_cast<double>(k) - x[static_cast<std::size_t>(j)]) < 1e-13);
  std::vector<cd> bad(12);
  REQUIRE_THROWS_AS(fft_pow2(bad, -1), std::invalid_argument);
}

TEST_CASE("modified gram-schmidt produces an orthonormal family") {
  std::vector<FourierField> vecs;
  for (std::uint64_t j = 0; j < 6; ++j) vecs.push_back(random_field(10, 40 + j));
  std::vector<FourierField> q = orthonormalize(vecs);
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i; j < q.size(); ++j) {
      cd ip = inner_product(q[i], q[j]);
      cd expect = (i == j) ? cd(1.0, 0.0) : cd(0.0, 0.0);
      REQUIRE(std::abs(ip - expect) < 1e-12);
    }
}
