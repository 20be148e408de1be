#include <catch2/catch_amalgamated.hpp>

#include "tdlab/strichartz.hpp"

using namespace tdlab;

namespace {

DensityOperator random_hermitian_op(int M, std::uint64_t seed) {
  GaussianSource src(seed);
  const int d = 2 * M + 1;
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      cd z = src.complex_unit_variance();
      if (i == j) {
        g(i, j) = cd(z.real(), 0.0);
      } else {
        g(i, j) = z;
        g(j, i) = std::conj(z);
      }
    }
  return DensityOperator(M, std::move(g));
}

DensityOperator random_rank_r(int rank, int M, std::uint64_t seed) {
  std::vector<FourierField> vecs = random_orthonormal_system(rank, M, seed);
  std::vector<double> w;
  GaussianSource src(seed + 17);
  for (int j = 0; j < rank; ++j) w.push_back(0.2 + std::abs(src.real()));
  return from_rank_one_sum(w, vecs);
}

}  // namespace

TEST_CASE("spacetime density assembly") {
  SECTION("diagonal operators renormalise to zero") {
    DensityOperator d(3);
    for (int n = -3; n <= 3; ++n) d.set_entry(n, n, cd(0.5, 0.0));
    SpaceTimeDensity rho = spacetime_density(d, 3, true);
    REQUIRE(rho.coeffs.empty());
    REQUIRE(std::abs(rho.sample(0.3, 1.2)) == 0.0);
  }
  SECTION("cosine family carries b(+-2n, 0) = 1/2") {
    DensityOperator g = cosine_family(3, 3);
    SpaceTimeDensity rho = spacetime_density(g, 3, true);
    REQUIRE(rho.coeffs.size() == 6);
    for (const auto& c : rho.coeffs) {
      REQUIRE(c.tau == 0);
      REQUIRE(std::abs(c.b - cd(0.5, 0.0)) < 1e-15);
      REQUIRE(std::abs(c.k) % 2 == 0);
    }
  }
  SECTION("dense count for a fully dense matrix") {
    DensityOperator g = random_hermitian_op(4, 3);
    SpaceTimeDensity rho = spacetime_density(g, 4, true);
    REQUIRE(rho.coeffs.size() == static_cast<std::size_t>(9 * 9 - 9));
  }
  SECTION("window above the cutoff rejected") {
    DensityOperator g = random_hermitian_op(3, 4);
    REQUIRE_THROWS_AS(spacetime_density(g, 4, true), std::invalid_argument);
  }
  SECTION("sampler matches the mode-by-mode oracle on a random rank-3 operator") {
    DensityOperator g = random_rank_r(3, 4, 99);
    SpaceTimeDensity rho = spacetime_density(g, 4, true);
    const SpectralData& sd = hermitian_eig(g);
    for (double t : {0.0, 0.37, 1.9}) {
      for (double x : {0.1, 2.0, 5.1}) {
        cd oracle(0.0, 0.0);
        for (std::size_t r = 0; r < sd.singular_values.size(); ++r) {
          if (sd.singular_values[r] < 1e-13) continue;
          FourierField u = free_evolve(sd.left[r], t);
          cd val(0.0, 0.0);
          for (int n = -4; n <= 4; ++n) val += u.at(n) * std::polar(1.0 / std::sqrt(two_pi), n * x);
          oracle += sd.eigenvalues[r] * cd(std::norm(val), 0.0);
        }
        oracle -= g.trace().real() / two_pi;
        REQUIRE(std::abs(rho.sample(t, x) - oracle) < 1e-10);
      }
    }
  }
}

TEST_CASE("exact L2 norm") {
  SECTION("cosine family gives sqrt(N/2)") {
    for (int n : {1, 4, 9}) {
      DensityOperator g = cosine_family(n, n);
      REQUIRE(l2_norm_exact(spacetime_density(g, n, true)) ==
              Catch::Approx(std::sqrt(n / 2.0)).margin(1e-13));
    }
  }
  SECTION("requires the renormalised flag") {
    DensityOperator g = cosine_family(2, 2);
    REQUIRE_THROWS_AS(l2_norm_exact(spacetime_density(g, 2, false)), std::invalid_argument);
  }
  SECTION("equals the off-diagonal l2 of G and lies below the HS norm") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      DensityOperator g = random_hermitian_op(5, 500 + seed);
      double l2 = l2_norm_exact(spacetime_density(g, 5, true));
      REQUIRE(l2 == Catch::Approx(g.offdiagonal_l2()).margin(1e-12));
      REQUIRE(l2 <= schatten_norm(g, 2.0) + 1e-12);
      REQUIRE(l2 < schatten_norm(g, 2.0) - 1e-12);  // diagonal present: strict
    }
  }
  SECTION("equality against the HS norm exactly when the diagonal vanishes") {
    DensityOperator g = random_hermitian_op(4, 70);
    CMatrix m = g.matrix();
    for (int i = 0; i < g.dim(); ++i) m(i, i) = cd(0.0, 0.0);
    DensityOperator hollow(4, std::move(m));
    double l2 = l2_norm_exact(spacetime_density(hollow, 4, true));
    REQUIRE(l2 == Catch::Approx(schatten_norm(hollow, 2.0)).margin(1e-13));
  }
  SECTION("quadrature cross-check at p = 2") {
    DensityOperator g = random_hermitian_op(4, 1234);
    SpaceTimeDensity rho = spacetime_density(g, 4, true);
    REQUIRE(lp_norm_quadrature(rho, 2.0) == Catch::Approx(l2_norm_exact(rho)).margin(1e-9));
  }
}

TEST_CASE("exact L4 norm") {
  SECTION("single cosine mode against the closed form") {
    DensityOperator g = cosine_family(1, 1);
    SpaceTimeDensity rho = spacetime_density(g, 1, true);
    double expect = std::pow(3.0 / 8.0, 0.25) / std::sqrt(two_pi);
    REQUIRE(l4_norm_exact(rho) == Catch::Approx(expect).margin(1e-12));
    REQUIRE(lp_norm_quadrature(rho, 4.0) == Catch::Approx(expect).margin(1e-12));
  }
  SECTION("zero density") {
    DensityOperator d(2);
    REQUIRE(l4_norm_exact(spacetime_density(d, 2, true)) == 0.0);
  }
  SECTION("random rank-2 at N = 6 agrees with quadrature to 1e-8") {
    DensityOperator g = random_rank_r(2, 6, 7);
    SpaceTimeDensity rho = spacetime_density(g, 6, true);
    REQUIRE(lp_norm_quadrature(rho, 4.0) == Catch::Approx(l4_norm_exact(rho)).margin(1e-8));
  }
  SECTION("coefficient budget enforced with a size diagnostic") {
    DensityOperator g = random_hermitian_op(6, 8);
    SpaceTimeDensity rho = spacetime_density(g, 6, true);
    REQUIRE_THROWS_AS(l4_norm_exact(rho, 10), BudgetError);
  }
}

TEST_CASE("the L4 chain closes numerically") {
  // || rho_bar ||^4 <= ( |g(0,0)|^2 + r_max ||b||^4 ) / (4 pi^2)
  for (int n : {4, 8, 16}) {
    SupportSet s = support_set(n);
    SpaceTimeDensity rho;
    rho.window = n;
    rho.renormalised = true;
    GaussianSource src(80 + static_cast<std::uint64_t>(n));
    double b4 = 0.0;
    for (const auto& [k, tau] : s.points) rho.coeffs.push_back({k, tau, src.complex_unit_variance()});
    for (const auto& c : rho.coeffs) b4 += std::norm(c.b);
    b4 = b4 * b4;
    double lhs = std::pow(l4_norm_exact(rho), 4.0);
    double rmax = static_cast<double>(r_max(n).r_max);
    double rhs = (b4 + rmax * b4) / (two_pi * two_pi);
    REQUIRE(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("lp quadrature") {
  SECTION("constants") {
    DensityOperator d(2);
    d.set_entry(0, 0, cd(two_pi * 0.4, 0.0));  // density constant 0.4
    SpaceTimeDensity rho = spacetime_density(d, 2, false);
    for (double p : {1.0, 2.0, 3.0}) {
      REQUIRE(lp_norm_quadrature(rho, p) ==
              Catch::Approx(0.4 * std::pow(two_pi * two_pi, 1.0 / p)).margin(1e-10));
    }
  }
  SECTION("time-independence detected: x profiles identical at all t") {
    DensityOperator g = cosine_family(4, 4);
    SpaceTimeDensity rho = spacetime_density(g, 4, true);
    REQUIRE(rho.time_independent());
    double dev = 0.0;
    for (double t : {0.0, 0.5, 2.75, 6.1})
      for (double x : {0.2, 1.1, 4.4}) dev = std::max(dev, std::abs(rho.sample(t, x) - rho.sample(0.0, x)));
    REQUIRE(dev < 1e-12);
  }
  SECTION("p below one rejected") {
    DensityOperator g = cosine_family(2, 2);
    REQUIRE_THROWS_AS(lp_norm_quadrature(spacetime_density(g, 2, true), 0.5), std::invalid_argument);
  }
  SECTION("refinement failure carries the last two values") {
    DensityOperator g = cosine_family(2, 2);
    SpaceTimeDensity rho = spacetime_density(g, 2, true);
    try {
      lp_norm_quadrature(rho, 3.0, 0, true, -1.0);  // unsatisfiable tolerance
      FAIL("expected a convergence diagnostic");
    } catch (const ConvergenceError& e) {
      REQUIRE(e.previous_value > 0.0);
      REQUIRE(e.last_value > 0.0);
      REQUIRE(std::abs(e.last_value - e.previous_value) < 1e-6 * e.last_value);
    }
  }
}

TEST_CASE("cosine family") {
  DensityOperator g1 = cosine_family(1, 1);
  SECTION("N = 1 density is (1 + cos 2x)/2 pi at t = 0") {
    SpaceTimeDensity rho = spacetime_density(g1, 1, false);
    for (double x : {0.0, 0.7, 3.0})
      REQUIRE(rho.sample(0.0, x).real() ==
              Catch::Approx((1.0 + std::cos(2.0 * x)) / two_pi).margin(1e-13));
  }
  SECTION("trace equals N") {
    REQUIRE(cosine_family(7, 9).trace().real() == Catch::Approx(7.0).margin(1e-13));
  }
  SECTION("schatten norms of the projection") {
    DensityOperator g = cosine_family(5, 5);
    for (double a : {1.0, 2.0, 4.0})
      REQUIRE(schatten_norm(g, a) == Catch::Approx(std::pow(5.0, 1.0 / a)).margin(1e-12));
  }
  SECTION("cutoff below N rejected") {
    REQUIRE_THROWS_AS(cosine_family(3, 2), std::invalid_argument);
  }
}

TEST_CASE("dirichlet closed form") {
  SECTION("x -> 0 limit is N/(2 pi)") {
    REQUIRE(dirichlet_closed_form(9, 0.0) == Catch::Approx(9.0 / two_pi).margin(1e-12));
    REQUIRE(dirichlet_closed_form(9, 1e-10) == Catch::Approx(9.0 / two_pi).margin(1e-7));
  }
  SECTION("N = 1 at pi/4 vanishes") {
    REQUIRE(std::abs(dirichlet_closed_form(1, two_pi / 8.0)) < 1e-14);
  }
  SECTION("matches the direct sum at N = 17 including near the singularities") {
    GaussianSource src(3);
    std::vector<double> xs = {0.37, 1.0, 2.22, 4.7, 3.14159265358979, 6.2831853, 1e-9};
    for (int i = 0; i < 20; ++i) xs.push_back(std::abs(src.real()));
    for (double x : xs) {
      double direct = 0.0;
      for (int n = 1; n <= 17; ++n) direct += std::cos(2.0 * n * x);
      direct /= two_pi;
      REQUIRE(dirichlet_closed_form(17, x) == Catch::Approx(direct).margin(1e-12));
    }
  }
  SECTION("matches the cosine-family density") {
    DensityOperator g = cosine_family(6, 6);
    SpaceTimeDensity rho = spacetime_density(g, 6, true);
    for (double x : {0.3, 1.7, 5.9})
      REQUIRE(rho.sample(0.0, x).real() == Catch::Approx(dirichlet_closed_form(6, x)).margin(1e-12));
  }
}

TEST_CASE("random orthonormal systems") {
  SECTION("unit vector at J = 1") {
    auto v = random_orthonormal_system(1, 5, 3);
    REQUIRE(v[0].l2_norm() == Catch::Approx(1.0).margin(1e-13));
  }
  SECTION("determinism per seed") {
    auto a = random_orthonormal_system(4, 8, 12345);
    auto b = random_orthonormal_system(4, 8, 12345);
    for (std::size_t j = 0; j < a.size(); ++j)
      for (int n = -8; n <= 8; ++n) REQUIRE(a[j].at(n) == b[j].at(n));
  }
  SECTION("gram matrix within 1e-12 of the identity at J=8, M=16") {
    auto v = random_orthonormal_system(8, 16, 777);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) {
        cd expect = (i == j) ? cd(1.0, 0.0) : cd(0.0, 0.0);
        REQUIRE(std::abs(inner_product(v[i], v[j]) - expect) < 1e-12);
      }
  }
  SECTION("dimension overflow rejected") {
    REQUIRE_THROWS_AS(random_orthonormal_system(8, 3, 1), std::invalid_argument);
  }
}

TEST_CASE("scaling fits") {
  SECTION("exact power law recovered") {
    std::vector<std::pair<double, double>> pairs;
    for (int n : {4, 8, 16, 32, 64}) pairs.emplace_back(n, std::sqrt(static_cast<double>(n)));
    ScalingFit fit = scaling_fit(pairs);
    REQUIRE(fit.exponent == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(fit.residual_rms < 1e-12);
  }
  SECTION("constants have slope zero") {
    std::vector<std::pair<double, double>> pairs = {{2, 3.0}, {4, 3.0}, {8, 3.0}, {16, 3.0}};
    REQUIRE(scaling_fit(pairs).exponent == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("nonpositive values rejected") {
    REQUIRE_THROWS_AS(scaling_fit({{2, 1.0}, {4, -1.0}, {8, 2.0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(scaling_fit({{2, 1.0}, {4, 2.0}}), std::invalid_argument);
  }
}

TEST_CASE("higher-dimensional necessity family") {
  SECTION("cardinality at d=2, N=1") {
    REQUIRE(highdim_necessity(2, 1).cardinality == 3);
  }
  SECTION("closed-form lp norm against quadrature of |c cos(2x)|^p") {
    HighdimRecord r = highdim_necessity(2, 4);
    const int K = 4096;
    double sum = 0.0;
    for (int j = 0; j < K; ++j)
      sum += std::pow(std::abs(r.density_amplitude * std::cos(2.0 * two_pi * j / K)), r.p_star);
    // flat t, x2 directions contribute (2 pi)^2
    double quad = std::pow(sum / K * two_pi * two_pi * two_pi, 1.0 / r.p_star);
    REQUIRE(r.lp_norm == Catch::Approx(quad).epsilon(1e-10));
  }
  SECTION("schatten table is cardinality^{1/alpha}") {
    HighdimRecord r = highdim_necessity(3, 2, 0.0, {2.0});
    REQUIRE(r.cardinality == 25);
    REQUIRE(r.schatten[0].second == Catch::Approx(5.0).margin(1e-12));
  }
  SECTION("unsupported dimension rejected") {
    REQUIRE_THROWS_AS(highdim_necessity(4, 2), std::invalid_argument);
  }
}
