#include <catch2/catch_amalgamated.hpp>

#include "tdlab/nlss.hpp"
#include "tdlab/onebody_oracle.hpp"

using namespace tdlab;

namespace {

double op_dist(const DensityOperator& a, const DensityOperator& b) {
  double s = 0.0;
  int m = std::min(a.cutoff(), b.cutoff());
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j) s += std::norm(a.entry(i, j) - b.entry(i, j));
  return std::sqrt(s);
}

FourierField normalised_random(int cutoff, int band, std::uint64_t seed) {
  FourierField f(cutoff);
  FourierField r = random_field(band, seed);
  for (int n = -band; n <= band; ++n) f.at(n) = r.at(n);
  double nrm = f.l2_norm();
  for (cd& c : f.coeffs) c /= nrm;
  return f;
}

}  // namespace

TEST_CASE("plane-wave data is stationary under the fixed point") {
  const double amp = 1.3;
  FourierField u0 = basis_e(0, 4);
  for (cd& c : u0.coeffs) c *= amp;
  NlssProblem p;
  p.gamma0 = from_rank_one_sum({1.0}, {u0});
  p.sign = +1;
  p.horizon = 0.5;
  p.tol.mesh_points = 17;
  p.tol.substeps = 4;
  NlssTrajectory traj = solve_fixed_point(p);
  double drift = 0.0;
  for (const DensityOperator& g : traj.snapshots) drift = std::max(drift, op_dist(g, p.gamma0));
  REQUIRE(drift < 1e-8);
  // every Picard window should have converged immediately: constant density
  for (const NlssWindowLog& w : traj.windows) REQUIRE(w.iterations <= 2);
}

TEST_CASE("diagonal data under the renormalised flow never moves") {
  std::vector<double> w = {0.4, 0.3, 0.2};
  std::vector<FourierField> vecs = {basis_e(-1, 5), basis_e(0, 5), basis_e(2, 5)};
  NlssProblem p;
  p.gamma0 = from_rank_one_sum(w, vecs);
  p.renormalised = true;
  p.horizon = 0.5;
  p.tol.mesh_points = 17;
  p.tol.substeps = 4;
  NlssTrajectory traj = solve_fixed_point(p);
  for (const auto& row : traj.density_rows)
    for (double v : row) REQUIRE(std::abs(v) < 1e-10);
  double drift = 0.0;
  for (const DensityOperator& g : traj.snapshots) drift = std::max(drift, op_dist(g, p.gamma0));
  REQUIRE(drift < 1e-8);
}

TEST_CASE("rank-one trajectory matches the one-body oracle") {
  FourierField u0 = normalised_random(6, 3, 31);
  NlssProblem p;
  p.gamma0 = from_rank_one_sum({1.0}, {u0});
  p.sign = +1;
  p.horizon = 0.25;
  p.tol.initial_window = 0.25;
  p.tol.mesh_points = 33;
  p.tol.substeps = 8;
  NlssTrajectory traj = solve_fixed_point(p);

  int mesh_total = static_cast<int>(traj.times.size()) - 1;
  int oracle_steps = 2048;
  OneBodyDensityTrajectory ob =
      onebody_cubic_nls_oracle(u0, +1, p.horizon, oracle_steps, oracle_steps / mesh_total, 128);
  REQUIRE(ob.times.size() == traj.times.size());

  NlssTrajectory ot;
  ot.grid_size = traj.grid_size;
  ot.times = traj.times;
  TorusGrid g(traj.grid_size);
  for (const FourierField& rho : ob.density) {
    SampledField s = synthesize(rho, g);
    std::vector<double> row(static_cast<std::size_t>(g.size));
    for (int j = 0; j < g.size; ++j) row[static_cast<std::size_t>(j)] = s.values[static_cast<std::size_t>(j)].real();
    ot.density_rows.push_back(std::move(row));
  }
  REQUIRE(NlssTrajectory::density_distance(traj, ot) < 1e-6);
  REQUIRE(traj.fixed_point_residual < 10.0 * p.tol.picard_tol);
}

TEST_CASE("coupled integrator cross-checks the fixed point") {
  std::vector<FourierField> vecs = random_orthonormal_system(2, 5, 8);
  DensityOperator gamma0 = from_rank_one_sum({0.5, 0.4}, vecs);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.25;
  p.tol.initial_window = 0.25;
  p.tol.mesh_points = 17;
  p.tol.substeps = 8;
  NlssTrajectory fixed = solve_fixed_point(p);
  NlssTrajectory coupled = solve_coupled(p, (static_cast<int>(fixed.times.size()) - 1) * p.tol.substeps);
  REQUIRE(fixed.times.size() == coupled.times.size());
  REQUIRE(NlssTrajectory::density_distance(fixed, coupled) < 1e-5);
}

TEST_CASE("the sign matters for non-constant densities") {
  std::vector<FourierField> vecs = random_orthonormal_system(2, 4, 5);
  DensityOperator gamma0 = from_rank_one_sum({0.7, 0.2}, vecs);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.2;
  p.tol.initial_window = 0.2;
  p.tol.mesh_points = 17;
  p.tol.substeps = 4;
  p.sign = +1;
  NlssTrajectory plus = solve_fixed_point(p);
  p.sign = -1;
  NlssTrajectory minus = solve_fixed_point(p);
  double at0 = 0.0, later = 0.0;
  for (int j = 0; j < plus.grid_size; ++j)
    at0 = std::max(at0, std::abs(plus.density_rows.front()[static_cast<std::size_t>(j)] -
                                 minus.density_rows.front()[static_cast<std::size_t>(j)]));
  for (int j = 0; j < plus.grid_size; ++j)
    later = std::max(later, std::abs(plus.density_rows.back()[static_cast<std::size_t>(j)] -
                                     minus.density_rows.back()[static_cast<std::size_t>(j)]));
  REQUIRE(at0 < 1e-13);
  REQUIRE(later > 1e-6);
}

TEST_CASE("hermiticity and rank are preserved along trajectories") {
  std::vector<FourierField> vecs = random_orthonormal_system(2, 4, 77);
  DensityOperator gamma0 = from_rank_one_sum({0.6, 0.3}, vecs);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.2;
  p.tol.initial_window = 0.2;
  p.tol.mesh_points = 9;
  p.tol.substeps = 4;
  NlssTrajectory traj = solve_fixed_point(p);
  for (const DensityOperator& g : traj.snapshots) {
    REQUIRE(g.hermitian(1e-10));
    const SpectralData& sd = g.spectral_data();
    for (std::size_t r = 2; r < sd.singular_values.size(); ++r)
      REQUIRE(sd.singular_values[r] < 1e-8);
  }
}

TEST_CASE("stationary family") {
  DensityOperator g = stationary_family(5, 2.0, 0.1, 7);
  SECTION("schatten norm is N^{-eps}") {
    REQUIRE(schatten_norm(g, 2.0) == Catch::Approx(std::pow(5.0, -0.1)).margin(1e-13));
  }
  SECTION("density norm over [0, T] x T") {
    const double T = 1.7;
    double c = g.trace().real() / two_pi;  // constant density N^{1 - 1/alpha - eps}/(2 pi)
    REQUIRE(c == Catch::Approx(std::pow(5.0, 1.0 - 0.5 - 0.1) / two_pi).margin(1e-13));
    REQUIRE(c * std::sqrt(two_pi * T) ==
            Catch::Approx(std::pow(5.0, 0.4) * std::sqrt(two_pi * T) / two_pi).margin(1e-12));
  }
  SECTION("no drift under the coupled integrator over T = 1") {
    NlssProblem p;
    p.gamma0 = g;
    p.horizon = 1.0;
    p.tol.initial_window = 0.25;
    NlssTrajectory traj = solve_coupled(p, 512);
    double drift = 0.0;
    for (const DensityOperator& s : traj.snapshots) drift = std::max(drift, op_dist(s, g));
    REQUIRE(drift < 1e-8);
  }
  SECTION("cutoff below N rejected") {
    REQUIRE_THROWS_AS(stationary_family(5, 2.0, 0.1, 4), std::invalid_argument);
  }
}

TEST_CASE("ill-posedness families") {
  SECTION("plain: schatten vanishes while the density norm grows at 1 - 1/alpha - eps") {
    IllposednessDemo demo = illposedness_demo(NlssMode::plain, 2.0, {8, 16, 32, 64, 128, 256});
    REQUIRE(demo.density_fit.exponent == Catch::Approx(0.4).margin(0.02));
    for (const IllposednessRow& r : demo.rows)
      REQUIRE(r.schatten_alpha == Catch::Approx(std::pow(r.n, -0.1)).margin(1e-12));
    REQUIRE(demo.schatten_fit.exponent == Catch::Approx(-0.1).margin(1e-10));
  }
  SECTION("renormalised: input vanishes at N^{-1/6}, output pinned at 1/sqrt(2)") {
    IllposednessDemo demo =
        illposedness_demo(NlssMode::renormalised, 3.0, {8, 16, 32, 64, 128, 256});
    for (const IllposednessRow& r : demo.rows) {
      REQUIRE(r.schatten_alpha == Catch::Approx(std::pow(r.n, -1.0 / 6.0)).margin(1e-12));
      REQUIRE(r.density_norm == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-9));
    }
  }
  SECTION("well-posed regimes refused") {
    REQUIRE_THROWS_AS(illposedness_demo(NlssMode::plain, 1.0, {4, 8, 16}), std::invalid_argument);
    REQUIRE_THROWS_AS(illposedness_demo(NlssMode::renormalised, 2.0, {4, 8, 16}),
                      std::invalid_argument);
  }
}

TEST_CASE("conservation along a generic trajectory") {
  std::vector<FourierField> vecs = random_orthonormal_system(3, 4, 19);
  DensityOperator gamma0 = from_rank_one_sum({0.5, 0.3, 0.2}, vecs);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.25;
  p.tol.initial_window = 0.25;
  p.tol.mesh_points = 17;
  p.tol.substeps = 4;
  NlssTrajectory traj = solve_fixed_point(p);
  ConservationReport rep =
      conservation_check(traj, {1.0, 2.0, std::numeric_limits<double>::infinity()});
  for (const ConservationRow& r : rep.rows) REQUIRE(r.max_relative_drift < 1e-8);
  REQUIRE(rep.trace_drift < 1e-8);
}

TEST_CASE("plain and renormalised flows agree on trace-class data") {
  std::vector<FourierField> vecs = random_orthonormal_system(3, 5, 55);
  DensityOperator gamma0 = from_rank_one_sum({0.5, -0.25, 0.2}, vecs);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.25;
  p.tol.initial_window = 0.25;
  p.tol.mesh_points = 17;
  p.tol.substeps = 4;
  p.renormalised = false;
  NlssTrajectory plain = solve_fixed_point(p);
  p.renormalised = true;
  NlssTrajectory renorm = solve_fixed_point(p);
  REQUIRE(plain.times.size() == renorm.times.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < plain.snapshots.size(); ++i)
    dev = std::max(dev, op_dist(plain.snapshots[i], renorm.snapshots[i]));
  REQUIRE(dev < 1e-6);
}

TEST_CASE("picard windows halve under large data and still converge") {
  std::vector<FourierField> vecs = random_orthonormal_system(2, 5, 91);
  DensityOperator gamma0 = from_rank_one_sum({6.0, 4.0}, vecs);  // trace 10, slow contraction
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = 0.5;
  p.tol.initial_window = 0.5;
  p.tol.mesh_points = 33;
  p.tol.substeps = 8;
  p.tol.picard_tol = 1e-10;
  p.tol.max_picard = 6;  // starves the full-horizon window, forcing halving
  NlssTrajectory traj = solve_fixed_point(p);
  REQUIRE(traj.times.back() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(traj.windows.size() >= 2);  // the full-horizon window cannot contract
  for (const NlssWindowLog& w : traj.windows) {
    REQUIRE(w.converged);
    REQUIRE(w.to - w.from < 0.5 - 1e-12);
  }
  ConservationReport cons = conservation_check(traj, {2.0});
  REQUIRE(cons.rows.front().max_relative_drift < 1e-7);
}

TEST_CASE("blowup-alternative surrogate: unit data reaches T = 2 pi") {
  // Schatten norms are conserved, so the window size required for
  // contraction never collapses; a full period must be reachable.
  std::vector<FourierField> vecs = random_orthonormal_system(2, 4, 303);
  DensityOperator gamma0 = from_rank_one_sum({0.7, 0.5}, vecs);
  REQUIRE(schatten_norm(gamma0, 2.0) <= 1.0);
  NlssProblem p;
  p.gamma0 = gamma0;
  p.horizon = two_pi;
  p.tol.initial_window = 0.25;
  p.tol.mesh_points = 9;
  p.tol.substeps = 4;
  p.tol.picard_tol = 1e-8;
  NlssTrajectory traj = solve_fixed_point(p);
  REQUIRE(traj.times.back() == Catch::Approx(two_pi).margin(1e-12));
  for (const NlssWindowLog& w : traj.windows) REQUIRE(w.converged);
  ConservationReport rep = conservation_check(traj, {2.0});
  REQUIRE(rep.rows.front().max_relative_drift < 1e-7);
}

TEST_CASE("non-hermitian initial data rejected") {
  DensityOperator g(3);
  g.set_entry(0, 1, cd(1.0, 0.5));
  NlssProblem p;
  p.gamma0 = g;
  p.horizon = 0.1;
  REQUIRE_THROWS_AS(solve_fixed_point(p), std::invalid_argument);
}
