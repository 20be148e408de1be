// Verification-only reference integrator for the one-body cubic NLS
//   i du/dt + u_xx = sign * |u|^2 u   on the torus.
// Deliberately self-contained (own direct DFT, own stepping loop) so it can
// serve as an independent oracle for the rank-one many-body trajectory; do
// not reuse the propagator machinery here.
#ifndef TDLAB_ONEBODY_ORACLE_HPP
#define TDLAB_ONEBODY_ORACLE_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "tdlab/fourier.hpp"

namespace tdlab {

struct OneBodyDensityTrajectory {
  std::vector<double> times;
  std::vector<FourierField> density;  // rho(t) = |u(t,.)|^2 as coefficients against e_k
  FourierField final_state;
};

inline OneBodyDensityTrajectory onebody_cubic_nls_oracle(const FourierField& u0, int sign,
                                                         double T, int steps, int record_stride,
                                                         int grid = 128, int density_bandwidth = 0) {
  if (steps < 1 || record_stride < 1) throw std::invalid_argument("onebody oracle: bad step counts");
  if (grid < 4 * u0.cutoff + 4) throw std::invalid_argument("onebody oracle: grid too small");
  const int M = u0.cutoff;
  const int B = density_bandwidth > 0 ? density_bandwidth : 2 * M;
  const int K = grid;
  const double h = T / steps;

  // direct DFT tables; modes m in [-(K/2-1), K/2]
  std::vector<cd> w(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j) w[static_cast<std::size_t>(j)] = std::polar(1.0, two_pi * j / K);
  auto wp = [&](long long idx) -> const cd& {
    long long r = idx % K;
    if (r < 0) r += K;
    return w[static_cast<std::size_t>(r)];
  };

  std::vector<cd> modes(static_cast<std::size_t>(K), cd(0.0, 0.0));  // index m mod K
  for (int n = -M; n <= M; ++n) modes[static_cast<std::size_t>((n % K + K) % K)] = u0.at(n);

  std::vector<cd> samples(static_cast<std::size_t>(K));
  auto to_samples = [&]() {
    for (int j = 0; j < K; ++j) {
      cd acc(0.0, 0.0);
      for (int b = 0; b < K; ++b) {
        if (modes[static_cast<std::size_t>(b)] == cd(0.0, 0.0)) continue;
        acc += modes[static_cast<std::size_t>(b)] * wp(static_cast<long long>(b) * j);
      }
      samples[static_cast<std::size_t>(j)] = acc * inv_sqrt_two_pi;
    }
  };
  auto to_modes = [&]() {
    for (int b = 0; b < K; ++b) {
      cd acc(0.0, 0.0);
      for (int j = 0; j < K; ++j) acc += samples[static_cast<std::size_t>(j)] * std::conj(wp(static_cast<long long>(b) * j));
      modes[static_cast<std::size_t>(b)] = acc * std::sqrt(two_pi) / static_cast<double>(K);
    }
  };

  auto mode_of_bin = [&](int b) { return (b <= K / 2) ? b : b - K; };
  std::vector<double> n2(static_cast<std::size_t>(K));
  for (int b = 0; b < K; ++b) {
    double m = static_cast<double>(mode_of_bin(b));
    n2[static_cast<std::size_t>(b)] = m * m;
  }

  OneBodyDensityTrajectory out;
  auto record = [&](double t) {
    to_samples();
    FourierField rho(B);
    for (int k = -B; k <= B; ++k) {
      cd acc(0.0, 0.0);
      for (int j = 0; j < K; ++j)
        acc += std::norm(samples[static_cast<std::size_t>(j)]) * std::conj(wp(static_cast<long long>(k) * j));
      rho.at(k) = acc * std::sqrt(two_pi) / static_cast<double>(K);
    }
    out.times.push_back(t);
    out.density.push_back(std::move(rho));
  };

  record(0.0);
  for (int step = 0; step < steps; ++step) {
    for (int b = 0; b < K; ++b)
      modes[static_cast<std::size_t>(b)] *= std::polar(1.0, -n2[static_cast<std::size_t>(b)] * h / 2.0);
    to_samples();
    for (int j = 0; j < K; ++j)
      samples[static_cast<std::size_t>(j)] *=
          std::polar(1.0, -static_cast<double>(sign) * std::norm(samples[static_cast<std::size_t>(j)]) * h);
    to_modes();
    for (int b = 0; b < K; ++b)
      modes[static_cast<std::size_t>(b)] *= std::polar(1.0, -n2[static_cast<std::size_t>(b)] * h / 2.0);
    if ((step + 1) % record_stride == 0) record((step + 1) * h);
  }

  FourierField fin(M);
  for (int n = -M; n <= M; ++n) fin.at(n) = modes[static_cast<std::size_t>((n % K + K) % K)];
  out.final_state = std::move(fin);
  return out;
}

}  // namespace tdlab

#endif
