#include <cmath>
#include <cstdint>
#include <functional>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/model.hpp"
#include "doctest.h"

using namespace chemo;

namespace {

struct Xorshift {
  std::uint64_t s = 0xda3e39cb94b95bdbULL;
  double uniform(double lo, double hi) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return lo + (hi - lo) * (double(s >> 11) / 9007199254740992.0);
  }
};

// Independent oracle: plain midpoint bisection on the speed balance,
// written out in full rather than calling the library residual.
double bisection_oracle(const ModelParams& p) {
  auto residual = [&p](double s) {
    const double q = 1.0 - (p.epsilon * s) * (p.epsilon * s);
    return p.chi_N - s / q -
           p.chi_S * s / std::sqrt(4.0 * p.D_S * p.alpha + s * s);
  };
  double lo = 0.0, hi = std::min(p.chi_N, (1.0 - 1e-9) / p.epsilon);
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Independent oracle: composite Simpson on a fixed fine grid.
double simpson_oracle(const std::function<double(double)>& f, double a,
                      double b, int n) {
  double acc = f(a) + f(b);
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("pulse speed: reference parameters against the bisection oracle") {
  ModelParams p;  // chi_S = chi_N = 1, D_S = 2, alpha = 0.05, eps = 0.1
  const SpeedResult r = traveling_speed(p);
  CHECK(!r.degenerate);
  CHECK(r.sigma > 0.43);
  CHECK(r.sigma < 0.44);
  CHECK(std::abs(r.residual) < 1e-10);
  CHECK(std::abs(r.sigma - bisection_oracle(p)) < 1e-10);
}

TEST_CASE("pulse speed: degenerate and limiting regimes") {
  ModelParams p;
  p.chi_N = 0.0;
  const SpeedResult r = traveling_speed(p);
  CHECK(r.degenerate);
  CHECK(r.sigma == 0.0);

  // eps -> 0 with alpha -> infinity: the gradient balance forces
  // sigma -> chi_N.
  ModelParams q;
  q.chi_N = 0.7;
  q.epsilon = 1e-6;
  q.alpha = 1e10;
  CHECK(traveling_speed(q).sigma == doctest::Approx(0.7).epsilon(1e-4));
}

TEST_CASE("pulse speed ignores total mass and cell diffusivity bit for bit") {
  ModelParams p;
  const double base = traveling_speed(p).sigma;
  p.M *= 10.0;
  p.D_rho *= 2.0;
  CHECK(traveling_speed(p).sigma == base);  // exact equality
}

TEST_CASE("speed balance residual is strictly decreasing on the bracket") {
  ModelParams p;
  const double hi = std::min(p.chi_N, (1.0 - 1e-9) / p.epsilon);
  double prev = wave_speed_residual(1e-9, p);
  for (int i = 1; i <= 2000; ++i) {
    const double s = hi * i / 2000.0;
    const double r = wave_speed_residual(s, p);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("profile rates: cluster limit and pulse asymmetry") {
  ModelParams p;
  p.chi_N = 0.0;
  const ProfileRates cluster = profile_rates(0.0, p);
  CHECK(cluster.lambda_minus == doctest::Approx(1.0));
  CHECK(cluster.lambda_plus == doctest::Approx(-1.0));

  ModelParams ref;
  const double sigma = traveling_speed(ref).sigma;
  const ProfileRates pr = profile_rates(sigma, ref);
  CHECK(pr.lambda_minus > 0.0);
  CHECK(pr.lambda_plus < 0.0);
  CHECK(pr.lambda_minus / -pr.lambda_plus > 1.0);  // stiffer at the back
  CHECK(pr.rho0 ==
        doctest::Approx(ref.M / (1.0 / pr.lambda_minus +
                                 1.0 / -pr.lambda_plus)).epsilon(1e-14));
}

TEST_CASE("asymmetry identity: tail ratio equals the kernel ratio at sigma*") {
  ModelParams p;
  const double sigma = traveling_speed(p).sigma;
  const ProfileRates pr = profile_rates(sigma, p);
  const double a3 = sigma / (2.0 * p.D_S);
  const double a2 = std::sqrt(a3 * a3 + p.alpha / p.D_S);
  const double lhs = pr.lambda_minus / -pr.lambda_plus;
  const double rhs = (a2 + a3) / (a2 - a3);
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("profile rates flag a non-pulse parameter regime") {
  ModelParams p;
  p.chi_S = 0.1;
  p.chi_N = 5.0;  // lambda_+ turns positive
  CHECK_THROWS_AS(profile_rates(0.1, p), NumericalError);
  CHECK_THROWS_AS(profile_rates(-1.0, p), InvalidArgument);
}

TEST_CASE("signal kernel: symmetry at zero speed and closed form") {
  const double D_S = 2.0, alpha = 0.05;
  const double k0 = std::exp(-std::sqrt(alpha / D_S) * 1.7) /
                    (2.0 * std::sqrt(alpha * D_S));
  CHECK(green_kernel(1.7, 0.0, D_S, alpha) == doctest::Approx(k0));
  CHECK(green_kernel(-1.7, 0.0, D_S, alpha) ==
        doctest::Approx(green_kernel(1.7, 0.0, D_S, alpha)));
  CHECK_THROWS_AS(green_kernel(0.0, 0.4, 2.0, 0.0), InvalidArgument);
}

TEST_CASE("signal kernel integrates to 1/alpha") {
  const double D_S = 2.0, alpha = 0.05, sigma = 0.4337;
  const double a3 = sigma / (2.0 * D_S);
  const double a2 = std::sqrt(a3 * a3 + alpha / D_S);
  const double z_left = 60.0 / (a2 - a3);
  const double z_right = 60.0 / (a2 + a3);
  auto k = [&](double z) { return green_kernel(z, sigma, D_S, alpha); };
  const double integral = simpson_oracle(k, -z_left, 0.0, 40000) +
                          simpson_oracle(k, 0.0, z_right, 40000);
  CHECK(std::abs(integral - 1.0 / alpha) < 1e-8);
  for (double z : {-5.0, -0.3, 0.0, 0.3, 5.0})
    CHECK(green_kernel(z, sigma, D_S, alpha) > 0.0);
}

TEST_CASE("signal kernel solves its equation away from the kink") {
  // Five-point stencils keep the finite-difference truncation below the
  // 1e-9 residual target.
  const double D_S = 2.0, alpha = 0.05, sigma = 0.4337;
  auto k = [&](double z) { return green_kernel(z, sigma, D_S, alpha); };
  const double h = 1e-2;
  for (double z : {-2.3, -0.7, 0.7, 2.3}) {
    const double kpp = (-k(z - 2 * h) + 16 * k(z - h) - 30 * k(z) +
                        16 * k(z + h) - k(z + 2 * h)) /
                       (12 * h * h);
    const double kp =
        (k(z - 2 * h) - 8 * k(z - h) + 8 * k(z + h) - k(z + 2 * h)) /
        (12 * h);
    const double residual = -D_S * kpp - sigma * kp + alpha * k(z);
    CHECK(std::abs(residual) < 1e-9);
  }
}

TEST_CASE("wave solution bundles a consistent pulse description") {
  ModelParams p;
  const WaveSolution w = wave_solution(p);
  CHECK(w.sigma > 0.0);
  CHECK(w.sigma < 1.0 / p.epsilon);
  CHECK(w.lambda_minus > 0.0);
  CHECK(w.lambda_plus < 0.0);
  CHECK(w.a2 > std::abs(w.a3));
  CHECK(w.a1 > 0.0);
  CHECK(w.a1 == doctest::Approx(1.0 / (2.0 * w.a2 * p.D_S)).epsilon(1e-14));
  CHECK(std::abs(w.sprime0_residual) < 1e-6);

  // Independent quadrature of (K' * beta rho)(0) with the assembled
  // double exponential.
  // K'(z) = a1 (-a3 - a2 sign(z)) exp(-a2|z| - a3 z), evaluated at z = -y;
  // each side keeps its own branch so the kink at zero stays one-sided.
  auto back = [&](double y) {
    const double kprime =
        -w.a1 * (w.a3 + w.a2) * std::exp(-(w.a2 + w.a3) * -y);
    return p.beta * kprime * w.rho0 * std::exp(w.lambda_minus * y);
  };
  auto front = [&](double y) {
    const double kprime =
        w.a1 * (w.a2 - w.a3) * std::exp((w.a2 - w.a3) * -y);
    return p.beta * kprime * w.rho0 * std::exp(w.lambda_plus * y);
  };
  const double left = simpson_oracle(back, -40.0, 0.0, 20000);
  const double right = simpson_oracle(front, 0.0, 80.0, 40000);
  CHECK(std::abs(left + right) < 1e-6);
}

TEST_CASE("degenerate zero-speed wave: symmetric kernel, exact extremum") {
  ModelParams p;
  p.chi_N = 0.0;
  const WaveSolution w = wave_solution(p);
  CHECK(w.degenerate);
  CHECK(w.sigma == 0.0);
  CHECK(w.a3 == 0.0);
  CHECK(std::abs(w.sprime0_residual) < 1e-10);
}

TEST_CASE("cluster profile: width, normalization, mass invariance") {
  ModelParams p;
  const ClusterProfile c = cluster_profile(p);
  CHECK(c.lambda == doctest::Approx(1.0));
  // Oracle: int rho0 exp(-lambda |x|) dx = 2 rho0 / lambda = M.
  CHECK(c.rho0 == doctest::Approx(p.M * c.lambda / 2.0));
  CHECK(c.rho0 == doctest::Approx(0.5));

  ModelParams q = p;
  q.M = 100.0;
  CHECK(cluster_profile(q).lambda == c.lambda);  // exact
  CHECK(cluster_profile(q).rho0 == doctest::Approx(50.0));
}

TEST_CASE("dispersion relation: decoupled, asymptotic and threshold modes") {
  CHECK(dispersion_eigenvalue(1, 10.0, 0.0, 0.1, 0.05) ==
        doctest::Approx(-std::pow(2.0 * M_PI / 10.0, 2)));

  // Large k: lambda(k) -> -xi^2 (1 - o(1)).
  const double lam = dispersion_eigenvalue(400, 10.0, 1.0, 0.1, 0.05);
  const double xi2 = std::pow(2.0 * M_PI * 400 / 10.0, 2);
  CHECK(lam / -xi2 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(dispersion_eigenvalue(50, 10.0, 1.0, 0.1, 0.05) <
        dispersion_eigenvalue(2, 10.0, 1.0, 0.1, 0.05));

  // L = 2 pi, alpha = 0, k = 1: positive growth iff M > 2 pi delta.
  const double L = 2.0 * M_PI, delta = 0.1;
  CHECK(dispersion_eigenvalue(1, L, 2.0 * M_PI * delta * 1.01, delta, 0.0) >
        0.0);
  CHECK(dispersion_eigenvalue(1, L, 2.0 * M_PI * delta * 0.99, delta, 0.0) <
        0.0);

  CHECK_THROWS_AS(dispersion_eigenvalue(0, 10.0, 1.0, 0.1, 0.05),
                  InvalidArgument);
}

TEST_CASE("stability condition: rearranged critical mass and limits") {
  const double L = 30.0, l = 4.0, delta = 0.2;
  // Oracle: solve M L / (2 pi delta) = (L/l)^2 / (2 pi) + 2 pi for M.
  const double oracle =
      2.0 * M_PI * delta / L * ((L / l) * (L / l) / (2.0 * M_PI) + 2.0 * M_PI);
  const StabilityResult r = stability_condition(L, l, delta, 1.0);
  CHECK(r.critical_mass == doctest::Approx(oracle).epsilon(1e-14));

  CHECK(stability_condition(L, l, 1e-12, 1.0).critical_mass < 1e-9);
  CHECK(stability_condition(L, l, 2.0 * delta, 1.0).critical_mass ==
        doctest::Approx(2.0 * r.critical_mass).epsilon(1e-14));
  CHECK(stability_condition(L, l, delta, r.critical_mass * 0.999).stable);
  CHECK(!stability_condition(L, l, delta, r.critical_mass * 1.001).stable);
}

TEST_CASE("dispersion sign agrees with the stability verdict") {
  Xorshift rng;
  for (int trial = 0; trial < 1000; ++trial) {
    const double L = rng.uniform(5.0, 200.0);
    const double l = rng.uniform(0.5, 20.0);
    const double delta = rng.uniform(1e-3, 1.0);
    const double M = rng.uniform(1e-3, 10.0);
    const double alpha = 1.0 / (l * l);

    const StabilityResult verdict = stability_condition(L, l, delta, M);
    double most_unstable = -1e300;
    for (int k = 1; k <= 100; ++k)
      most_unstable =
          std::max(most_unstable, dispersion_eigenvalue(k, L, M, delta, alpha));
    if (verdict.stable)
      CHECK(most_unstable < 0.0);
    else
      CHECK(most_unstable > 0.0);
  }
}

namespace {

// Exact translating double exponential sampled at cell centers.
Trajectory synthetic_pulse(const Grid1D& g, double sigma, double lm,
                           double lp, double p0, double t0, double t1,
                           double dt_snap) {
  Trajectory traj;
  traj.grid = g;
  for (double t = t0; t <= t1 + 1e-12; t += dt_snap) {
    Snapshot snap;
    snap.t = t;
    snap.rho.resize(g.n_cells);
    snap.S.assign(g.n_cells, 0.0);
    snap.N.assign(g.n_cells, 1.0);
    const double peak = p0 + sigma * t;
    for (int i = 0; i < g.n_cells; ++i) {
      const double z = g.center(i) - peak;
      snap.rho[i] = z < 0.0 ? std::exp(lm * z) : std::exp(lp * z);
    }
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

}  // namespace

TEST_CASE("pulse fit recovers an exact synthetic wave to 1e-6") {
  Grid1D g{100.0, 1000};
  const double sigma = 0.5, lm = 1.2, lp = -0.4;
  // Snapshot shift of 0.5 per unit time = 5 cells exactly, so the grid
  // alignment repeats and quantization cancels in the slope.
  Trajectory traj = synthetic_pulse(g, sigma, lm, lp, 20.0, 0.0, 40.0, 1.0);

  WaveSolution predicted{};
  predicted.lambda_minus = lm;
  predicted.lambda_plus = lp;
  const PulseFit fit = fit_pulse(traj, 1.0 / 3.0, &predicted);

  CHECK(fit.peak_found);
  CHECK(fit.pulse_detected);
  CHECK(std::abs(fit.speed - sigma) < 1e-6);
  CHECK(std::abs(fit.lambda_back - lm) < 1e-6);
  CHECK(std::abs(fit.lambda_front - lp) < 1e-6);
  CHECK(fit.r2_speed > 1.0 - 1e-12);
  CHECK(fit.r2_back > 1.0 - 1e-12);
  CHECK(fit.peak_mass_fraction > 0.99);
}

TEST_CASE("stationary trajectory fits speed zero and is not a pulse") {
  Grid1D g{40.0, 400};
  Trajectory traj = synthetic_pulse(g, 0.0, 1.0, -1.0, 20.0, 0.0, 30.0, 1.0);
  const PulseFit fit = fit_pulse(traj, 0.5, nullptr);
  CHECK(fit.peak_found);
  CHECK(!fit.pulse_detected);
  CHECK(std::abs(fit.speed) < 1e-10);
  CHECK(fit.flag == "no significant translation");
}

TEST_CASE("dispersing profile raises the non-pulse flag") {
  // Spreading Gaussian drifting right: moves monotonically but never
  // concentrates; localization rejects it.
  Grid1D g{100.0, 500};
  Trajectory traj;
  traj.grid = g;
  for (int k = 0; k <= 12; ++k) {
    const double t = 4.0 * k;
    Snapshot snap;
    snap.t = t;
    snap.rho.resize(g.n_cells);
    snap.S.assign(g.n_cells, 0.0);
    snap.N.assign(g.n_cells, 1.0);
    const double width = 10.0 + 0.8 * t, center = 30.0 + 0.45 * t;
    for (int i = 0; i < g.n_cells; ++i) {
      const double z = (g.center(i) - center) / width;
      snap.rho[i] = std::exp(-0.5 * z * z) / width + 0.02;
    }
    traj.snapshots.push_back(std::move(snap));
  }
  const PulseFit fit = fit_pulse(traj, 0.5, nullptr);
  CHECK(!fit.pulse_detected);
  CHECK(fit.flag == "no localized mode (dispersing profile)");
}

TEST_CASE("pulse fit needs at least three snapshots in the window") {
  Grid1D g{40.0, 400};
  Trajectory traj = synthetic_pulse(g, 0.5, 1.0, -0.5, 10.0, 0.0, 20.0, 10.0);
  CHECK_THROWS_AS(fit_pulse(traj, 0.2, nullptr), InvalidArgument);
}
