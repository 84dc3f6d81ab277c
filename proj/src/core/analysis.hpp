#pragma once

#include <string>
#include <vector>

#include "core/macro_solver.hpp"
#include "core/model.hpp"

namespace chemo {

// --- traveling-wave analytics (stiff response limit) ---

// Residual of the speed balance
//   chi_N - sigma / (1 - (eps sigma)^2) - chi_S sigma / sqrt(4 D_S alpha + sigma^2),
// strictly decreasing on (0, 1/eps); its unique zero is the pulse speed.
double wave_speed_residual(double sigma, const ModelParams& p);

struct SpeedResult {
  double sigma = 0.0;
  bool degenerate = false;  // chi_N = 0: only the zero-speed solution
  double residual = 0.0;    // balance residual at sigma
};

// Bracketed bisection with a secant polish; |residual| < 1e-10 at return.
// Throws NumericalError when no sign change exists (non-pulse regime).
SpeedResult traveling_speed(const ModelParams& p);

struct ProfileRates {
  double lambda_minus = 0.0;  // back-tail growth rate, > 0
  double lambda_plus = 0.0;   // front-tail decay rate, < 0
  double rho0 = 0.0;          // peak density from the mass normalization
};

// lambda_-/+ = (-sigma + (chi_S +/- ... ) (1 - (eps sigma)^2)) / D_rho with
// the S-sensitivity entering with opposite signs on the two sides;
// rho0 = M / (1/lambda_- + 1/|lambda_+|). Throws when the signs flip
// (parameters outside the pulse regime).
ProfileRates profile_rates(double sigma, const ModelParams& p);

// Fundamental solution of the traveling signal equation:
// K(z) = a1 exp(-a2 |z| - a3 z), a3 = sigma/(2 D_S),
// a2 = sqrt(a3^2 + alpha/D_S), a1 = 1/(2 a2 D_S); integrates to 1/alpha.
double green_kernel(double z, double sigma, double D_S, double alpha);

struct WaveSolution {
  double sigma = 0.0;
  bool degenerate = false;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double rho0 = 0.0;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
  // (K' * beta rho)(0) evaluated by adaptive quadrature with the assembled
  // double-exponential profile; the signal extremum sits at the peak when
  // this vanishes.
  double sprime0_residual = 0.0;
};

WaveSolution wave_solution(const ModelParams& p);

// --- zero-speed aggregate ---

struct ClusterProfile {
  double lambda = 0.0;  // chi_S / D_rho; width does not depend on mass
  double rho0 = 0.0;    // M lambda / 2
};

ClusterProfile cluster_profile(const ModelParams& p);

// --- linear stability of the uniform state ---

// lambda(k) = -xi^2 + (M/(delta L)) xi^2/(alpha + xi^2), xi = 2 pi k / L.
// k = 0 is rejected (mass conservation mode).
double dispersion_eigenvalue(int k, double L, double M, double delta,
                             double alpha);

struct StabilityResult {
  double critical_mass = 0.0;  // delta L / l^2 + 4 pi^2 delta / L
  bool stable = false;         // M < critical mass
};

StabilityResult stability_condition(double L, double l, double delta,
                                    double M);

// --- trajectory fitting ---

struct PulseFit {
  bool peak_found = false;
  bool pulse_detected = false;  // monotone, significant translation
  std::string flag;             // reason when not detected

  double speed = 0.0;
  double r2_speed = 0.0;
  double lambda_back = 0.0;   // fitted, > 0 for a pulse profile
  double r2_back = 0.0;
  double lambda_front = 0.0;  // fitted, < 0
  double r2_front = 0.0;

  double peak_mass_fraction = 0.0;  // mass in the rightmost peak's basin
  double split_x = -1.0;            // trough separating the basin, if any
  double amplitude_first = 0.0;
  double amplitude_last = 0.0;
  double displacement = 0.0;

  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> amplitudes;
};

// Tracks the rightmost significant density peak over the trailing
// `window_fraction` of the trajectory; speed from least squares on peak
// position vs time, tail rates from log-linear regressions sized by the
// predicted rates (when given) and clipped at an amplitude floor.
PulseFit fit_pulse(const Trajectory& traj, double window_fraction,
                   const WaveSolution* predicted,
                   double amplitude_floor = 0.03);

}  // namespace chemo
