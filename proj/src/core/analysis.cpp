#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace chemo {

namespace {

// Recursive adaptive Simpson, used for the kernel convolution residual.
template <typename F>
double adaptive_simpson_impl(const F& f, double a, double b, double fa,
                             double fm, double fb, double whole, double tol,
                             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double l = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double r = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(l + r - whole) < 15.0 * tol)
    return l + r + (l + r - whole) / 15.0;
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, l, 0.5 * tol,
                               depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, r, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, 48);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x,
                      const std::vector<double>& y) {
  LineFit out;
  const std::size_t n = x.size();
  if (n < 2) return out;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

}  // namespace

double wave_speed_residual(double sigma, const ModelParams& p) {
  const double es = p.epsilon * sigma;
  const double q = 1.0 - es * es;
  const double w = std::sqrt(4.0 * p.D_S * p.alpha + sigma * sigma);
  const double adv = w > 0.0 ? p.chi_S * sigma / w : 0.0;
  return p.chi_N - sigma / q - adv;
}

SpeedResult traveling_speed(const ModelParams& p) {
  validate_or_throw(p);
  SpeedResult out;
  if (p.chi_N == 0.0) {
    out.sigma = 0.0;
    out.degenerate = true;
    out.residual = 0.0;
    return out;
  }

  // The root lies below chi_N (the balance forces sigma/q < chi_N) and
  // below the singularity at 1/eps.
  double lo = 0.0;
  double hi = std::min(p.chi_N, (1.0 - 1e-9) / p.epsilon);
  const double r_lo =
      p.chi_N - (p.alpha > 0.0 ? 0.0 : p.chi_S);  // limit sigma -> 0+
  double r_hi = wave_speed_residual(hi, p);
  if (r_lo <= 0.0)
    throw NumericalError(
        "wave speed balance has no positive root (non-pulse regime)");
  if (r_hi > 0.0) {
    // Possible only when chi_S == 0 and hi == chi_N is the root within
    // roundoff; widen toward the singularity.
    hi = (1.0 - 1e-12) / p.epsilon;
    r_hi = wave_speed_residual(hi, p);
    if (r_hi > 0.0)
      throw NumericalError("wave speed bracket failed to enclose a root");
  }

  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (wave_speed_residual(mid, p) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double sigma = 0.5 * (lo + hi);

  // Secant polish for the last digits, guarded inside the bracket.
  double x0 = lo, x1 = hi;
  double f0 = wave_speed_residual(x0, p), f1 = wave_speed_residual(x1, p);
  for (int it = 0; it < 8 && f1 != f0; ++it) {
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 > lo && x2 < hi)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = wave_speed_residual(x1, p);
    if (std::abs(f1) < 1e-15) break;
  }
  if (std::abs(f1) < std::abs(wave_speed_residual(sigma, p))) sigma = x1;

  out.sigma = sigma;
  out.residual = wave_speed_residual(sigma, p);
  if (std::abs(out.residual) > 1e-10)
    throw NumericalError("wave speed residual did not converge below 1e-10");
  return out;
}

ProfileRates profile_rates(double sigma, const ModelParams& p) {
  if (!(sigma >= 0.0 && p.epsilon * sigma < 1.0))
    throw InvalidArgument("profile_rates: sigma outside [0, 1/eps)");
  const double q = 1.0 - (p.epsilon * sigma) * (p.epsilon * sigma);
  ProfileRates out;
  out.lambda_minus = (-sigma + (p.chi_S + p.chi_N) * q) / p.D_rho;
  out.lambda_plus = (-sigma + (-p.chi_S + p.chi_N) * q) / p.D_rho;
  if (!(out.lambda_minus > 0.0 && out.lambda_plus < 0.0)) {
    std::ostringstream os;
    os << "profile rates outside the pulse regime: lambda- = "
       << out.lambda_minus << ", lambda+ = " << out.lambda_plus;
    throw NumericalError(os.str());
  }
  out.rho0 = p.M / (1.0 / out.lambda_minus + 1.0 / -out.lambda_plus);
  return out;
}

double green_kernel(double z, double sigma, double D_S, double alpha) {
  if (!(alpha > 0.0) || !(D_S > 0.0))
    throw InvalidArgument("green_kernel requires alpha > 0 and D_S > 0");
  const double a3 = sigma / (2.0 * D_S);
  const double a2 = std::sqrt(a3 * a3 + alpha / D_S);
  const double a1 = 1.0 / (2.0 * a2 * D_S);
  return a1 * std::exp(-a2 * std::abs(z) - a3 * z);
}

WaveSolution wave_solution(const ModelParams& p) {
  const SpeedResult sp = traveling_speed(p);
  const ProfileRates pr = profile_rates(sp.sigma, p);

  WaveSolution out;
  out.sigma = sp.sigma;
  out.degenerate = sp.degenerate;
  out.lambda_minus = pr.lambda_minus;
  out.lambda_plus = pr.lambda_plus;
  out.rho0 = pr.rho0;
  out.a3 = sp.sigma / (2.0 * p.D_S);
  out.a2 = std::sqrt(out.a3 * out.a3 + p.alpha / p.D_S);
  out.a1 = 1.0 / (2.0 * out.a2 * p.D_S);

  // S'(0) = (K' * beta rho)(0) with the assembled profile; quadrature over
  // each side, truncated where the integrand has decayed below roundoff.
  const double a1 = out.a1, a2 = out.a2, a3 = out.a3;
  const double lm = out.lambda_minus, lp = out.lambda_plus;
  const double rho0 = out.rho0, beta = p.beta;
  const auto back = [&](double y) {
    // y < 0: K'(-y) with -y > 0 is -a1 (a2 + a3) e^{(a2 + a3) y}
    return -a1 * (a2 + a3) * std::exp((a2 + a3) * y) * rho0 *
           std::exp(lm * y);
  };
  const auto front = [&](double y) {
    // y > 0: K'(-y) with -y < 0 is a1 (a2 - a3) e^{-(a2 - a3) y}
    return a1 * (a2 - a3) * std::exp(-(a2 - a3) * y) * rho0 *
           std::exp(lp * y);
  };
  const double rate_back = a2 + a3 + lm;
  const double rate_front = (a2 - a3) - lp;
  const double zb = 50.0 / rate_back;
  const double zf = 50.0 / rate_front;
  const double ib = adaptive_simpson(back, -zb, 0.0, 1e-12);
  const double if_ = adaptive_simpson(front, 0.0, zf, 1e-12);
  out.sprime0_residual = beta * (ib + if_);
  return out;
}

ClusterProfile cluster_profile(const ModelParams& p) {
  if (!(p.chi_S > 0.0) || !(p.D_rho > 0.0))
    throw InvalidArgument("cluster_profile requires chi_S > 0 and D_rho > 0");
  ClusterProfile out;
  out.lambda = p.chi_S / p.D_rho;
  out.rho0 = p.M * out.lambda / 2.0;
  return out;
}

double dispersion_eigenvalue(int k, double L, double M, double delta,
                             double alpha) {
  if (k < 1)
    throw InvalidArgument(
        "dispersion mode k must be >= 1 (k = 0 is the conserved mass mode)");
  if (!(L > 0.0) || !(delta > 0.0))
    throw InvalidArgument("dispersion requires L > 0 and delta > 0");
  const double xi = 2.0 * M_PI * k / L;
  const double xi2 = xi * xi;
  return -xi2 + (M / (delta * L)) * xi2 / (alpha + xi2);
}

StabilityResult stability_condition(double L, double l, double delta,
                                    double M) {
  if (!(l > 0.0) || !(L > 0.0) || !(delta > 0.0))
    throw InvalidArgument("stability_condition requires L, l, delta > 0");
  StabilityResult out;
  out.critical_mass = delta * L / (l * l) + 4.0 * M_PI * M_PI * delta / L;
  out.stable = M < out.critical_mass;
  return out;
}

namespace {

// A structure counts as a mode only when it rises well above the troughs
// separating it from higher ground (topographic prominence). The ratio is
// scale free, so a small traveling pulse next to a much taller stationary
// aggregate is kept while ripples riding on a tail are not.
constexpr double kMinProminence = 10.0;

// A pulse is a localized structure: the mass in its basin divided by its
// amplitude gives an effective width, which must stay a small fraction of
// the channel. A dispersing hump fails this while still drifting forward.
constexpr double kMaxBasinFraction = 0.15;

struct Mode {
  int cell = 0;
  double x = 0.0;
  double amplitude = 0.0;
};

// Sub-cell refinement from the log-density parabola through the crest.
double refine_position(const std::vector<double>& rho, const Grid1D& grid,
                       int i) {
  double x = grid.center(i);
  const int n = static_cast<int>(rho.size());
  if (i > 0 && i < n - 1 && rho[i - 1] > 0.0 && rho[i] > 0.0 &&
      rho[i + 1] > 0.0) {
    const double ym = std::log(rho[i - 1]);
    const double y0 = std::log(rho[i]);
    const double yp = std::log(rho[i + 1]);
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      const double off = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
      x += off * grid.dx();
    }
  }
  return x;
}

// Lowest separating value between cell c and higher ground on one side;
// +inf when no higher ground exists on that side.
double separation(const std::vector<double>& rho, int c, int step) {
  const int n = static_cast<int>(rho.size());
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = c + step; i >= 0 && i < n; i += step) {
    if (rho[i] > rho[c]) return lowest;
    lowest = std::min(lowest, rho[i]);
  }
  return std::numeric_limits<double>::infinity();
}

// Local maxima whose prominence ratio (amplitude over the deeper of the
// two separating troughs) clears kMinProminence. The rightmost cell wins
// inside flat plateaus.
std::vector<Mode> find_modes(const std::vector<double>& rho,
                             const Grid1D& grid) {
  std::vector<Mode> out;
  const int n = static_cast<int>(rho.size());
  const double gmax = *std::max_element(rho.begin(), rho.end());
  if (!(gmax > 0.0)) return out;
  const double noise = 1e-9 * gmax;
  for (int i = 0; i < n; ++i) {
    const double left = (i == 0) ? -std::numeric_limits<double>::infinity()
                                 : rho[i - 1];
    const double right = (i == n - 1)
                             ? -std::numeric_limits<double>::infinity()
                             : rho[i + 1];
    if (!(rho[i] >= left && rho[i] > right && rho[i] > noise)) continue;
    const double sep =
        std::min(separation(rho, i, -1), separation(rho, i, +1));
    // sep == inf: no higher ground anywhere, maximally prominent.
    if (std::isfinite(sep) && rho[i] < kMinProminence * sep)
      continue;  // ripple riding on a larger structure
    out.push_back({i, refine_position(rho, grid, i), rho[i]});
  }
  return out;
}

bool field_is_flat(const std::vector<double>& rho) {
  const double gmax = *std::max_element(rho.begin(), rho.end());
  const double gmin = *std::min_element(rho.begin(), rho.end());
  return !(gmax > 0.0) || (gmax - gmin) < 1e-12 * std::max(1.0, gmax);
}

// Left edge of the mode's basin: the first trough while below half the
// amplitude, or the wall.
int basin_split(const std::vector<double>& rho, const Mode& mode) {
  for (int i = mode.cell; i > 0; --i)
    if (rho[i - 1] > rho[i] && rho[i] < 0.5 * mode.amplitude) return i;
  return 0;
}

// Effective width of the mode: basin mass over amplitude.
double basin_width(const std::vector<double>& rho, const Grid1D& grid,
                   const Mode& mode) {
  const int split = basin_split(rho, mode);
  double part = 0.0;
  for (int i = split; i < static_cast<int>(rho.size()); ++i) part += rho[i];
  return part * grid.dx() / mode.amplitude;
}

LineFit log_tail_fit(const std::vector<double>& rho, const Grid1D& grid,
                     double x_lo, double x_hi, double floor_value) {
  std::vector<double> xs, ys;
  const int n = static_cast<int>(rho.size());
  for (int i = 0; i < n; ++i) {
    const double x = grid.center(i);
    if (x < x_lo || x > x_hi) continue;
    if (!(rho[i] > floor_value)) continue;
    xs.push_back(x);
    ys.push_back(std::log(rho[i]));
  }
  if (xs.size() < 3) return LineFit{};
  return least_squares(xs, ys);
}

}  // namespace

PulseFit fit_pulse(const Trajectory& traj, double window_fraction,
                   const WaveSolution* predicted, double amplitude_floor) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw InvalidArgument("fit window fraction must lie in (0,1]");
  if (traj.snapshots.empty())
    throw InvalidArgument("fit_pulse: empty trajectory");

  const Grid1D& grid = traj.grid;
  const double t_first = traj.snapshots.front().t;
  const double t_last = traj.snapshots.back().t;
  const double t_start = t_last - window_fraction * (t_last - t_first);

  std::vector<const Snapshot*> window;
  for (const auto& snap : traj.snapshots)
    if (snap.t >= t_start - 1e-12) window.push_back(&snap);
  if (window.size() < 3)
    throw InvalidArgument("fit_pulse needs at least 3 snapshots in the window");

  PulseFit out;
  if (field_is_flat(window.back()->rho)) {
    out.flag = "no discernible peak";
    return out;
  }

  // Select the rightmost prominent AND localized mode of the final
  // snapshot: a forming secondary ripple on leaked tail mass can be
  // prominent relative to its surroundings while spreading over a large
  // basin, and must not shadow the pulse behind it.
  std::vector<Mode> tracked(window.size());
  {
    const std::vector<Mode> modes_last = find_modes(window.back()->rho, grid);
    if (modes_last.empty()) {
      out.flag = "no discernible peak";
      return out;
    }
    const Mode* selected = nullptr;
    for (auto it = modes_last.rbegin(); it != modes_last.rend(); ++it) {
      if (basin_width(window.back()->rho, grid, *it) <=
          kMaxBasinFraction * grid.L) {
        selected = &*it;
        break;
      }
    }
    if (selected == nullptr) {
      out.flag = "no localized mode (dispersing profile)";
      return out;
    }
    tracked.back() = *selected;
  }
  const double hop_radius = std::max(10.0 * grid.dx(), 0.03 * grid.L);
  std::size_t first_tracked = window.size() - 1;
  for (std::size_t k = window.size() - 1; k-- > 0;) {
    const std::vector<Mode> modes = find_modes(window[k]->rho, grid);
    const double target = tracked[k + 1].x;
    const Mode* best = nullptr;
    for (const auto& m : modes)
      if (best == nullptr ||
          std::abs(m.x - target) < std::abs(best->x - target))
        best = &m;
    if (best == nullptr || std::abs(best->x - target) > hop_radius)
      break;  // the mode does not exist this early; shorten the window
    tracked[k] = *best;
    first_tracked = k;
  }
  if (window.size() - first_tracked < 3) {
    out.flag = "peak not trackable across the window";
    return out;
  }

  for (std::size_t k = first_tracked; k < window.size(); ++k) {
    out.times.push_back(window[k]->t);
    out.positions.push_back(tracked[k].x);
    out.amplitudes.push_back(tracked[k].amplitude);
  }
  out.peak_found = true;
  out.amplitude_first = out.amplitudes.front();
  out.amplitude_last = out.amplitudes.back();
  out.displacement = out.positions.back() - out.positions.front();

  const LineFit speed_fit = least_squares(out.times, out.positions);
  out.speed = speed_fit.slope;
  out.r2_speed = speed_fit.r2;

  const Snapshot& last = *window.back();
  const Mode peak = tracked.back();

  const int split = basin_split(last.rho, peak);
  double part = 0.0, total = 0.0;
  for (int i = 0; i < static_cast<int>(last.rho.size()); ++i) {
    total += last.rho[i];
    if (i >= split) part += last.rho[i];
  }
  out.peak_mass_fraction = total > 0.0 ? part / total : 0.0;
  out.split_x = split > 0 ? grid.center(split) : -1.0;

  // Pulse verdict: the selected mode is localized by construction; a pulse
  // additionally moves forward monotonically by a significant margin.
  bool monotone = true;
  for (std::size_t i = 1; i < out.positions.size(); ++i)
    if (out.positions[i] < out.positions[i - 1] - grid.dx()) monotone = false;
  const double min_travel = std::max(5.0 * grid.dx(), 0.005 * grid.L);
  if (!monotone)
    out.flag = "non-monotone peak motion";
  else if (out.displacement < min_travel)
    out.flag = "no significant translation";
  out.pulse_detected = out.flag.empty();

  // Tail rates from the final snapshot's tracked mode.
  {
    const double floor_value = amplitude_floor * peak.amplitude;
    double back_lo, back_hi, front_lo, front_hi;
    if (predicted != nullptr && predicted->lambda_minus > 0.0 &&
        predicted->lambda_plus < 0.0) {
      back_lo = peak.x - 10.0 / predicted->lambda_minus;
      back_hi = peak.x - 1.0 / predicted->lambda_minus;
      front_lo = peak.x + 1.0 / -predicted->lambda_plus;
      front_hi = peak.x + 10.0 / -predicted->lambda_plus;
    } else {
      back_lo = peak.x - 0.05 * grid.L;
      back_hi = peak.x - 0.005 * grid.L;
      front_lo = peak.x + 0.005 * grid.L;
      front_hi = peak.x + 0.05 * grid.L;
    }
    const LineFit back = log_tail_fit(last.rho, grid, back_lo, back_hi,
                                      floor_value);
    const LineFit front = log_tail_fit(last.rho, grid, front_lo, front_hi,
                                       floor_value);
    out.lambda_back = back.slope;
    out.r2_back = back.r2;
    out.lambda_front = front.slope;
    out.r2_front = front.r2;
  }
  return out;
}

}  // namespace chemo
