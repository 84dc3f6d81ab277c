#include "core/flux.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace chemo {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Bivaluated response integrates to the positive-part formula with
// amplitude phi0 / 2.
double bivaluated_flux_integral(double a, double b, double phi0) {
  if (b == 0.0) return 0.0;
  const double r = a / b;
  const double p = std::max(0.0, 1.0 - r * r);
  return 0.5 * phi0 * p * sign(b);
}

}  // namespace

// With phi(Y) = -(2/pi) atan(Y/delta) and T(v) = atan((a + b v)/delta),
// integration by parts gives
//
//   u = (1/pi) [ (T(1) - T(-1))/2 - (delta / (2 b^2)) * DH ],
//   DH = 2b + ((a^2 - delta^2)/delta) * Datan - a * Dln,
//
// where Datan = T(1) - T(-1) written via atan2 to keep the branch, and
// Dln = log((delta^2 + (a+b)^2) / (delta^2 + (a-b)^2)) via log1p. Both
// difference forms stay accurate down to small |b|; below the switch point
// the odd Taylor expansion in b takes over.
double arctan_flux_integral(double a, double b, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("arctan stiffness must be > 0");
  if (b == 0.0) return 0.0;

  const double scale = std::max(std::abs(a), delta);
  if (std::abs(b) < 1e-3 * scale) {
    const double q = delta * delta + a * a;
    const double lead = 2.0 * b * delta / (3.0 * M_PI * q);
    const double cubic =
        2.0 * b * b * b * delta * (3.0 * a * a - delta * delta) /
        (15.0 * M_PI * q * q * q);
    return lead + cubic;
  }

  const double datan =
      std::atan2(2.0 * b * delta, delta * delta + a * a - b * b);
  const double dln = std::log1p(4.0 * a * b /
                                (delta * delta + (a - b) * (a - b)));
  const double dh =
      2.0 * b + ((a * a - delta * delta) / delta) * datan - a * dln;
  return (0.5 * datan - 0.5 * delta / (b * b) * dh) / M_PI;
}

double kinetic_flux(double dcdt, double dcdx, const ResponseFunction& phi,
                    double epsilon) {
  const double a = epsilon * dcdt;
  const double b = dcdx;
  if (phi.shape == ResponseShape::bivaluated)
    return bivaluated_flux_integral(a, b, phi.phi0);
  return arctan_flux_integral(a, b, phi.delta);
}

double kinetic_flux_quadrature(double dcdt, double dcdx,
                               const ResponseFunction& phi, double epsilon,
                               const Quadrature& quad) {
  const double a = epsilon * dcdt;
  const double b = dcdx;

  if (phi.shape == ResponseShape::bivaluated && b != 0.0) {
    const double vstar = -a / b;
    if (std::abs(vstar) < 1.0) {
      // Integrand is linear on each side of the sign change; apply the
      // rule on [-1, vstar] and [vstar, 1] separately.
      double acc = 0.0;
      const double seg[2][2] = {{-1.0, vstar}, {vstar, 1.0}};
      for (const auto& s : seg) {
        const double mid = 0.5 * (s[0] + s[1]);
        const double half = 0.5 * (s[1] - s[0]);
        for (int j = 0; j < quad.size(); ++j) {
          const double v = mid + half * quad.nodes[j];
          acc += half * quad.weights[j] * v * phi(a + v * b);
        }
      }
      return -0.5 * acc;
    }
  }

  double acc = 0.0;
  for (int j = 0; j < quad.size(); ++j) {
    const double v = quad.nodes[j];
    acc += quad.weights[j] * v * phi(a + v * b);
  }
  return -0.5 * acc;
}

double stiff_flux(double dcdt, double dcdx, double chi, double epsilon) {
  if (dcdx == 0.0) return 0.0;
  const double r = epsilon * dcdt / dcdx;
  const double p = std::max(0.0, 1.0 - r * r);
  return chi * p * sign(dcdx);
}

double tumbling_frequency(double v, double dcdt, double dcdx,
                          const ResponseFunction& phi, double epsilon) {
  return 1.0 + epsilon * phi(epsilon * dcdt + v * dcdx);
}

double diffusivity_from_kinetic(double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
  return 1.0 / (6.0 * mu);
}

}  // namespace chemo
