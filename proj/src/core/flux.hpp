#pragma once

#include "core/model.hpp"
#include "core/quadrature.hpp"

namespace chemo {

// Chemotactic flux kernel derived from the velocity-averaged tumbling bias:
//
//   u(a, b) = -(1/2) \int_{-1}^{1} v phi(a + v b) dv,
//   a = epsilon * dC/dt,  b = dC/dx.
//
// |u| <= max|phi| / 2 for every input. Odd under (a,b) -> (-a,-b).

// Closed-form evaluation. For the bivaluated response this is the exact
// positive-part formula; for the arctan response the antiderivative is
// evaluated analytically (no quadrature error at any stiffness).
double kinetic_flux(double dcdt, double dcdx, const ResponseFunction& phi,
                    double epsilon);

// Quadrature evaluation of the same integral, the generic route kept as an
// independent cross-check. A bivaluated response is integrated piecewise on
// the two subintervals separated by the sign change of its argument, where
// the integrand is linear, so the rule is exact there as well.
double kinetic_flux_quadrature(double dcdt, double dcdx,
                               const ResponseFunction& phi, double epsilon,
                               const Quadrature& quad);

// Stiff-limit flux: chi * (1 - (eps dC/dt / dC/dx)^2)_+ * sign(dC/dx),
// defined as 0 where dC/dx = 0 (no directional information).
double stiff_flux(double dcdt, double dcdx, double chi, double epsilon);

// Mesoscale tumbling frequency 1 + eps * phi(eps dC/dt + v dC/dx).
double tumbling_frequency(double v, double dcdt, double dcdx,
                          const ResponseFunction& phi, double epsilon);

// Cell diffusivity induced by the unbiased run-and-tumble process:
// (1/(4 mu)) \int_{-1}^{1} v^2 dv = 1 / (6 mu).
double diffusivity_from_kinetic(double mu);

// Exact value of -(1/2) \int v phi(a + v b) dv for the arctan response;
// exposed for direct testing against quadrature.
double arctan_flux_integral(double a, double b, double delta);

}  // namespace chemo
