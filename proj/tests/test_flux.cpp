#include <cmath>
#include <cstdint>

#include "core/errors.hpp"
#include "core/flux.hpp"
#include "core/model.hpp"
#include "core/quadrature.hpp"
#include "doctest.h"

using namespace chemo;

namespace {

struct Xorshift {
  std::uint64_t s = 0x2545f4914f6cdd1dULL;
  double uniform(double lo, double hi) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return lo + (hi - lo) * (double(s >> 11) / 9007199254740992.0);
  }
};

}  // namespace

TEST_CASE("Gauss-Legendre rule: weight sum, symmetry, exactness") {
  for (int n : {2, 8, 32, 64}) {
    const Quadrature q = Quadrature::gauss_legendre(n);
    CHECK(validate(q).empty());
    double wsum = 0.0, v2 = 0.0, v4 = 0.0;
    for (int j = 0; j < q.size(); ++j) {
      wsum += q.weights[j];
      v2 += q.weights[j] * q.nodes[j] * q.nodes[j];
      v4 += q.weights[j] * std::pow(q.nodes[j], 4);
      CHECK(q.nodes[j] == doctest::Approx(-q.nodes[q.mirror(j)]).epsilon(1e-14));
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(v2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));  // exact moments
    if (n >= 4) CHECK(v4 == doctest::Approx(2.0 / 5.0).epsilon(1e-13));
  }
}

TEST_CASE("flux vanishes without a spatial gradient") {
  const Quadrature q = Quadrature::gauss_legendre(32);
  ResponseFunction arc{ResponseShape::arctan, 1e-3, 1.0};
  ResponseFunction biv{ResponseShape::bivaluated, 1.0, 1.0};
  Xorshift rng;
  for (int i = 0; i < 200; ++i) {
    const double dcdt = rng.uniform(-10.0, 10.0);
    CHECK(std::abs(kinetic_flux(dcdt, 0.0, arc, 0.1)) == 0.0);
    CHECK(std::abs(kinetic_flux(dcdt, 0.0, biv, 0.1)) == 0.0);
    CHECK(std::abs(kinetic_flux_quadrature(dcdt, 0.0, arc, 0.1, q)) <= 1e-15);
  }
}

TEST_CASE("bivaluated static-gradient flux equals phi0/2") {
  // Oracle: with dcdt = 0 and dcdx > 0 the integrand is phi0 |v| / 2, and
  // \int_{-1}^{1} |v| dv / 2 = 1/2.
  const Quadrature q = Quadrature::gauss_legendre(64);
  for (double phi0 : {1.0, 0.35}) {
    ResponseFunction biv{ResponseShape::bivaluated, 1.0, phi0};
    CHECK(kinetic_flux(0.0, 1.0, biv, 0.1) == doctest::Approx(phi0 / 2));
    CHECK(kinetic_flux_quadrature(0.0, 1.0, biv, 0.1, q) ==
          doctest::Approx(phi0 / 2).epsilon(1e-13));
  }
}

TEST_CASE("small-gradient linearization: u ~ -phi'(0) dcdx / 3") {
  // With the stiffness convention phi'(0) = -3/delta the linearized drift
  // is dcdx/delta; the arctan shape with delta_a = 2 delta / (3 pi) has
  // exactly that slope at the origin.
  const double delta = 0.5;
  const double delta_a = 2.0 * delta / (3.0 * M_PI);
  ResponseFunction arc{ResponseShape::arctan, delta_a, 1.0};
  const double b = 1e-7;
  const double u = kinetic_flux(0.0, b, arc, 0.1);
  CHECK(u == doctest::Approx(b / delta).epsilon(1e-6));

  // Generic form of the same statement.
  const double slope = -2.0 / (M_PI * delta_a);
  CHECK(u == doctest::Approx(-slope * b / 3.0).epsilon(1e-6));
}

TEST_CASE("stiff flux formula: saturation and clamping") {
  CHECK(stiff_flux(0.0, 1.0, 0.7, 0.1) == doctest::Approx(0.7));
  CHECK(stiff_flux(0.0, -1.0, 0.7, 0.1) == doctest::Approx(-0.7));
  CHECK(stiff_flux(5.0, 0.0, 1.0, 0.1) == 0.0);
  // |eps dcdt| >= |dcdx| clamps to zero.
  CHECK(stiff_flux(10.0, 1.0, 1.0, 0.1) == 0.0);
  CHECK(stiff_flux(10.0, 0.9999, 1.0, 0.1) == 0.0);
}

TEST_CASE("stiff flux under the traveling ansatz dcdt = -sigma dcdx") {
  // Both chemicals then see u = +/- chi (1 - (eps sigma)^2)_+.
  const double eps = 0.1, chi = 1.0;
  Xorshift rng;
  for (int i = 0; i < 100; ++i) {
    const double sigma = rng.uniform(0.0, 5.0);
    const double g = rng.uniform(0.01, 3.0);  // dcdx > 0
    const double expected =
        chi * std::max(0.0, 1.0 - (eps * sigma) * (eps * sigma));
    CHECK(stiff_flux(-sigma * g, g, chi, eps) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(stiff_flux(sigma * g, -g, chi, eps) ==
          doctest::Approx(-expected).epsilon(1e-12));
  }
}

TEST_CASE("bivaluated integral equals the closed-form stiff flux") {
  // 1000 random derivative pairs; piecewise quadrature with 64 nodes on
  // the two smooth segments reproduces the positive-part formula.
  const Quadrature q = Quadrature::gauss_legendre(64);
  Xorshift rng;
  for (int i = 0; i < 1000; ++i) {
    const double dcdt = rng.uniform(-3.0, 3.0);
    const double dcdx = rng.uniform(-3.0, 3.0);
    const double eps = rng.uniform(0.01, 0.5);
    const double phi0 = rng.uniform(0.1, 2.0);
    ResponseFunction biv{ResponseShape::bivaluated, 1.0, phi0};
    const double reference = stiff_flux(dcdt, dcdx, phi0 / 2.0, eps);
    CHECK(std::abs(kinetic_flux_quadrature(dcdt, dcdx, biv, eps, q) -
                   reference) <= 1e-8);
    CHECK(std::abs(kinetic_flux(dcdt, dcdx, biv, eps) - reference) <= 1e-14);
  }
}

TEST_CASE("closed-form arctan integral matches dense quadrature") {
  // 2048 nodes resolve the delta = 0.05 transition layer fully.
  const Quadrature q = Quadrature::gauss_legendre(2048);
  for (double delta : {0.05, 0.3, 1.0}) {
    ResponseFunction arc{ResponseShape::arctan, delta, 1.0};
    for (double a : {0.0, 0.3, -0.3, 2.0, -2.0}) {
      for (double b : {0.2, -0.2, 1.0, -1.0, 2.5}) {
        const double exact = arctan_flux_integral(a, b, delta);
        const double quad = kinetic_flux_quadrature(a / 0.1, b, arc, 0.1, q);
        CHECK(exact == doctest::Approx(quad).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("arctan flux is continuous across the small-gradient switch") {
  for (double a : {0.0, 0.5, -2.0}) {
    for (double delta : {1e-3, 0.2}) {
      const double scale = std::max(std::abs(a), delta);
      const double b_lo = 0.999e-3 * scale;
      const double b_hi = 1.001e-3 * scale;
      const double u_lo = arctan_flux_integral(a, b_lo, delta);
      const double u_hi = arctan_flux_integral(a, b_hi, delta);
      CHECK(u_lo == doctest::Approx(u_hi).epsilon(1e-5));
    }
  }
}

TEST_CASE("uniform boundedness |u| <= max|phi| / 2") {
  const Quadrature q = Quadrature::gauss_legendre(32);
  Xorshift rng;
  for (int i = 0; i < 1000; ++i) {
    const double dcdt = rng.uniform(-100.0, 100.0);
    const double dcdx = rng.uniform(-100.0, 100.0);
    const double eps = rng.uniform(0.001, 0.9);
    ResponseFunction arc{ResponseShape::arctan, rng.uniform(1e-6, 1.0), 1.0};
    ResponseFunction biv{ResponseShape::bivaluated, 1.0,
                         rng.uniform(0.0, 3.0)};
    CHECK(std::abs(kinetic_flux(dcdt, dcdx, arc, eps)) <= 0.5 + 1e-12);
    CHECK(std::abs(kinetic_flux(dcdt, dcdx, biv, eps)) <=
          0.5 * biv.phi0 + 1e-12);
    // the quadrature route may overshoot the bound by its own error when
    // the response is near-discontinuous
    CHECK(std::abs(kinetic_flux_quadrature(dcdt, dcdx, arc, eps, q)) <=
          0.5 * 1.02);
  }
}

TEST_CASE("flux is odd under joint sign flip of both derivatives") {
  Xorshift rng;
  for (int i = 0; i < 1000; ++i) {
    const double dcdt = rng.uniform(-5.0, 5.0);
    const double dcdx = rng.uniform(-5.0, 5.0);
    const double eps = rng.uniform(0.01, 0.5);
    ResponseFunction arc{ResponseShape::arctan, rng.uniform(1e-4, 1.0), 1.0};
    ResponseFunction biv{ResponseShape::bivaluated, 1.0, 1.0};
    CHECK(kinetic_flux(-dcdt, -dcdx, arc, eps) ==
          doctest::Approx(-kinetic_flux(dcdt, dcdx, arc, eps))
              .epsilon(1e-12));
    CHECK(kinetic_flux(-dcdt, -dcdx, biv, eps) ==
          doctest::Approx(-kinetic_flux(dcdt, dcdx, biv, eps))
              .epsilon(1e-14));
    CHECK(stiff_flux(-dcdt, -dcdx, 1.0, eps) ==
          doctest::Approx(-stiff_flux(dcdt, dcdx, 1.0, eps)).epsilon(1e-14));
  }
}

TEST_CASE("arctan flux approaches the bivaluated limit monotonically") {
  ResponseFunction biv{ResponseShape::bivaluated, 1.0, 1.0};
  for (double b : {1.0, -0.7, 0.3}) {
    const double limit = kinetic_flux(0.0, b, biv, 0.1);
    double prev_gap = -1.0;
    for (double delta : {1e-2, 1e-4, 1e-6}) {
      ResponseFunction arc{ResponseShape::arctan, delta, 1.0};
      const double gap = std::abs(kinetic_flux(0.0, b, arc, 0.1) - limit);
      if (prev_gap >= 0.0) CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 1e-4);
  }
}

TEST_CASE("kinetic diffusivity 1/(6 mu) against the quadrature oracle") {
  const Quadrature q = Quadrature::gauss_legendre(32);
  for (double mu : {1.0 / 6.0, 1.0, 0.25}) {
    double v2 = 0.0;
    for (int j = 0; j < q.size(); ++j)
      v2 += q.weights[j] * q.nodes[j] * q.nodes[j];
    const double oracle = v2 / (4.0 * mu);
    CHECK(diffusivity_from_kinetic(mu) ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
  CHECK(diffusivity_from_kinetic(1.0 / 6.0) == doctest::Approx(1.0));
  CHECK(diffusivity_from_kinetic(1.0) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(diffusivity_from_kinetic(0.0), InvalidArgument);
  CHECK_THROWS_AS(diffusivity_from_kinetic(-1.0), InvalidArgument);
}

TEST_CASE("tumbling frequency: basal rate and directional bias") {
  ResponseFunction biv{ResponseShape::bivaluated, 1.0, 1.0};
  ResponseFunction arc{ResponseShape::arctan, 1e-3, 1.0};
  const double eps = 0.1;

  CHECK(tumbling_frequency(1.0, 0.0, 0.0, biv, eps) == 1.0);
  CHECK(tumbling_frequency(-0.4, 0.0, 0.0, arc, eps) == 1.0);

  // Moving up a static gradient lowers the rate to 1 - eps.
  CHECK(tumbling_frequency(1.0, 0.0, 2.0, biv, eps) ==
        doctest::Approx(1.0 - eps));
  CHECK(tumbling_frequency(-1.0, 0.0, 2.0, biv, eps) ==
        doctest::Approx(1.0 + eps));

  Xorshift rng;
  for (int i = 0; i < 500; ++i) {
    const double psi = tumbling_frequency(
        rng.uniform(-1.0, 1.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
        arc, eps);
    CHECK(psi >= 1.0 - eps - 1e-12);
    CHECK(psi <= 1.0 + eps + 1e-12);
  }
}
