#pragma once

#include <string>
#include <vector>

namespace chemo {

// Nondimensional coefficients of the three-field drift-diffusion-reaction
// model. Defaults are the reference parameter set used throughout:
// time unit ~10 s, space unit ~200 um in physical terms.
struct ModelParams {
  double D_rho = 1.0;     // cell diffusivity, > 0
  double chi_S = 1.0;     // chemotactic sensitivity to the secreted signal S
  double chi_N = 1.0;     // chemotactic sensitivity to the nutrient N
  double D_S = 2.0;       // signal diffusivity
  double D_N = 0.0;       // nutrient diffusivity (0: nutrient is local)
  double alpha = 0.05;    // signal degradation rate
  double beta = 1.0;      // signal production rate per cell
  double gamma = 1.0;     // nutrient consumption rate per cell
  double epsilon = 0.1;   // pulse-to-cell speed ratio, in (0,1)
  double M = 1.0;         // total cell mass, conserved
  double N0 = 10.0;       // initial nutrient level
};

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate(const ModelParams& p);
void validate_or_throw(const ModelParams& p);

// Uniform 1D mesh. Cell centers x_i = (i + 1/2) dx, faces x_k = k dx,
// so face k separates cells k-1 and k.
struct Grid1D {
  double L = 200.0;
  int n_cells = 2000;

  double dx() const { return L / n_cells; }
  double center(int i) const { return (i + 0.5) * dx(); }
  double face(int k) const { return k * dx(); }
};

std::vector<std::string> validate(const Grid1D& g);
void validate_or_throw(const Grid1D& g);

// Signal response: odd, bounded, decreasing deviation of the tumbling rate.
//   arctan:     phi(Y) = -(2/pi) atan(Y / delta)
//   bivaluated: phi(Y) = phi0 for Y < 0, -phi0 for Y > 0, 0 at Y = 0
enum class ResponseShape { arctan, bivaluated };

struct ResponseFunction {
  ResponseShape shape = ResponseShape::arctan;
  double delta = 1e-3;  // arctan stiffness (smaller = stiffer)
  double phi0 = 1.0;    // bivaluated amplitude

  double operator()(double y) const;
  double max_abs() const;  // sup |phi|
};

std::vector<std::string> validate(const ResponseFunction& r);
void validate_or_throw(const ResponseFunction& r);

// The three macroscopic fields on a grid at one time level.
struct MacroState {
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> S;
  std::vector<double> N;
};

double mass(const std::vector<double>& rho, const Grid1D& grid);
double mass(const MacroState& state, const Grid1D& grid);

// Decreasing exponential bump at the left wall, normalized so that
// sum(rho dx) = M exactly; no signal, uniform nutrient N0.
MacroState initial_condition(const Grid1D& grid, const ModelParams& params,
                             double decay_rate);

// Same construction centered at x = center (used for aggregate studies).
MacroState initial_condition_centered(const Grid1D& grid,
                                      const ModelParams& params,
                                      double decay_rate, double center);

}  // namespace chemo
