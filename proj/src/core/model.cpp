#include "core/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"

namespace chemo {

namespace {

void join_and_throw(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) os << "; ";
    os << problems[i];
  }
  throw InvalidArgument(os.str());
}

}  // namespace

std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> out;
  if (!(p.D_rho > 0.0)) out.push_back("D_rho must be positive");
  if (!(p.chi_S >= 0.0)) out.push_back("chi_S must be non-negative");
  if (!(p.chi_N >= 0.0)) out.push_back("chi_N must be non-negative");
  if (!(p.D_S >= 0.0)) out.push_back("D_S must be non-negative");
  if (!(p.D_N >= 0.0)) out.push_back("D_N must be non-negative");
  if (!(p.alpha >= 0.0)) out.push_back("alpha must be non-negative");
  if (!(p.beta >= 0.0)) out.push_back("beta must be non-negative");
  if (!(p.gamma >= 0.0)) out.push_back("gamma must be non-negative");
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
    out.push_back("epsilon out of range (0,1)");
  if (!(p.M > 0.0)) out.push_back("M must be positive");
  if (!(p.N0 >= 0.0)) out.push_back("N0 must be non-negative");
  return out;
}

void validate_or_throw(const ModelParams& p) { join_and_throw(validate(p)); }

std::vector<std::string> validate(const Grid1D& g) {
  std::vector<std::string> out;
  if (!(g.L > 0.0)) out.push_back("L must be positive");
  if (g.n_cells < 4) out.push_back("n_cells must be at least 4");
  return out;
}

void validate_or_throw(const Grid1D& g) { join_and_throw(validate(g)); }

double ResponseFunction::operator()(double y) const {
  if (shape == ResponseShape::arctan) {
    return -(2.0 / M_PI) * std::atan(y / delta);
  }
  if (y < 0.0) return phi0;
  if (y > 0.0) return -phi0;
  return 0.0;
}

double ResponseFunction::max_abs() const {
  return shape == ResponseShape::arctan ? 1.0 : std::abs(phi0);
}

std::vector<std::string> validate(const ResponseFunction& r) {
  std::vector<std::string> out;
  if (r.shape == ResponseShape::arctan && !(r.delta > 0.0))
    out.push_back("response delta must be positive");
  if (r.shape == ResponseShape::bivaluated && !(r.phi0 >= 0.0))
    out.push_back("response phi0 must be non-negative");
  return out;
}

void validate_or_throw(const ResponseFunction& r) {
  join_and_throw(validate(r));
}

double mass(const std::vector<double>& rho, const Grid1D& grid) {
  // Compensated sum: mass drift checks care about the last few digits.
  double sum = 0.0, c = 0.0;
  for (double v : rho) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum * grid.dx();
}

double mass(const MacroState& state, const Grid1D& grid) {
  return mass(state.rho, grid);
}

namespace {

MacroState exponential_profile(const Grid1D& grid, const ModelParams& params,
                               double decay_rate, double center) {
  validate_or_throw(grid);
  validate_or_throw(params);
  if (!(decay_rate > 0.0))
    throw InvalidArgument("initial decay_rate must be positive");

  const int n = grid.n_cells;
  MacroState state;
  state.t = 0.0;
  state.rho.resize(n);
  state.S.assign(n, 0.0);
  state.N.assign(n, params.N0);

  for (int i = 0; i < n; ++i) {
    const double x = grid.center(i);
    const double d = center < 0.0 ? x : std::abs(x - center);
    state.rho[i] = std::exp(-decay_rate * d);
  }
  const double m0 = mass(state.rho, grid);
  const double scale = params.M / m0;
  for (double& v : state.rho) v *= scale;
  return state;
}

}  // namespace

MacroState initial_condition(const Grid1D& grid, const ModelParams& params,
                             double decay_rate) {
  return exponential_profile(grid, params, decay_rate, -1.0);
}

MacroState initial_condition_centered(const Grid1D& grid,
                                      const ModelParams& params,
                                      double decay_rate, double center) {
  if (!(center >= 0.0 && center <= grid.L))
    throw InvalidArgument("initial profile center must lie inside the domain");
  return exponential_profile(grid, params, decay_rate, center);
}

}  // namespace chemo
