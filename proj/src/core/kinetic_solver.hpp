#pragma once

#include <string>
#include <vector>

#include "core/macro_solver.hpp"
#include "core/model.hpp"
#include "core/quadrature.hpp"

namespace chemo {

// Scaling constants of the nondimensional kinetic equation
//   eps dt f + v dx f = (mu/eps)(rho - |V| f)
//                     + mu ( \int phi f dv' - |V| phi f ),
// with |V| = 2 and phi = phi(eps dC/dt + v dC/dx) summed over the
// perceived chemicals.
struct KineticParams {
  double epsilon = 0.1;
  double mu = 1.0 / 6.0;  // so that the induced diffusivity 1/(6 mu) = 1
};

std::vector<std::string> validate(const KineticParams& p);
void validate_or_throw(const KineticParams& p);

// Velocity-resolved density f(x_i, v_j) on the shared Gauss-Legendre
// velocity grid; f is stored row-major over cells.
struct KineticState {
  double t = 0.0;
  int n_cells = 0;
  Quadrature velocities;
  std::vector<double> f;

  double& at(int i, int j) { return f[i * velocities.size() + j]; }
  double at(int i, int j) const { return f[i * velocities.size() + j]; }
};

// One perceived chemical: derivative fields at cell centers plus the
// response shape applied to them.
struct KineticBias {
  const std::vector<double>* dcdt = nullptr;
  const std::vector<double>* dcdx = nullptr;
  ResponseFunction phi;
};

// f = rho(x) / |V| at every node: the local equilibrium for a given density.
KineticState kinetic_equilibrium(const Grid1D& grid,
                                 const std::vector<double>& rho,
                                 const Quadrature& velocities);

// Velocity moments: rho = sum_j w_j f, flux j = eps^-1 sum_j w_j v_j f.
void moments(const KineticState& state, double epsilon,
             std::vector<double>& rho_out, std::vector<double>* flux_out);

double kinetic_mass(const KineticState& state, const Grid1D& grid);

// Transport split: upwind advection at speed v/eps with specular
// (mass-conserving) wall reflection. Requires dt <= cfl_safety eps dx.
void kinetic_transport(KineticState& state, const Grid1D& grid,
                       const KineticParams& kp, double dt, double cfl_safety);

// Collision split: the stiff relaxation toward the velocity-uniform
// equilibrium is integrated exactly (exponential factor), the O(mu)
// tumbling bias explicitly. Both parts conserve the discrete density.
void kinetic_collide(KineticState& state,
                     const std::vector<KineticBias>& biases,
                     const KineticParams& kp, double dt);

// Full step = transport then collide; advances t.
void kinetic_step(KineticState& state, const Grid1D& grid,
                  const std::vector<KineticBias>& biases,
                  const KineticParams& kp, double dt, double cfl_safety);

// Velocity sum of the discrete collision right side at one cell; zero up to
// roundoff for any f (gain and loss balance). Test hook.
double collision_rhs_velocity_sum(const KineticState& state, int cell,
                                  const std::vector<KineticBias>& biases,
                                  const KineticParams& kp);

// Kinetic transport coupled to the same chemical dynamics as the macro
// solver: the density moment sources S and consumes N each step. Snapshots
// record the moments; the u channel carries the kinetic flux moment.
Trajectory coupled_kinetic_run(const MacroState& initial, const Grid1D& grid,
                               const ModelParams& params,
                               const ResponseFunction& phi,
                               const KineticParams& kp,
                               const SolverConfig& config, int n_velocities,
                               bool bias_S, bool bias_N);

}  // namespace chemo
