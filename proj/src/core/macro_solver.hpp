#pragma once

#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/quadrature.hpp"

namespace chemo {

// How the time derivative of a chemical is estimated at faces when the
// fluxes are assembled:
//   rhs_eval          evaluate the chemical's equation right side at cell
//                     centers and average across the face (no bootstrap),
//   lagged_difference backward difference (C^n - C^{n-1}) / dt, zero at
//                     the first step.
enum class DsdtMode { rhs_eval, lagged_difference };

// Which flux kernel drives the advection:
//   kinetic  velocity-averaged response integral, scaled by 2 chi so that
//            the stiff limit of a unit-amplitude response reproduces the
//            positive-part formula with amplitude chi,
//   stiff    the positive-part formula itself.
enum class FluxMode { kinetic, stiff };

struct SolverConfig {
  double dt = 0.01;
  double t_end = 360.0;
  double cfl_safety = 0.5;   // in (0,1]
  int snapshot_every = 200;  // steps between recorded states
  DsdtMode dsdt_mode = DsdtMode::rhs_eval;
  FluxMode flux_mode = FluxMode::kinetic;
  bool auto_dt = false;  // derive dt from the a-priori flux bound / CFL
};

std::vector<std::string> validate(const SolverConfig& c);
void validate_or_throw(const SolverConfig& c);

struct RunStats {
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double max_mass_drift = 0.0;  // max |m(t) - m0| / m0 over all steps
  double min_rho = 0.0;
  double min_N = 0.0;
  double min_f = 0.0;  // kinetic runs only
};

// Recorded state plus face-averaged diagnostics: the net advective flux u
// and the tumbling frequencies at v = +1 / v = -1.
struct Snapshot {
  double t = 0.0;
  std::vector<double> rho, S, N;
  std::vector<double> u, psi_right, psi_left;
};

struct Trajectory {
  Grid1D grid;
  std::vector<Snapshot> snapshots;
  RunStats stats;
};

// One semi-implicit upwind step of the three-field system:
//  - fluxes from current (S, N): dC/dx centered across faces, dC/dt per
//    dsdt_mode, advective flux rho*u with donor cell picked by sign(u),
//  - rho: advection explicit (CFL-checked), diffusion implicit, zero total
//    flux at the walls; discrete mass conserved by the flux form,
//  - S: diffusion and decay implicit, production beta*rho explicit,
//  - N: multiplicative exact integration of the consumption term
//    (diffusion implicit first if D_N > 0).
class MacroSolver {
 public:
  MacroSolver(Grid1D grid, ModelParams params, ResponseFunction phi,
              SolverConfig config);

  // Advances the state by one dt in place.
  void step(MacroState& state);

  // Integrates from `initial` to t_end, recording every snapshot_every
  // steps plus the final state. Deterministic for a given config.
  Trajectory run(const MacroState& initial);

  const SolverConfig& config() const { return config_; }
  const RunStats& stats() const { return stats_; }

 private:
  void compute_face_fluxes(const MacroState& state);
  void record(Trajectory& traj, const MacroState& state) const;

  Grid1D grid_;
  ModelParams params_;
  ResponseFunction phi_;
  SolverConfig config_;
  RunStats stats_;

  // scratch
  std::vector<double> uS_, uN_, u_;          // faces
  std::vector<double> rhsS_, rhsN_;          // centers
  std::vector<double> S_prev_, N_prev_;      // lagged mode
  std::vector<double> work_rhs_;
  bool have_prev_ = false;
};

// Free-function surface mirroring the solver operations.
MacroState macro_step(const MacroState& state, const Grid1D& grid,
                      const ModelParams& params, const ResponseFunction& phi,
                      const SolverConfig& config);
Trajectory macro_run(const MacroState& initial, const Grid1D& grid,
                     const ModelParams& params, const ResponseFunction& phi,
                     const SolverConfig& config);

// Solves (I + dt alpha - dt D_S Lap_h) S_new = S + dt beta rho with
// homogeneous Neumann boundaries.
void solve_S_substep(std::vector<double>& S, const std::vector<double>& rho,
                     const Grid1D& grid, const ModelParams& params, double dt);

// dt actually used by a run: auto_dt picks the largest stable step that
// divides t_end into whole steps.
double resolve_dt(const Grid1D& grid, const ModelParams& params,
                  const ResponseFunction& phi, const SolverConfig& config);

}  // namespace chemo
