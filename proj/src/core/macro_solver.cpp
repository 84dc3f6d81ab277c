#include "core/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/flux.hpp"
#include "core/tridiagonal.hpp"

namespace chemo {

std::vector<std::string> validate(const SolverConfig& c) {
  std::vector<std::string> out;
  if (!(c.dt > 0.0)) out.push_back("dt must be positive");
  if (!(c.t_end >= 0.0)) out.push_back("t_end must be non-negative");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0))
    out.push_back("cfl_safety out of range (0,1]");
  if (c.snapshot_every < 1) out.push_back("snapshot_every must be at least 1");
  return out;
}

void validate_or_throw(const SolverConfig& c) {
  const auto problems = validate(c);
  if (problems.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < problems.size(); ++i)
    os << (i ? "; " : "") << problems[i];
  throw InvalidArgument(os.str());
}

namespace {

// Right side of the S equation at cell centers with Neumann ends.
void chemical_rhs(const std::vector<double>& C, const std::vector<double>& rho,
                  double D, double loss_lin, const std::vector<double>* loss_mul,
                  double src, double dx, std::vector<double>& out) {
  const int n = static_cast<int>(C.size());
  out.resize(n);
  const double idx2 = 1.0 / (dx * dx);
  for (int i = 0; i < n; ++i) {
    const double left = (i == 0) ? C[0] : C[i - 1];
    const double right = (i == n - 1) ? C[n - 1] : C[i + 1];
    double v = D * (left - 2.0 * C[i] + right) * idx2 - loss_lin * C[i] +
               src * rho[i];
    if (loss_mul) v -= (*loss_mul)[i] * C[i];
    out[i] = v;
  }
}

}  // namespace

void solve_S_substep(std::vector<double>& S, const std::vector<double>& rho,
                     const Grid1D& grid, const ModelParams& params,
                     double dt) {
  const int n = static_cast<int>(S.size());
  if (static_cast<int>(rho.size()) != n || n != grid.n_cells)
    throw InvalidArgument("solve_S_substep: field sizes do not match grid");
  const double dx = grid.dx();
  const double r = dt * params.D_S / (dx * dx);
  const double a = 1.0 + dt * params.alpha;

  static thread_local TridiagWorkspace ws;
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = S[i] + dt * params.beta * rho[i];
  solve_neumann_system(a, r, rhs, S, ws);
}

MacroSolver::MacroSolver(Grid1D grid, ModelParams params, ResponseFunction phi,
                         SolverConfig config)
    : grid_(grid), params_(params), phi_(phi), config_(config) {
  validate_or_throw(grid_);
  validate_or_throw(params_);
  validate_or_throw(phi_);
  validate_or_throw(config_);
  const int n = grid_.n_cells;
  uS_.assign(n + 1, 0.0);
  uN_.assign(n + 1, 0.0);
  u_.assign(n + 1, 0.0);
}

void MacroSolver::compute_face_fluxes(const MacroState& state) {
  const int n = grid_.n_cells;
  const double dx = grid_.dx();
  const double eps = params_.epsilon;

  // Temporal derivative estimates at cell centers.
  switch (config_.dsdt_mode) {
    case DsdtMode::rhs_eval: {
      chemical_rhs(state.S, state.rho, params_.D_S, params_.alpha, nullptr,
                   params_.beta, dx, rhsS_);
      // dN/dt = D_N lap N - gamma rho N
      rhsN_.resize(n);
      const double idx2 = 1.0 / (dx * dx);
      for (int i = 0; i < n; ++i) {
        const double left = (i == 0) ? state.N[0] : state.N[i - 1];
        const double right = (i == n - 1) ? state.N[n - 1] : state.N[i + 1];
        rhsN_[i] = params_.D_N * (left - 2.0 * state.N[i] + right) * idx2 -
                   params_.gamma * state.rho[i] * state.N[i];
      }
      break;
    }
    case DsdtMode::lagged_difference: {
      rhsS_.assign(n, 0.0);
      rhsN_.assign(n, 0.0);
      if (have_prev_) {
        const double idt = 1.0 / config_.dt;
        for (int i = 0; i < n; ++i) {
          rhsS_[i] = (state.S[i] - S_prev_[i]) * idt;
          rhsN_[i] = (state.N[i] - N_prev_[i]) * idt;
        }
      }
      break;
    }
  }

  // Face values: spatial derivative centered across the face, temporal
  // derivative averaged from the adjacent centers (half-point evaluation).
  uS_[0] = uS_[n] = 0.0;
  uN_[0] = uN_[n] = 0.0;
  for (int k = 1; k < n; ++k) {
    const double dSdx = (state.S[k] - state.S[k - 1]) / dx;
    const double dNdx = (state.N[k] - state.N[k - 1]) / dx;
    const double dSdt = 0.5 * (rhsS_[k - 1] + rhsS_[k]);
    const double dNdt = 0.5 * (rhsN_[k - 1] + rhsN_[k]);
    if (config_.flux_mode == FluxMode::stiff) {
      uS_[k] = stiff_flux(dSdt, dSdx, params_.chi_S, eps);
      uN_[k] = stiff_flux(dNdt, dNdx, params_.chi_N, eps);
    } else {
      uS_[k] = 2.0 * params_.chi_S * kinetic_flux(dSdt, dSdx, phi_, eps);
      uN_[k] = 2.0 * params_.chi_N * kinetic_flux(dNdt, dNdx, phi_, eps);
    }
  }
  for (int k = 0; k <= n; ++k) u_[k] = uS_[k] + uN_[k];
}

void MacroSolver::step(MacroState& state) {
  const int n = grid_.n_cells;
  const double dx = grid_.dx();
  const double dt = config_.dt;

  compute_face_fluxes(state);

  double umax = 0.0;
  for (int k = 1; k < n; ++k)
    umax = std::max(umax, std::abs(uS_[k]) + std::abs(uN_[k]));
  if (umax > 0.0 && dt > config_.cfl_safety * dx / umax) {
    std::ostringstream os;
    os << "CFL violation at t=" << state.t << ": dt=" << dt
       << " exceeds " << config_.cfl_safety * dx / umax
       << " (max |u_S|+|u_N| = " << umax << "); step refused";
    throw NumericalError(os.str());
  }

  if (config_.dsdt_mode == DsdtMode::lagged_difference) {
    S_prev_ = state.S;
    N_prev_ = state.N;
    have_prev_ = true;
  }

  // Advection, explicit upwind in flux form (exactly conservative).
  work_rhs_.resize(n);
  {
    double f_left = 0.0;  // zero total flux at the walls
    for (int i = 0; i < n; ++i) {
      double f_right = 0.0;
      if (i < n - 1) {
        const double uf = u_[i + 1];
        f_right = uf > 0.0 ? uf * state.rho[i] : uf * state.rho[i + 1];
      }
      work_rhs_[i] = state.rho[i] - dt / dx * (f_right - f_left);
      f_left = f_right;
    }
  }

  // Diffusion, implicit.
  static thread_local TridiagWorkspace ws;
  const double r_rho = dt * params_.D_rho / (dx * dx);
  solve_neumann_system(1.0, r_rho, work_rhs_, state.rho, ws);

  double mn = state.rho[0];
  for (int i = 1; i < n; ++i) mn = std::min(mn, state.rho[i]);
  stats_.min_rho = std::min(stats_.min_rho, mn);
  if (mn < -1e-13) {
    std::ostringstream os;
    os << "negative density " << mn << " at t=" << state.t + dt
       << " (scheme bug signal)";
    throw NumericalError(os.str());
  }

  // Chemical substeps use the updated density.
  solve_S_substep(state.S, state.rho, grid_, params_, dt);

  if (params_.D_N > 0.0) {
    const double r_n = dt * params_.D_N / (dx * dx);
    work_rhs_ = state.N;
    solve_neumann_system(1.0, r_n, work_rhs_, state.N, ws);
  }
  double mn_N = state.N[0];
  for (int i = 0; i < n; ++i) {
    state.N[i] *= std::exp(-params_.gamma * state.rho[i] * dt);
    mn_N = std::min(mn_N, state.N[i]);
  }
  stats_.min_N = std::min(stats_.min_N, mn_N);

  state.t += dt;
}

void MacroSolver::record(Trajectory& traj, const MacroState& state) const {
  const int n = grid_.n_cells;
  Snapshot snap;
  snap.t = state.t;
  snap.rho = state.rho;
  snap.S = state.S;
  snap.N = state.N;

  // Diagnostics at cell centers: net flux averaged from faces, tumbling
  // frequencies for the fastest right/left movers from centered gradients
  // and the equations' right sides.
  snap.u.resize(n);
  snap.psi_right.resize(n);
  snap.psi_left.resize(n);
  const double dx = grid_.dx();
  const double eps = params_.epsilon;
  std::vector<double> rS, rN;
  chemical_rhs(state.S, state.rho, params_.D_S, params_.alpha, nullptr,
               params_.beta, dx, rS);
  rN.resize(n);
  for (int i = 0; i < n; ++i)
    rN[i] = -params_.gamma * state.rho[i] * state.N[i];
  for (int i = 0; i < n; ++i) {
    snap.u[i] = 0.5 * (u_[i] + u_[i + 1]);
    const double sl = (i == 0) ? state.S[0] : state.S[i - 1];
    const double sr = (i == n - 1) ? state.S[n - 1] : state.S[i + 1];
    const double nl = (i == 0) ? state.N[0] : state.N[i - 1];
    const double nr = (i == n - 1) ? state.N[n - 1] : state.N[i + 1];
    const double dSdx = (sr - sl) / (2.0 * dx);
    const double dNdx = (nr - nl) / (2.0 * dx);
    // Both perceived chemicals contribute to the tumbling deviation.
    snap.psi_right[i] = tumbling_frequency(1.0, rS[i], dSdx, phi_, eps) +
                        eps * phi_(eps * rN[i] + dNdx);
    snap.psi_left[i] = tumbling_frequency(-1.0, rS[i], dSdx, phi_, eps) +
                       eps * phi_(eps * rN[i] - dNdx);
  }
  traj.snapshots.push_back(std::move(snap));
}

Trajectory MacroSolver::run(const MacroState& initial) {
  const int n = grid_.n_cells;
  if (static_cast<int>(initial.rho.size()) != n ||
      static_cast<int>(initial.S.size()) != n ||
      static_cast<int>(initial.N.size()) != n)
    throw InvalidArgument("initial state does not match the grid");

  Trajectory traj;
  traj.grid = grid_;
  stats_ = RunStats{};
  have_prev_ = false;

  MacroState state = initial;
  const double m0 = mass(state, grid_);
  stats_.initial_mass = m0;
  stats_.min_rho = *std::min_element(state.rho.begin(), state.rho.end());
  stats_.min_N = *std::min_element(state.N.begin(), state.N.end());

  // Ensure the flux scratch is populated for the first snapshot.
  compute_face_fluxes(state);
  record(traj, state);

  const long n_steps =
      config_.t_end > 0.0
          ? std::lround(std::ceil(config_.t_end / config_.dt - 1e-9))
          : 0;
  for (long s = 1; s <= n_steps; ++s) {
    step(state);  // step errors carry the failing time
    state.t = s * config_.dt;  // keep snapshot times exact
    const double m = mass(state, grid_);
    stats_.max_mass_drift =
        std::max(stats_.max_mass_drift, std::abs(m - m0) / std::abs(m0));
    if (s % config_.snapshot_every == 0 || s == n_steps)
      record(traj, state);
  }
  stats_.final_mass = mass(state, grid_);
  traj.stats = stats_;
  return traj;
}

MacroState macro_step(const MacroState& state, const Grid1D& grid,
                      const ModelParams& params, const ResponseFunction& phi,
                      const SolverConfig& config) {
  MacroSolver solver(grid, params, phi, config);
  MacroState out = state;
  solver.step(out);
  return out;
}

Trajectory macro_run(const MacroState& initial, const Grid1D& grid,
                     const ModelParams& params, const ResponseFunction& phi,
                     const SolverConfig& config) {
  SolverConfig cfg = config;
  cfg.dt = resolve_dt(grid, params, phi, config);
  MacroSolver solver(grid, params, phi, cfg);
  return solver.run(initial);
}

double resolve_dt(const Grid1D& grid, const ModelParams& params,
                  const ResponseFunction& phi, const SolverConfig& config) {
  if (!config.auto_dt || config.t_end <= 0.0) return config.dt;
  const double bound = (params.chi_S + params.chi_N) * phi.max_abs();
  double dt0 = config.dt;
  if (bound > 0.0)
    dt0 = std::min(dt0, config.cfl_safety * grid.dx() / bound);
  const double n = std::ceil(config.t_end / dt0 - 1e-12);
  return config.t_end / std::max(1.0, n);
}

}  // namespace chemo
