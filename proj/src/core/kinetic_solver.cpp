#include "core/kinetic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/flux.hpp"

namespace chemo {

std::vector<std::string> validate(const KineticParams& p) {
  std::vector<std::string> out;
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
    out.push_back("kinetic epsilon out of range (0,1)");
  if (!(p.mu > 0.0)) out.push_back("kinetic mu must be positive");
  return out;
}

void validate_or_throw(const KineticParams& p) {
  const auto problems = validate(p);
  if (problems.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < problems.size(); ++i)
    os << (i ? "; " : "") << problems[i];
  throw InvalidArgument(os.str());
}

KineticState kinetic_equilibrium(const Grid1D& grid,
                                 const std::vector<double>& rho,
                                 const Quadrature& velocities) {
  if (static_cast<int>(rho.size()) != grid.n_cells)
    throw InvalidArgument("kinetic_equilibrium: rho does not match grid");
  KineticState st;
  st.t = 0.0;
  st.n_cells = grid.n_cells;
  st.velocities = velocities;
  const int nv = velocities.size();
  st.f.resize(static_cast<std::size_t>(grid.n_cells) * nv);
  for (int i = 0; i < grid.n_cells; ++i)
    for (int j = 0; j < nv; ++j) st.at(i, j) = 0.5 * rho[i];  // |V| = 2
  return st;
}

void moments(const KineticState& state, double epsilon,
             std::vector<double>& rho_out, std::vector<double>* flux_out) {
  const int n = state.n_cells;
  const int nv = state.velocities.size();
  rho_out.resize(n);
  if (flux_out) flux_out->resize(n);
  for (int i = 0; i < n; ++i) {
    double r = 0.0, j1 = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double wf = state.velocities.weights[j] * state.at(i, j);
      r += wf;
      j1 += wf * state.velocities.nodes[j];
    }
    rho_out[i] = r;
    if (flux_out) (*flux_out)[i] = j1 / epsilon;
  }
}

double kinetic_mass(const KineticState& state, const Grid1D& grid) {
  double sum = 0.0, c = 0.0;
  const int n = state.n_cells;
  const int nv = state.velocities.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < nv; ++j) {
      const double y = state.velocities.weights[j] * state.at(i, j) - c;
      const double t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
  return sum * grid.dx();
}

void kinetic_transport(KineticState& state, const Grid1D& grid,
                       const KineticParams& kp, double dt,
                       double cfl_safety) {
  const int n = state.n_cells;
  const int nv = state.velocities.size();
  const double dx = grid.dx();
  if (dt > cfl_safety * kp.epsilon * dx * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "kinetic CFL violation at t=" << state.t << ": dt=" << dt
       << " exceeds " << cfl_safety * kp.epsilon * dx;
    throw NumericalError(os.str());
  }

  // Wall ghosts must come from the pre-transport state for the reflected
  // in/outflow pairs to cancel exactly.
  static thread_local std::vector<double> col, ghost_left, ghost_right;
  col.resize(n);
  ghost_left.resize(nv);
  ghost_right.resize(nv);
  for (int j = 0; j < nv; ++j) {
    const int jm = state.velocities.mirror(j);
    ghost_left[j] = state.at(0, jm);
    ghost_right[j] = state.at(n - 1, jm);
  }

  for (int j = 0; j < nv; ++j) {
    const double v = state.velocities.nodes[j];
    const double c = v * dt / (kp.epsilon * dx);
    if (c == 0.0) continue;
    for (int i = 0; i < n; ++i) col[i] = state.at(i, j);
    if (c > 0.0) {
      // Left-wall inflow equals the reflected outgoing population.
      for (int i = n - 1; i >= 1; --i)
        state.at(i, j) = col[i] - c * (col[i] - col[i - 1]);
      state.at(0, j) = col[0] - c * (col[0] - ghost_left[j]);
    } else {
      for (int i = 0; i <= n - 2; ++i)
        state.at(i, j) = col[i] + (-c) * (col[i + 1] - col[i]);
      state.at(n - 1, j) = col[n - 1] + (-c) * (ghost_right[j] - col[n - 1]);
    }
  }
}

namespace {

// Total response at one cell/node from all perceived chemicals.
inline double bias_phi(const std::vector<KineticBias>& biases, int i, double v,
                       double epsilon) {
  double p = 0.0;
  for (const auto& b : biases)
    p += b.phi(epsilon * (*b.dcdt)[i] + v * (*b.dcdx)[i]);
  return p;
}

}  // namespace

void kinetic_collide(KineticState& state,
                     const std::vector<KineticBias>& biases,
                     const KineticParams& kp, double dt) {
  const int n = state.n_cells;
  const int nv = state.velocities.size();
  const double fac = std::exp(-2.0 * kp.mu * dt / (kp.epsilon * kp.epsilon));
  const double bias_rate = kp.mu * dt / kp.epsilon;

  static thread_local std::vector<double> phi_row;
  phi_row.resize(nv);
  for (int i = 0; i < n; ++i) {
    double rho = 0.0;
    for (int j = 0; j < nv; ++j)
      rho += state.velocities.weights[j] * state.at(i, j);
    const double feq = 0.5 * rho;

    // Exact integration of the stiff relaxation (density invariant).
    for (int j = 0; j < nv; ++j)
      state.at(i, j) = feq + (state.at(i, j) - feq) * fac;

    if (biases.empty()) continue;
    double gain = 0.0;
    for (int j = 0; j < nv; ++j) {
      phi_row[j] = bias_phi(biases, i, state.velocities.nodes[j], kp.epsilon);
      gain += state.velocities.weights[j] * phi_row[j] * state.at(i, j);
    }
    for (int j = 0; j < nv; ++j)
      state.at(i, j) += bias_rate * (gain - 2.0 * phi_row[j] * state.at(i, j));
  }
}

void kinetic_step(KineticState& state, const Grid1D& grid,
                  const std::vector<KineticBias>& biases,
                  const KineticParams& kp, double dt, double cfl_safety) {
  kinetic_transport(state, grid, kp, dt, cfl_safety);
  kinetic_collide(state, biases, kp, dt);
  state.t += dt;

  double mn = 0.0;
  for (double v : state.f) mn = std::min(mn, v);
  if (mn < -1e-13) {
    std::ostringstream os;
    os << "negative kinetic density " << mn << " at t=" << state.t;
    throw NumericalError(os.str());
  }
}

double collision_rhs_velocity_sum(const KineticState& state, int cell,
                                  const std::vector<KineticBias>& biases,
                                  const KineticParams& kp) {
  const int nv = state.velocities.size();
  double rho = 0.0;
  for (int j = 0; j < nv; ++j)
    rho += state.velocities.weights[j] * state.at(cell, j);
  double gain = 0.0;
  std::vector<double> phi_row(nv, 0.0);
  for (int j = 0; j < nv; ++j) {
    phi_row[j] =
        bias_phi(biases, cell, state.velocities.nodes[j], kp.epsilon);
    gain += state.velocities.weights[j] * phi_row[j] * state.at(cell, j);
  }
  const double e2 = kp.epsilon * kp.epsilon;
  double sum = 0.0;
  for (int j = 0; j < nv; ++j) {
    const double relax = kp.mu / e2 * (rho - 2.0 * state.at(cell, j));
    const double bias =
        kp.mu / kp.epsilon * (gain - 2.0 * phi_row[j] * state.at(cell, j));
    sum += state.velocities.weights[j] * (relax + bias);
  }
  return sum;
}

Trajectory coupled_kinetic_run(const MacroState& initial, const Grid1D& grid,
                               const ModelParams& params,
                               const ResponseFunction& phi,
                               const KineticParams& kp,
                               const SolverConfig& config, int n_velocities,
                               bool bias_S, bool bias_N) {
  validate_or_throw(grid);
  validate_or_throw(params);
  validate_or_throw(phi);
  validate_or_throw(config);
  validate_or_throw(kp);

  const int n = grid.n_cells;
  const double dx = grid.dx();

  double dt = config.dt;
  if (config.auto_dt && config.t_end > 0.0) {
    const double dt0 =
        std::min(config.dt, config.cfl_safety * kp.epsilon * dx);
    const double steps = std::ceil(config.t_end / dt0 - 1e-12);
    dt = config.t_end / std::max(1.0, steps);
  }

  const Quadrature vel = Quadrature::gauss_legendre(n_velocities);
  KineticState state = kinetic_equilibrium(grid, initial.rho, vel);
  std::vector<double> S = initial.S;
  std::vector<double> N = initial.N;

  std::vector<double> rho_m(initial.rho), flux_m(n, 0.0);
  std::vector<double> dSdt(n, 0.0), dSdx(n, 0.0), dNdt(n, 0.0), dNdx(n, 0.0);

  Trajectory traj;
  traj.grid = grid;
  RunStats stats;
  const double m0 = kinetic_mass(state, grid);
  stats.initial_mass = m0;
  stats.min_rho = *std::min_element(rho_m.begin(), rho_m.end());
  stats.min_N = *std::min_element(N.begin(), N.end());
  stats.min_f = *std::min_element(state.f.begin(), state.f.end());

  const double idx2 = 1.0 / (dx * dx);
  auto update_derivs = [&]() {
    for (int i = 0; i < n; ++i) {
      const double sl = (i == 0) ? S[0] : S[i - 1];
      const double sr = (i == n - 1) ? S[n - 1] : S[i + 1];
      dSdx[i] = (sr - sl) / (2.0 * dx);
      dSdt[i] = params.D_S * (sl - 2.0 * S[i] + sr) * idx2 -
                params.alpha * S[i] + params.beta * rho_m[i];
      const double nl = (i == 0) ? N[0] : N[i - 1];
      const double nr = (i == n - 1) ? N[n - 1] : N[i + 1];
      dNdx[i] = (nr - nl) / (2.0 * dx);
      dNdt[i] = -params.gamma * rho_m[i] * N[i];
    }
  };

  auto record = [&]() {
    Snapshot snap;
    snap.t = state.t;
    snap.rho = rho_m;
    snap.S = S;
    snap.N = N;
    snap.u = flux_m;  // kinetic flux moment j
    snap.psi_right.resize(n);
    snap.psi_left.resize(n);
    for (int i = 0; i < n; ++i) {
      double dev_r = 0.0, dev_l = 0.0;
      if (bias_S) {
        dev_r += phi(params.epsilon * dSdt[i] + dSdx[i]);
        dev_l += phi(params.epsilon * dSdt[i] - dSdx[i]);
      }
      if (bias_N) {
        dev_r += phi(params.epsilon * dNdt[i] + dNdx[i]);
        dev_l += phi(params.epsilon * dNdt[i] - dNdx[i]);
      }
      snap.psi_right[i] = 1.0 + params.epsilon * dev_r;
      snap.psi_left[i] = 1.0 + params.epsilon * dev_l;
    }
    traj.snapshots.push_back(std::move(snap));
  };

  update_derivs();
  record();

  std::vector<KineticBias> biases;
  const long n_steps =
      config.t_end > 0.0 ? std::lround(std::ceil(config.t_end / dt - 1e-9))
                         : 0;
  for (long s = 1; s <= n_steps; ++s) {
    update_derivs();
    biases.clear();
    if (bias_S) biases.push_back({&dSdt, &dSdx, phi});
    if (bias_N) biases.push_back({&dNdt, &dNdx, phi});

    kinetic_step(state, grid, biases, kp, dt, config.cfl_safety);
    moments(state, kp.epsilon, rho_m, &flux_m);

    solve_S_substep(S, rho_m, grid, params, dt);
    for (int i = 0; i < n; ++i)
      N[i] *= std::exp(-params.gamma * rho_m[i] * dt);

    const double m = kinetic_mass(state, grid);
    stats.max_mass_drift =
        std::max(stats.max_mass_drift, std::abs(m - m0) / std::abs(m0));
    stats.min_f = std::min(
        stats.min_f, *std::min_element(state.f.begin(), state.f.end()));
    stats.min_rho = std::min(
        stats.min_rho, *std::min_element(rho_m.begin(), rho_m.end()));
    stats.min_N =
        std::min(stats.min_N, *std::min_element(N.begin(), N.end()));

    if (s % config.snapshot_every == 0 || s == n_steps) {
      update_derivs();
      record();
    }
  }
  stats.final_mass = kinetic_mass(state, grid);
  traj.stats = stats;
  return traj;
}

}  // namespace chemo
