#include "chemopulse/chemopulse.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/flux.hpp"
#include "core/kinetic_solver.hpp"
#include "core/macro_solver.hpp"
#include "core/model.hpp"
#include "core/quadrature.hpp"

namespace {

thread_local std::string g_last_error;

cp_status fail(cp_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

cp_status ok() {
  g_last_error.clear();
  return CP_OK;
}

template <typename F>
cp_status guarded(const F& body) {
  try {
    body();
    return ok();
  } catch (const chemo::InvalidArgument& e) {
    return fail(CP_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CP_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CP_ERROR_NUMERICAL, e.what());
  }
}

}  // namespace

// ------------------------------------------------------------------
// Configuration
// ------------------------------------------------------------------

struct cp_config {
  chemo::ModelParams params;
  chemo::Grid1D grid;
  chemo::ResponseFunction response;
  chemo::SolverConfig solver;
  chemo::KineticParams kinetic;
  int kinetic_nodes = 32;
  bool bias_S = true;
  bool bias_N = true;
  double init_decay_rate = 1.0;
  double init_center = -1.0;
};

namespace {

using Getter = std::function<std::string(const cp_config&)>;
using Setter = std::function<void(cp_config&, const std::string&)>;

// Shortest decimal form that parses back to the same binary64 value.
std::string fmt_number(double v) {
  char buf[64];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_number(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw chemo::InvalidArgument("value for '" + key +
                                 "' is not a number: '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9)
    throw chemo::InvalidArgument("value for '" + key +
                                 "' must be an integer: '" + value + "'");
  return static_cast<int>(r);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw chemo::InvalidArgument("value for '" + key +
                               "' must be true or false: '" + value + "'");
}

struct KeyEntry {
  const char* name;
  Getter get;
  Setter set;
};

#define NUMBER_KEY(name, field)                                        \
  {name, [](const cp_config& c) { return fmt_number(c.field); },       \
   [](cp_config& c, const std::string& v) {                            \
     c.field = parse_number(name, v);                                  \
   }}

#define INT_KEY(name, field)                                           \
  {name, [](const cp_config& c) { return std::to_string(c.field); },   \
   [](cp_config& c, const std::string& v) { c.field = parse_int(name, v); }}

#define BOOL_KEY(name, field)                                           \
  {name,                                                                \
   [](const cp_config& c) { return c.field ? std::string("true")        \
                                           : std::string("false"); },   \
   [](cp_config& c, const std::string& v) { c.field = parse_bool(name, v); }}

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
      NUMBER_KEY("params.D_rho", params.D_rho),
      NUMBER_KEY("params.chi_S", params.chi_S),
      NUMBER_KEY("params.chi_N", params.chi_N),
      NUMBER_KEY("params.D_S", params.D_S),
      NUMBER_KEY("params.D_N", params.D_N),
      NUMBER_KEY("params.alpha", params.alpha),
      NUMBER_KEY("params.beta", params.beta),
      NUMBER_KEY("params.gamma", params.gamma),
      NUMBER_KEY("params.epsilon", params.epsilon),
      NUMBER_KEY("params.M", params.M),
      NUMBER_KEY("params.N0", params.N0),
      NUMBER_KEY("grid.L", grid.L),
      INT_KEY("grid.n_cells", grid.n_cells),
      NUMBER_KEY("init.decay_rate", init_decay_rate),
      NUMBER_KEY("init.center", init_center),
      {"response.shape",
       [](const cp_config& c) {
         return c.response.shape == chemo::ResponseShape::arctan
                    ? std::string("arctan")
                    : std::string("bivaluated");
       },
       [](cp_config& c, const std::string& v) {
         if (v == "arctan")
           c.response.shape = chemo::ResponseShape::arctan;
         else if (v == "bivaluated")
           c.response.shape = chemo::ResponseShape::bivaluated;
         else
           throw chemo::InvalidArgument(
               "response.shape must be arctan or bivaluated, got '" + v +
               "'");
       }},
      NUMBER_KEY("response.delta", response.delta),
      NUMBER_KEY("response.phi0", response.phi0),
      NUMBER_KEY("solver.dt", solver.dt),
      NUMBER_KEY("solver.t_end", solver.t_end),
      NUMBER_KEY("solver.cfl_safety", solver.cfl_safety),
      INT_KEY("solver.snapshot_every", solver.snapshot_every),
      {"solver.dsdt_mode",
       [](const cp_config& c) {
         return c.solver.dsdt_mode == chemo::DsdtMode::rhs_eval
                    ? std::string("rhs_eval")
                    : std::string("lagged_difference");
       },
       [](cp_config& c, const std::string& v) {
         if (v == "rhs_eval")
           c.solver.dsdt_mode = chemo::DsdtMode::rhs_eval;
         else if (v == "lagged_difference")
           c.solver.dsdt_mode = chemo::DsdtMode::lagged_difference;
         else
           throw chemo::InvalidArgument(
               "solver.dsdt_mode must be rhs_eval or lagged_difference, "
               "got '" +
               v + "'");
       }},
      {"solver.flux_mode",
       [](const cp_config& c) {
         return c.solver.flux_mode == chemo::FluxMode::kinetic
                    ? std::string("kinetic")
                    : std::string("stiff");
       },
       [](cp_config& c, const std::string& v) {
         if (v == "kinetic")
           c.solver.flux_mode = chemo::FluxMode::kinetic;
         else if (v == "stiff")
           c.solver.flux_mode = chemo::FluxMode::stiff;
         else
           throw chemo::InvalidArgument(
               "solver.flux_mode must be kinetic or stiff, got '" + v + "'");
       }},
      BOOL_KEY("solver.auto_dt", solver.auto_dt),
      NUMBER_KEY("kinetic.mu", kinetic.mu),
      INT_KEY("kinetic.n_nodes", kinetic_nodes),
      BOOL_KEY("kinetic.bias_S", bias_S),
      BOOL_KEY("kinetic.bias_N", bias_N),
  };
  return table;
}

#undef NUMBER_KEY
#undef INT_KEY
#undef BOOL_KEY

const KeyEntry* find_key(const char* key) {
  if (key == nullptr) return nullptr;
  for (const auto& e : key_table())
    if (std::strcmp(e.name, key) == 0) return &e;
  return nullptr;
}

chemo::ResponseFunction make_response(const char* shape, double delta,
                                      double phi0) {
  chemo::ResponseFunction r;
  if (shape == nullptr)
    throw chemo::InvalidArgument("response shape must not be null");
  if (std::strcmp(shape, "arctan") == 0)
    r.shape = chemo::ResponseShape::arctan;
  else if (std::strcmp(shape, "bivaluated") == 0)
    r.shape = chemo::ResponseShape::bivaluated;
  else
    throw chemo::InvalidArgument(std::string("unknown response shape '") +
                                 shape + "'");
  r.delta = delta;
  r.phi0 = phi0;
  chemo::validate_or_throw(r);
  return r;
}

void validate_all(const cp_config& cfg) {
  std::vector<std::string> problems;
  auto collect = [&problems](std::vector<std::string> v) {
    problems.insert(problems.end(), v.begin(), v.end());
  };
  collect(chemo::validate(cfg.params));
  collect(chemo::validate(cfg.grid));
  collect(chemo::validate(cfg.response));
  collect(chemo::validate(cfg.solver));
  collect(chemo::validate(cfg.kinetic));
  if (cfg.kinetic_nodes < 2)
    problems.push_back("kinetic.n_nodes must be at least 2");
  if (!(cfg.init_decay_rate > 0.0))
    problems.push_back("init.decay_rate must be positive");
  if (cfg.init_center >= 0.0 && cfg.init_center > cfg.grid.L)
    problems.push_back("init.center must lie inside the domain");
  if (!problems.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < problems.size(); ++i)
      os << (i ? "; " : "") << problems[i];
    throw chemo::InvalidArgument(os.str());
  }
}

chemo::MacroState make_initial(const cp_config& cfg) {
  if (cfg.init_center < 0.0)
    return chemo::initial_condition(cfg.grid, cfg.params,
                                    cfg.init_decay_rate);
  return chemo::initial_condition_centered(cfg.grid, cfg.params,
                                           cfg.init_decay_rate,
                                           cfg.init_center);
}

cp_status copy_out(const std::string& s, char* buf, size_t buflen) {
  if (buf == nullptr || buflen < s.size() + 1)
    return fail(CP_ERROR_INVALID_ARGUMENT,
                "output buffer too small (need " +
                    std::to_string(s.size() + 1) + " bytes)");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return ok();
}

}  // namespace

extern "C" {

const char* cp_last_error(void) { return g_last_error.c_str(); }

const char* cp_version(void) { return "1.0.0"; }

cp_status cp_config_create(cp_config** out) {
  if (out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "out pointer must not be null");
  return guarded([&] { *out = new cp_config(); });
}

cp_status cp_config_clone(const cp_config* cfg, cp_config** out) {
  if (cfg == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle");
  return guarded([&] { *out = new cp_config(*cfg); });
}

void cp_config_destroy(cp_config* cfg) { delete cfg; }

cp_status cp_config_set(cp_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or key");
  const KeyEntry* entry = find_key(key);
  if (entry == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT,
                std::string("unknown configuration key '") + key + "'");
  return guarded([&] { entry->set(*cfg, value); });
}

cp_status cp_config_set_number(cp_config* cfg, const char* key,
                               double value) {
  return cp_config_set(cfg, key, fmt_number(value).c_str());
}

cp_status cp_config_get(const cp_config* cfg, const char* key, char* buf,
                        size_t buflen) {
  if (cfg == nullptr || key == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or key");
  const KeyEntry* entry = find_key(key);
  if (entry == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT,
                std::string("unknown configuration key '") + key + "'");
  return copy_out(entry->get(*cfg), buf, buflen);
}

cp_status cp_config_get_number(const cp_config* cfg, const char* key,
                               double* out) {
  if (cfg == nullptr || key == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle, key or out");
  const KeyEntry* entry = find_key(key);
  if (entry == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT,
                std::string("unknown configuration key '") + key + "'");
  return guarded([&] {
    const std::string s = entry->get(*cfg);
    if (s == "true")
      *out = 1.0;
    else if (s == "false")
      *out = 0.0;
    else if (s == "arctan" || s == "bivaluated" || s == "rhs_eval" ||
             s == "lagged_difference" || s == "kinetic" || s == "stiff")
      throw chemo::InvalidArgument(std::string("key '") + key +
                                   "' is not numeric");
    else
      *out = parse_number(key, s);
  });
}

cp_status cp_config_validate(const cp_config* cfg) {
  if (cfg == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null handle");
  return guarded([&] { validate_all(*cfg); });
}

size_t cp_config_key_count(void) { return key_table().size(); }

const char* cp_config_key_name(size_t index) {
  const auto& table = key_table();
  if (index >= table.size()) return nullptr;
  return table[index].name;
}

// ------------------------------------------------------------------
// Trajectories
// ------------------------------------------------------------------

struct cp_trajectory {
  chemo::Trajectory traj;
};

cp_status cp_run_macro(const cp_config* cfg, cp_trajectory** out) {
  if (cfg == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle");
  return guarded([&] {
    validate_all(*cfg);
    const chemo::MacroState initial = make_initial(*cfg);
    auto* t = new cp_trajectory{chemo::macro_run(
        initial, cfg->grid, cfg->params, cfg->response, cfg->solver)};
    *out = t;
  });
}

cp_status cp_run_kinetic(const cp_config* cfg, cp_trajectory** out) {
  if (cfg == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle");
  return guarded([&] {
    validate_all(*cfg);
    chemo::KineticParams kp = cfg->kinetic;
    kp.epsilon = cfg->params.epsilon;  // one scaling ratio for the artifact
    const chemo::MacroState initial = make_initial(*cfg);
    auto* t = new cp_trajectory{chemo::coupled_kinetic_run(
        initial, cfg->grid, cfg->params, cfg->response, kp, cfg->solver,
        cfg->kinetic_nodes, cfg->bias_S, cfg->bias_N)};
    *out = t;
  });
}

void cp_trajectory_destroy(cp_trajectory* traj) { delete traj; }

size_t cp_trajectory_snapshot_count(const cp_trajectory* traj) {
  return traj == nullptr ? 0 : traj->traj.snapshots.size();
}

size_t cp_trajectory_cell_count(const cp_trajectory* traj) {
  return traj == nullptr ? 0
                         : static_cast<size_t>(traj->traj.grid.n_cells);
}

cp_status cp_trajectory_times(const cp_trajectory* traj, double* buf,
                              size_t buflen) {
  if (traj == nullptr || buf == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or buffer");
  const size_t n = traj->traj.snapshots.size();
  if (buflen < n)
    return fail(CP_ERROR_INVALID_ARGUMENT, "times buffer too small");
  for (size_t i = 0; i < n; ++i) buf[i] = traj->traj.snapshots[i].t;
  return ok();
}

cp_status cp_trajectory_cell_centers(const cp_trajectory* traj, double* buf,
                                     size_t buflen) {
  if (traj == nullptr || buf == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or buffer");
  const int n = traj->traj.grid.n_cells;
  if (buflen < static_cast<size_t>(n))
    return fail(CP_ERROR_INVALID_ARGUMENT, "centers buffer too small");
  for (int i = 0; i < n; ++i) buf[i] = traj->traj.grid.center(i);
  return ok();
}

cp_status cp_trajectory_field(const cp_trajectory* traj, size_t snapshot,
                              cp_field field, double* buf, size_t buflen) {
  if (traj == nullptr || buf == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or buffer");
  if (snapshot >= traj->traj.snapshots.size())
    return fail(CP_ERROR_INVALID_ARGUMENT, "snapshot index out of range");
  const chemo::Snapshot& snap = traj->traj.snapshots[snapshot];
  const std::vector<double>* src = nullptr;
  switch (field) {
    case CP_FIELD_RHO: src = &snap.rho; break;
    case CP_FIELD_S: src = &snap.S; break;
    case CP_FIELD_N: src = &snap.N; break;
    case CP_FIELD_FLUX: src = &snap.u; break;
    case CP_FIELD_PSI_RIGHT: src = &snap.psi_right; break;
    case CP_FIELD_PSI_LEFT: src = &snap.psi_left; break;
  }
  if (src == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "unknown field");
  if (src->empty())
    return fail(CP_ERROR_INVALID_ARGUMENT,
                "field not recorded for this trajectory");
  if (buflen < src->size())
    return fail(CP_ERROR_INVALID_ARGUMENT, "field buffer too small");
  std::memcpy(buf, src->data(), src->size() * sizeof(double));
  return ok();
}

cp_status cp_trajectory_stats(const cp_trajectory* traj, cp_run_stats* out) {
  if (traj == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  const chemo::RunStats& s = traj->traj.stats;
  out->initial_mass = s.initial_mass;
  out->final_mass = s.final_mass;
  out->max_mass_drift = s.max_mass_drift;
  out->min_rho = s.min_rho;
  out->min_N = s.min_N;
  out->min_f = s.min_f;
  return ok();
}

cp_status cp_trajectory_create(const double* cell_centers, size_t n_cells,
                               cp_trajectory** out) {
  if (cell_centers == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null centers or out");
  if (n_cells < 4)
    return fail(CP_ERROR_INVALID_ARGUMENT, "need at least 4 cells");
  return guarded([&] {
    const double dx = cell_centers[1] - cell_centers[0];
    if (!(dx > 0.0))
      throw chemo::InvalidArgument("cell centers must ascend");
    for (size_t i = 1; i < n_cells; ++i) {
      const double d = cell_centers[i] - cell_centers[i - 1];
      if (std::abs(d - dx) > 1e-9 * std::max(1.0, std::abs(dx)))
        throw chemo::InvalidArgument("cell centers must be uniform");
    }
    auto* t = new cp_trajectory();
    t->traj.grid.L = dx * static_cast<double>(n_cells);
    t->traj.grid.n_cells = static_cast<int>(n_cells);
    *out = t;
  });
}

cp_status cp_trajectory_append(cp_trajectory* traj, double t,
                               const double* rho, const double* S,
                               const double* N, size_t n_cells) {
  if (traj == nullptr || rho == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or rho");
  if (n_cells != static_cast<size_t>(traj->traj.grid.n_cells))
    return fail(CP_ERROR_INVALID_ARGUMENT,
                "snapshot size does not match the trajectory grid");
  if (!traj->traj.snapshots.empty() &&
      !(t > traj->traj.snapshots.back().t))
    return fail(CP_ERROR_INVALID_ARGUMENT,
                "snapshot times must be strictly increasing");
  chemo::Snapshot snap;
  snap.t = t;
  snap.rho.assign(rho, rho + n_cells);
  if (S != nullptr) snap.S.assign(S, S + n_cells);
  else snap.S.assign(n_cells, 0.0);
  if (N != nullptr) snap.N.assign(N, N + n_cells);
  else snap.N.assign(n_cells, 0.0);
  traj->traj.snapshots.push_back(std::move(snap));
  return ok();
}

// ------------------------------------------------------------------
// Analytics
// ------------------------------------------------------------------

cp_status cp_traveling_speed(const cp_config* cfg, double* sigma,
                             int* degenerate) {
  if (cfg == nullptr || sigma == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  return guarded([&] {
    const chemo::SpeedResult r = chemo::traveling_speed(cfg->params);
    *sigma = r.sigma;
    if (degenerate != nullptr) *degenerate = r.degenerate ? 1 : 0;
  });
}

cp_status cp_wave_solution(const cp_config* cfg, cp_wave* out) {
  if (cfg == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  return guarded([&] {
    const chemo::WaveSolution w = chemo::wave_solution(cfg->params);
    out->sigma = w.sigma;
    out->degenerate = w.degenerate ? 1 : 0;
    out->lambda_minus = w.lambda_minus;
    out->lambda_plus = w.lambda_plus;
    out->rho0 = w.rho0;
    out->a1 = w.a1;
    out->a2 = w.a2;
    out->a3 = w.a3;
    out->sprime0_residual = w.sprime0_residual;
  });
}

cp_status cp_profile_rates(const cp_config* cfg, double sigma,
                           double* lambda_minus, double* lambda_plus,
                           double* rho0) {
  if (cfg == nullptr || lambda_minus == nullptr || lambda_plus == nullptr ||
      rho0 == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  return guarded([&] {
    const chemo::ProfileRates r = chemo::profile_rates(sigma, cfg->params);
    *lambda_minus = r.lambda_minus;
    *lambda_plus = r.lambda_plus;
    *rho0 = r.rho0;
  });
}

cp_status cp_green_kernel(double z, double sigma, double D_S, double alpha,
                          double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] { *out = chemo::green_kernel(z, sigma, D_S, alpha); });
}

cp_status cp_cluster_profile(const cp_config* cfg, double* lambda,
                             double* rho0) {
  if (cfg == nullptr || lambda == nullptr || rho0 == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  return guarded([&] {
    const chemo::ClusterProfile c = chemo::cluster_profile(cfg->params);
    *lambda = c.lambda;
    *rho0 = c.rho0;
  });
}

cp_status cp_dispersion(int k, double L, double M, double delta, double alpha,
                        double* lambda_out) {
  if (lambda_out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded(
      [&] { *lambda_out = chemo::dispersion_eigenvalue(k, L, M, delta, alpha); });
}

cp_status cp_stability_condition(double L, double l, double delta, double M,
                                 double* critical_mass, int* stable) {
  if (critical_mass == nullptr || stable == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] {
    const chemo::StabilityResult r =
        chemo::stability_condition(L, l, delta, M);
    *critical_mass = r.critical_mass;
    *stable = r.stable ? 1 : 0;
  });
}

// ------------------------------------------------------------------
// Flux kernels
// ------------------------------------------------------------------

cp_status cp_flux_kinetic(double dcdt, double dcdx, const char* shape,
                          double delta, double phi0, double epsilon,
                          double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] {
    const chemo::ResponseFunction phi = make_response(shape, delta, phi0);
    *out = chemo::kinetic_flux(dcdt, dcdx, phi, epsilon);
  });
}

cp_status cp_flux_kinetic_quad(double dcdt, double dcdx, const char* shape,
                               double delta, double phi0, double epsilon,
                               int n_nodes, double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] {
    const chemo::ResponseFunction phi = make_response(shape, delta, phi0);
    const chemo::Quadrature q = chemo::Quadrature::gauss_legendre(n_nodes);
    *out = chemo::kinetic_flux_quadrature(dcdt, dcdx, phi, epsilon, q);
  });
}

cp_status cp_flux_stiff(double dcdt, double dcdx, double chi, double epsilon,
                        double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] { *out = chemo::stiff_flux(dcdt, dcdx, chi, epsilon); });
}

cp_status cp_tumbling_frequency(double v, double dcdt, double dcdx,
                                const char* shape, double delta, double phi0,
                                double epsilon, double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] {
    const chemo::ResponseFunction phi = make_response(shape, delta, phi0);
    *out = chemo::tumbling_frequency(v, dcdt, dcdx, phi, epsilon);
  });
}

cp_status cp_diffusivity_from_kinetic(double mu, double* out) {
  if (out == nullptr) return fail(CP_ERROR_INVALID_ARGUMENT, "null out");
  return guarded([&] { *out = chemo::diffusivity_from_kinetic(mu); });
}

// ------------------------------------------------------------------
// Pulse fitting
// ------------------------------------------------------------------

cp_status cp_fit_pulse(const cp_trajectory* traj, double window_fraction,
                       const cp_config* cfg, cp_pulse_fit* out) {
  if (traj == nullptr || out == nullptr)
    return fail(CP_ERROR_INVALID_ARGUMENT, "null handle or out");
  return guarded([&] {
    chemo::WaveSolution predicted;
    const chemo::WaveSolution* pred_ptr = nullptr;
    if (cfg != nullptr) {
      try {
        predicted = chemo::wave_solution(cfg->params);
        pred_ptr = &predicted;
      } catch (const std::exception&) {
        pred_ptr = nullptr;  // parameters outside the pulse regime
      }
    }
    const chemo::PulseFit f =
        chemo::fit_pulse(traj->traj, window_fraction, pred_ptr);
    out->peak_found = f.peak_found ? 1 : 0;
    out->pulse_detected = f.pulse_detected ? 1 : 0;
    out->speed = f.speed;
    out->r2_speed = f.r2_speed;
    out->lambda_back = f.lambda_back;
    out->r2_back = f.r2_back;
    out->lambda_front = f.lambda_front;
    out->r2_front = f.r2_front;
    out->peak_mass_fraction = f.peak_mass_fraction;
    out->split_x = f.split_x;
    out->amplitude_first = f.amplitude_first;
    out->amplitude_last = f.amplitude_last;
    out->displacement = f.displacement;
  });
}

}  // extern "C"
