/*
 * chemopulse - a 1D laboratory for chemotactic traveling pulses.
 *
 * C interface to the solver core. All entry points return cp_status;
 * results come back through out-parameters. Heavyweight objects
 * (configurations, trajectories) are opaque handles owned by the library
 * and released with the matching *_destroy call. On failure the
 * thread-local message from cp_last_error() describes every violated
 * constraint of the failing call.
 *
 * Unless stated otherwise, functions are thread-safe as long as each
 * handle is used by one thread at a time.
 */

#ifndef CHEMOPULSE_H
#define CHEMOPULSE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERROR_INVALID_ARGUMENT = 1, /* bad key, bad value, violated invariant */
  CP_ERROR_NUMERICAL = 2,        /* CFL violation, lost bracket, ...       */
  CP_ERROR_IO = 3                /* reserved for callers; never set here   */
} cp_status;

/* Message for the last failing call on this thread ("" if none). The
 * pointer stays valid until the next chemopulse call on the thread. */
const char* cp_last_error(void);

const char* cp_version(void);

/* ------------------------------------------------------------------ */
/* Configuration                                                       */
/* ------------------------------------------------------------------ */

/* A configuration bundles the model coefficients, grid, initial profile,
 * response function, time stepper and kinetic settings. Keys:
 *
 *   params.D_rho params.chi_S params.chi_N params.D_S params.D_N
 *   params.alpha params.beta params.gamma params.epsilon params.M
 *   params.N0
 *   grid.L grid.n_cells
 *   init.decay_rate init.center          (center < 0: bump at the left wall)
 *   response.shape                       (arctan | bivaluated)
 *   response.delta response.phi0
 *   solver.dt solver.t_end solver.cfl_safety solver.snapshot_every
 *   solver.dsdt_mode                     (rhs_eval | lagged_difference)
 *   solver.flux_mode                     (kinetic | stiff)
 *   solver.auto_dt                       (true | false)
 *   kinetic.mu kinetic.n_nodes kinetic.bias_S kinetic.bias_N
 *
 * cp_config_create yields the reference parameter set (unlimited-nutrient
 * stiff-response regime). Unknown keys and malformed values are
 * CP_ERROR_INVALID_ARGUMENT.
 */
typedef struct cp_config cp_config;

cp_status cp_config_create(cp_config** out);
cp_status cp_config_clone(const cp_config* cfg, cp_config** out);
void cp_config_destroy(cp_config* cfg);

cp_status cp_config_set(cp_config* cfg, const char* key, const char* value);
cp_status cp_config_set_number(cp_config* cfg, const char* key, double value);
cp_status cp_config_get(const cp_config* cfg, const char* key, char* buf,
                        size_t buflen);
cp_status cp_config_get_number(const cp_config* cfg, const char* key,
                               double* out);

/* Checks every invariant; the error message lists all violations. */
cp_status cp_config_validate(const cp_config* cfg);

/* Stable enumeration of the key set, for generic serialization. */
size_t cp_config_key_count(void);
const char* cp_config_key_name(size_t index); /* NULL when out of range */

/* ------------------------------------------------------------------ */
/* Runs and trajectories                                               */
/* ------------------------------------------------------------------ */

typedef struct cp_trajectory cp_trajectory;

typedef enum cp_field {
  CP_FIELD_RHO = 0,
  CP_FIELD_S = 1,
  CP_FIELD_N = 2,
  CP_FIELD_FLUX = 3,      /* macro: net drift u at centers; kinetic: moment j */
  CP_FIELD_PSI_RIGHT = 4, /* tumbling frequency moving right (v = +1) */
  CP_FIELD_PSI_LEFT = 5   /* tumbling frequency moving left  (v = -1) */
} cp_field;

typedef struct cp_run_stats {
  double initial_mass;
  double final_mass;
  double max_mass_drift; /* max |m(t) - m(0)| / m(0) over every step */
  double min_rho;
  double min_N;
  double min_f; /* kinetic runs; 0 for macro runs */
} cp_run_stats;

/* Macroscopic semi-implicit upwind run from the configured initial
 * profile to solver.t_end. Deterministic for a given configuration. */
cp_status cp_run_macro(const cp_config* cfg, cp_trajectory** out);

/* Velocity-resolved kinetic run coupled to the same chemical dynamics;
 * snapshots hold the density moment. */
cp_status cp_run_kinetic(const cp_config* cfg, cp_trajectory** out);

void cp_trajectory_destroy(cp_trajectory* traj);
size_t cp_trajectory_snapshot_count(const cp_trajectory* traj);
size_t cp_trajectory_cell_count(const cp_trajectory* traj);
cp_status cp_trajectory_times(const cp_trajectory* traj, double* buf,
                              size_t buflen);
cp_status cp_trajectory_cell_centers(const cp_trajectory* traj, double* buf,
                                     size_t buflen);
cp_status cp_trajectory_field(const cp_trajectory* traj, size_t snapshot,
                              cp_field field, double* buf, size_t buflen);
cp_status cp_trajectory_stats(const cp_trajectory* traj, cp_run_stats* out);

/* Assembling a trajectory from external data (e.g. re-fitting archived
 * snapshot files). Cell centers must be uniform and ascending. */
cp_status cp_trajectory_create(const double* cell_centers, size_t n_cells,
                               cp_trajectory** out);
cp_status cp_trajectory_append(cp_trajectory* traj, double t,
                               const double* rho, const double* S,
                               const double* N, size_t n_cells);

/* ------------------------------------------------------------------ */
/* Closed-form analytics                                               */
/* ------------------------------------------------------------------ */

/* Pulse speed from the stiff-response balance
 *   chi_N - sigma/(1 - (eps sigma)^2) = chi_S sigma / sqrt(4 D_S alpha + sigma^2);
 * unique root in (0, 1/eps). chi_N = 0 returns sigma = 0 with
 * *degenerate = 1. Independent of M and D_rho. */
cp_status cp_traveling_speed(const cp_config* cfg, double* sigma,
                             int* degenerate);

typedef struct cp_wave {
  double sigma;
  int degenerate;
  double lambda_minus; /* back-tail rate, > 0 */
  double lambda_plus;  /* front-tail rate, < 0 */
  double rho0;         /* peak density, M / (1/lambda_- + 1/|lambda_+|) */
  double a1, a2, a3;   /* signal kernel constants */
  double sprime0_residual; /* (K' * beta rho)(0), ~0 at the true speed */
} cp_wave;

cp_status cp_wave_solution(const cp_config* cfg, cp_wave* out);

/* Exponential tail rates for a prescribed speed. */
cp_status cp_profile_rates(const cp_config* cfg, double sigma,
                           double* lambda_minus, double* lambda_plus,
                           double* rho0);

/* Signal kernel K(z) = a1 exp(-a2|z| - a3 z); integrates to 1/alpha. */
cp_status cp_green_kernel(double z, double sigma, double D_S, double alpha,
                          double* out);

/* Zero-speed aggregate: lambda = chi_S / D_rho (mass-independent width),
 * rho0 = M lambda / 2. */
cp_status cp_cluster_profile(const cp_config* cfg, double* lambda,
                             double* rho0);

/* Growth rate of mode k on a domain of length L:
 * lambda(k) = -xi^2 + (M/(delta L)) xi^2/(alpha + xi^2), xi = 2 pi k / L. */
cp_status cp_dispersion(int k, double L, double M, double delta, double alpha,
                        double* lambda_out);

/* Uniform state is stable iff M < M* = delta L / l^2 + 4 pi^2 delta / L,
 * where l = 1/sqrt(alpha) is the signal range. */
cp_status cp_stability_condition(double L, double l, double delta, double M,
                                 double* critical_mass, int* stable);

/* ------------------------------------------------------------------ */
/* Flux kernels                                                        */
/* ------------------------------------------------------------------ */

/* Closed-form -(1/2) \int_{-1}^{1} v phi(eps dcdt + v dcdx) dv. */
cp_status cp_flux_kinetic(double dcdt, double dcdx, const char* shape,
                          double delta, double phi0, double epsilon,
                          double* out);

/* Same integral by Gauss-Legendre quadrature with n_nodes nodes. */
cp_status cp_flux_kinetic_quad(double dcdt, double dcdx, const char* shape,
                               double delta, double phi0, double epsilon,
                               int n_nodes, double* out);

/* chi (1 - (eps dcdt / dcdx)^2)_+ sign(dcdx); 0 where dcdx = 0. */
cp_status cp_flux_stiff(double dcdt, double dcdx, double chi, double epsilon,
                        double* out);

/* 1 + eps phi(eps dcdt + v dcdx). */
cp_status cp_tumbling_frequency(double v, double dcdt, double dcdx,
                                const char* shape, double delta, double phi0,
                                double epsilon, double* out);

/* 1 / (6 mu), the diffusivity induced by unbiased run-and-tumble. */
cp_status cp_diffusivity_from_kinetic(double mu, double* out);

/* ------------------------------------------------------------------ */
/* Pulse fitting                                                       */
/* ------------------------------------------------------------------ */

typedef struct cp_pulse_fit {
  int peak_found;
  int pulse_detected; /* monotone forward motion by a significant margin */
  double speed;
  double r2_speed;
  double lambda_back; /* fitted back-tail rate (> 0 for a pulse) */
  double r2_back;
  double lambda_front; /* fitted front-tail rate (< 0 for a pulse) */
  double r2_front;
  double peak_mass_fraction; /* mass in the rightmost peak's basin */
  double split_x;            /* trough separating the basin, -1 if none */
  double amplitude_first;
  double amplitude_last;
  double displacement;
} cp_pulse_fit;

/* Tracks the rightmost significant peak over the trailing
 * window_fraction of the trajectory. When cfg is non-NULL and its
 * parameters admit a pulse, the predicted tail rates size the fitting
 * windows. */
cp_status cp_fit_pulse(const cp_trajectory* traj, double window_fraction,
                       const cp_config* cfg, cp_pulse_fit* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CHEMOPULSE_H */
