#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace cptool {

namespace {

struct TrajDeleter {
  void operator()(cp_trajectory* t) const { cp_trajectory_destroy(t); }
};
using TrajPtr = std::unique_ptr<cp_trajectory, TrajDeleter>;

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory '" + path + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void check(cp_status st, const std::string& what) {
  if (st == CP_OK) return;
  const std::string msg = what + ": " + cp_last_error();
  if (st == CP_ERROR_INVALID_ARGUMENT) throw ConfigError(msg);
  if (st == CP_ERROR_IO) throw IoError(msg);
  throw RunError(msg);
}

std::vector<double> get_field(const cp_trajectory* traj, size_t snap,
                              cp_field field) {
  std::vector<double> buf(cp_trajectory_cell_count(traj));
  check(cp_trajectory_field(traj, snap, field, buf.data(), buf.size()),
        "reading trajectory field");
  return buf;
}

// Lossless text form of a binary64 value.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_snapshot_csv(const std::string& path,
                        const std::vector<double>& x,
                        const std::vector<double>& rho,
                        const std::vector<double>& S,
                        const std::vector<double>& N) {
  std::ofstream out = open_out(path);
  out << "x,rho,S,N\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << fmt(x[i]) << ',' << fmt(rho[i]) << ',' << fmt(S[i]) << ','
        << fmt(N[i]) << '\n';
}

void write_diag_csv(const std::string& path, const std::vector<double>& x,
                    const std::vector<double>& u,
                    const std::vector<double>& psi_r,
                    const std::vector<double>& psi_l) {
  std::ofstream out = open_out(path);
  out << "x,u,psi_right,psi_left\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << fmt(x[i]) << ',' << fmt(u[i]) << ',' << fmt(psi_r[i]) << ','
        << fmt(psi_l[i]) << '\n';
}

void add(Summary& s, const std::string& key, const std::string& v) {
  s.emplace_back(key, v);
}
void add(Summary& s, const std::string& key, double v) {
  s.emplace_back(key, format_full(v));
}
void add(Summary& s, const std::string& key, bool v) {
  s.emplace_back(key, v ? "true" : "false");
}

// Analytic pulse block; skipped cleanly outside the pulse regime.
void add_analytics(Summary& summary, const cp_config* core) {
  double sigma = 0.0;
  int degenerate = 0;
  if (cp_traveling_speed(core, &sigma, &degenerate) != CP_OK) {
    add(summary, "analytic.available", false);
    add(summary, "analytic.note", std::string(cp_last_error()));
    return;
  }
  cp_wave wave{};
  if (cp_wave_solution(core, &wave) != CP_OK) {
    add(summary, "analytic.available", false);
    add(summary, "analytic.note", std::string(cp_last_error()));
    return;
  }
  add(summary, "analytic.available", true);
  add(summary, "analytic.sigma", wave.sigma);
  add(summary, "analytic.degenerate", degenerate != 0);
  add(summary, "analytic.lambda_minus", wave.lambda_minus);
  add(summary, "analytic.lambda_plus", wave.lambda_plus);
  add(summary, "analytic.rho0", wave.rho0);
  add(summary, "analytic.kernel.a1", wave.a1);
  add(summary, "analytic.kernel.a2", wave.a2);
  add(summary, "analytic.kernel.a3", wave.a3);
  add(summary, "analytic.sprime0_residual", wave.sprime0_residual);
}

void add_fit(Summary& summary, const cp_pulse_fit& fit) {
  add(summary, "fit.peak_found", fit.peak_found != 0);
  add(summary, "fit.pulse_detected", fit.pulse_detected != 0);
  add(summary, "fit.speed", fit.speed);
  add(summary, "fit.r2_speed", fit.r2_speed);
  add(summary, "fit.lambda_back", fit.lambda_back);
  add(summary, "fit.r2_back", fit.r2_back);
  add(summary, "fit.lambda_front", fit.lambda_front);
  add(summary, "fit.r2_front", fit.r2_front);
  add(summary, "fit.peak_mass_fraction", fit.peak_mass_fraction);
  add(summary, "fit.split_x", fit.split_x);
  add(summary, "fit.amplitude_first", fit.amplitude_first);
  add(summary, "fit.amplitude_last", fit.amplitude_last);
  add(summary, "fit.displacement", fit.displacement);
}

void add_agreement(Summary& summary) {
  const std::string* sig = summary_find(summary, "analytic.sigma");
  const std::string* speed = summary_find(summary, "fit.speed");
  const std::string* lb = summary_find(summary, "fit.lambda_back");
  const std::string* lm = summary_find(summary, "analytic.lambda_minus");
  const std::string* lf = summary_find(summary, "fit.lambda_front");
  const std::string* lp = summary_find(summary, "analytic.lambda_plus");
  auto ratio = [&](const std::string* a, const std::string* b,
                   const char* key) {
    if (a == nullptr || b == nullptr) return;
    const double av = std::strtod(a->c_str(), nullptr);
    const double bv = std::strtod(b->c_str(), nullptr);
    if (bv != 0.0 && std::isfinite(av) && std::isfinite(bv))
      add(summary, key, av / bv);
  };
  ratio(speed, sig, "agreement.speed_ratio");
  ratio(lb, lm, "agreement.lambda_back_ratio");
  ratio(lf, lp, "agreement.lambda_front_ratio");
}

// Step index of every stored snapshot, reconstructed from the cadence.
std::vector<long> snapshot_steps(const std::vector<double>& times,
                                 long every) {
  std::vector<long> steps(times.size(), 0);
  if (times.size() < 2) return steps;
  const double dt = (times[1] - times[0]) / static_cast<double>(every);
  for (std::size_t i = 0; i < times.size(); ++i)
    steps[i] = std::lround(times[i] / dt);
  return steps;
}

Summary run_simulation(const RunConfig& cfg, bool kinetic,
                       std::ostream& log) {
  ensure_dir(cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();

  cp_trajectory* raw = nullptr;
  check(kinetic ? cp_run_kinetic(cfg.core.get(), &raw)
                : cp_run_macro(cfg.core.get(), &raw),
        kinetic ? "kinetic run" : "macro run");
  TrajPtr traj(raw);

  const size_t n_snaps = cp_trajectory_snapshot_count(traj.get());
  const size_t n_cells = cp_trajectory_cell_count(traj.get());
  std::vector<double> times(n_snaps);
  check(cp_trajectory_times(traj.get(), times.data(), times.size()),
        "reading times");
  std::vector<double> x(n_cells);
  check(cp_trajectory_cell_centers(traj.get(), x.data(), x.size()),
        "reading centers");

  const long every =
      std::lround(core_get_number(cfg.core.get(), "solver.snapshot_every"));
  const std::vector<long> steps = snapshot_steps(times, every);

  std::ofstream index = open_out(cfg.output_dir + "/snapshots.index");
  index << "# step,time,file\n";
  for (size_t i = 0; i < n_snaps; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%08ld.csv", steps[i]);
    write_snapshot_csv(cfg.output_dir + "/" + name, x,
                       get_field(traj.get(), i, CP_FIELD_RHO),
                       get_field(traj.get(), i, CP_FIELD_S),
                       get_field(traj.get(), i, CP_FIELD_N));
    index << steps[i] << ',' << fmt(times[i]) << ',' << name << '\n';
    if (cfg.write_diagnostics) {
      char dname[64];
      std::snprintf(dname, sizeof(dname), "diag_%08ld.csv", steps[i]);
      write_diag_csv(cfg.output_dir + "/" + dname, x,
                     get_field(traj.get(), i, CP_FIELD_FLUX),
                     get_field(traj.get(), i, CP_FIELD_PSI_RIGHT),
                     get_field(traj.get(), i, CP_FIELD_PSI_LEFT));
    }
  }

  cp_run_stats stats{};
  check(cp_trajectory_stats(traj.get(), &stats), "reading stats");

  Summary summary;
  add(summary, "run.mode", std::string(kinetic ? "kinetic" : "macro"));
  add(summary, "run.snapshots", static_cast<double>(n_snaps));
  add(summary, "run.cells", static_cast<double>(n_cells));
  add(summary, "run.t_end", times.back());
  add(summary, "mass.initial", stats.initial_mass);
  add(summary, "mass.final", stats.final_mass);
  add(summary, "mass.max_rel_drift", stats.max_mass_drift);
  add(summary, "positivity.min_rho", stats.min_rho);
  add(summary, "positivity.min_N", stats.min_N);
  if (kinetic) add(summary, "positivity.min_f", stats.min_f);

  cp_pulse_fit fit{};
  const cp_status fit_st =
      cp_fit_pulse(traj.get(), cfg.fit_window, cfg.core.get(), &fit);
  if (fit_st == CP_OK) {
    add_fit(summary, fit);
  } else {
    add(summary, "fit.available", false);
    add(summary, "fit.note", std::string(cp_last_error()));
  }
  add_analytics(summary, cfg.core.get());
  add_agreement(summary);

  const auto t1 = std::chrono::steady_clock::now();
  add(summary, "run.wallclock_seconds",
      std::chrono::duration<double>(t1 - t0).count());
  log << (kinetic ? "kinetic" : "macro") << " run: " << n_snaps
      << " snapshots -> " << cfg.output_dir << "\n";
  return summary;
}

Summary run_speed(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  Summary summary;
  add(summary, "run.mode", std::string("speed"));
  add_analytics(summary, cfg.core.get());
  log << "speed analysis -> " << cfg.output_dir << "\n";
  return summary;
}

Summary run_stability(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  const double L = core_get_number(cfg.core.get(), "grid.L");
  const double alpha = core_get_number(cfg.core.get(), "params.alpha");
  const double delta = core_get_number(cfg.core.get(), "response.delta");
  const double M = core_get_number(cfg.core.get(), "params.M");
  if (!(alpha > 0.0))
    throw ConfigError("stability mode needs params.alpha > 0 (l = alpha^-1/2)");
  const double l = 1.0 / std::sqrt(alpha);

  double m_crit = 0.0;
  int stable = 0;
  check(cp_stability_condition(L, l, delta, M, &m_crit, &stable),
        "stability condition");

  std::ofstream csv = open_out(cfg.output_dir + "/dispersion.csv");
  csv << "k,xi,lambda\n";
  double most_unstable = 0.0;
  int argmax_k = 1;
  for (int k = 1; k <= cfg.stability_kmax; ++k) {
    double lam = 0.0;
    check(cp_dispersion(k, L, M, delta, alpha, &lam), "dispersion");
    csv << k << ',' << fmt(2.0 * M_PI * k / L) << ',' << fmt(lam) << '\n';
    if (k == 1 || lam > most_unstable) {
      most_unstable = lam;
      argmax_k = k;
    }
  }

  Summary summary;
  add(summary, "run.mode", std::string("stability"));
  add(summary, "stability.L", L);
  add(summary, "stability.l", l);
  add(summary, "stability.delta", delta);
  add(summary, "stability.M", M);
  add(summary, "stability.critical_mass", m_crit);
  add(summary, "stability.stable", stable != 0);
  add(summary, "stability.most_unstable_k", static_cast<double>(argmax_k));
  add(summary, "stability.max_eigenvalue", most_unstable);
  log << "stability analysis (M* = " << m_crit << ") -> " << cfg.output_dir
      << "\n";
  return summary;
}

Summary run_cluster(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  double lambda = 0.0, rho0 = 0.0;
  check(cp_cluster_profile(cfg.core.get(), &lambda, &rho0), "cluster profile");
  Summary summary;
  add(summary, "run.mode", std::string("cluster"));
  add(summary, "cluster.lambda", lambda);
  add(summary, "cluster.rho0", rho0);
  log << "cluster profile (lambda = " << lambda << ") -> " << cfg.output_dir
      << "\n";
  return summary;
}

std::vector<double> parse_csv_column(const std::string& line, int columns) {
  std::vector<double> out;
  out.reserve(columns);
  const char* s = line.c_str();
  char* end = nullptr;
  for (int c = 0; c < columns; ++c) {
    const double v = std::strtod(s, &end);
    if (end == s) throw IoError("malformed CSV line: '" + line + "'");
    out.push_back(v);
    s = (*end == ',') ? end + 1 : end;
  }
  return out;
}

Summary run_fit(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  const std::string index_path = cfg.fit_input_dir + "/snapshots.index";
  std::ifstream index(index_path);
  if (!index) throw IoError("cannot open '" + index_path + "'");

  TrajPtr traj;
  std::string line;
  std::size_t n_cells = 0;
  while (std::getline(index, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string step_s, time_s, file_s;
    if (!std::getline(ss, step_s, ',') || !std::getline(ss, time_s, ',') ||
        !std::getline(ss, file_s))
      throw IoError("malformed index line: '" + line + "'");
    const double t = std::strtod(time_s.c_str(), nullptr);

    std::ifstream csv(cfg.fit_input_dir + "/" + file_s);
    if (!csv)
      throw IoError("cannot open snapshot '" + file_s + "' from the index");
    std::string header;
    std::getline(csv, header);
    std::vector<double> x, rho, S, N;
    std::string row;
    while (std::getline(csv, row)) {
      if (row.empty()) continue;
      const std::vector<double> vals = parse_csv_column(row, 4);
      x.push_back(vals[0]);
      rho.push_back(vals[1]);
      S.push_back(vals[2]);
      N.push_back(vals[3]);
    }
    if (!traj) {
      n_cells = x.size();
      cp_trajectory* raw = nullptr;
      check(cp_trajectory_create(x.data(), x.size(), &raw),
            "building trajectory");
      traj.reset(raw);
    }
    if (x.size() != n_cells)
      throw IoError("snapshot '" + file_s + "' has inconsistent cell count");
    check(cp_trajectory_append(traj.get(), t, rho.data(), S.data(), N.data(),
                               n_cells),
          "appending snapshot");
  }
  if (!traj) throw IoError("index '" + index_path + "' lists no snapshots");

  cp_pulse_fit fit{};
  check(cp_fit_pulse(traj.get(), cfg.fit_window, cfg.core.get(), &fit),
        "pulse fit");

  Summary summary;
  add(summary, "run.mode", std::string("fit"));
  add(summary, "fit.input_dir", cfg.fit_input_dir);
  add_fit(summary, fit);
  add_analytics(summary, cfg.core.get());
  add_agreement(summary);
  log << "fit of " << cfg.fit_input_dir << " -> " << cfg.output_dir << "\n";
  return summary;
}

struct SweepPoint {
  long index = 0;
  std::vector<double> values;
  std::string status = "ok";
  Summary summary;
};

Summary run_sweep(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);

  long total = 1;
  for (const auto& a : cfg.axes)
    total *= static_cast<long>(a.values.size());

  std::vector<SweepPoint> points(total);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    points[idx].index = idx;
    points[idx].values.resize(cfg.axes.size());
    for (std::size_t a = cfg.axes.size(); a-- > 0;) {
      const auto& axis = cfg.axes[a];
      points[idx].values[a] = axis.values[rem % axis.values.size()];
      rem /= static_cast<long>(axis.values.size());
    }
  }

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  long workers = cfg.workers > 0 ? cfg.workers : std::max(1, hw);
  workers = std::max(1L, std::min(workers, total));

  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long idx = next.fetch_add(1);
      if (idx >= total) return;
      SweepPoint& point = points[idx];
      try {
        RunConfig sub = cfg;  // clones the core configuration
        sub.mode = cfg.sweep_mode;
        char dir[64];
        std::snprintf(dir, sizeof(dir), "point_%04ld", idx);
        sub.output_dir = cfg.output_dir + "/" + dir;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a)
          if (cp_config_set_number(sub.core.get(),
                                   cfg.axes[a].parameter.c_str(),
                                   point.values[a]) != CP_OK)
            throw ConfigError(cp_last_error());
        if (cp_config_validate(sub.core.get()) != CP_OK)
          throw ConfigError(cp_last_error());
        std::ostringstream quiet;
        if (sub.mode == "kinetic")
          point.summary = run_simulation(sub, true, quiet);
        else if (sub.mode == "speed")
          point.summary = run_speed(sub, quiet);
        else
          point.summary = run_simulation(sub, false, quiet);
        write_summary_file(sub.output_dir + "/summary.txt", point.summary);
        std::ofstream cfg_out = open_out(sub.output_dir +
                                         "/config_resolved.txt");
        cfg_out << serialize(sub);
      } catch (const std::exception& e) {
        point.status = std::string("failed: ") + e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // One row per point, in index order regardless of scheduling.
  const char* metric_keys[] = {"fit.speed",
                               "fit.pulse_detected",
                               "fit.lambda_back",
                               "fit.lambda_front",
                               "fit.peak_mass_fraction",
                               "analytic.sigma",
                               "mass.max_rel_drift"};
  std::ofstream csv = open_out(cfg.output_dir + "/sweep_summary.csv");
  csv << "index,status";
  for (const auto& a : cfg.axes) csv << ',' << a.parameter;
  for (const char* k : metric_keys) csv << ',' << k;
  csv << '\n';
  long failures = 0;
  for (const auto& point : points) {
    csv << point.index << ',' << (point.status == "ok" ? "ok" : "failed");
    for (double v : point.values) csv << ',' << fmt(v);
    for (const char* k : metric_keys) {
      const std::string* v = summary_find(point.summary, k);
      csv << ',' << (v ? *v : std::string());
    }
    csv << '\n';
    if (point.status != "ok") {
      log << "point " << point.index << " " << point.status << "\n";
      ++failures;
    }
  }

  Summary summary;
  add(summary, "run.mode", std::string("sweep"));
  add(summary, "sweep.points", static_cast<double>(total));
  add(summary, "sweep.failures", static_cast<double>(failures));
  add(summary, "sweep.workers", static_cast<double>(workers));
  log << "sweep: " << total - failures << "/" << total << " points ok -> "
      << cfg.output_dir << "\n";
  if (failures > 0)
    throw RunError(std::to_string(failures) +
                   " sweep point(s) failed; partial results kept in " +
                   cfg.output_dir);
  return summary;
}

}  // namespace

// Shortest decimal form that parses back to the same binary64 value.
std::string format_full(double v) {
  char buf[64];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_summary_file(const std::string& path, const Summary& summary) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : summary) out << key << " = " << value << "\n";
}

Summary read_summary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summary '" + path + "'");
  Summary out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(0, 1);
    out.emplace_back(key, value);
  }
  return out;
}

const std::string* summary_find(const Summary& s, const std::string& key) {
  for (const auto& [k, v] : s)
    if (k == key) return &v;
  return nullptr;
}

Summary execute(const RunConfig& cfg, std::ostream& log) {
  validate_run_config(cfg);

  Summary summary;
  if (cfg.mode == "macro")
    summary = run_simulation(cfg, false, log);
  else if (cfg.mode == "kinetic")
    summary = run_simulation(cfg, true, log);
  else if (cfg.mode == "speed")
    summary = run_speed(cfg, log);
  else if (cfg.mode == "stability")
    summary = run_stability(cfg, log);
  else if (cfg.mode == "cluster")
    summary = run_cluster(cfg, log);
  else if (cfg.mode == "fit")
    summary = run_fit(cfg, log);
  else if (cfg.mode == "sweep")
    summary = run_sweep(cfg, log);
  else
    throw ConfigError("unknown mode '" + cfg.mode + "'");

  write_summary_file(cfg.output_dir + "/summary.txt", summary);
  std::ofstream cfg_out = open_out(cfg.output_dir + "/config_resolved.txt");
  cfg_out << serialize(cfg);
  return summary;
}

}  // namespace cptool
