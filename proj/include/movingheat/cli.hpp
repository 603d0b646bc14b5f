#pragma once

// Command-line driver. Every command writes its CSV outputs plus manifest.json.
// Exit status: 0 success, 1 validation error, 2 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "movingheat/config.hpp"
#include "movingheat/csv.hpp"
#include "movingheat/diagnostics.hpp"
#include "movingheat/ensemble.hpp"
#include "movingheat/fd_oracle.hpp"
#include "movingheat/galerkin.hpp"
#include "movingheat/spectral_basis.hpp"

#ifndef MOVINGHEAT_VERSION
#define MOVINGHEAT_VERSION "0.1.0-unknown"
#endif

namespace movingheat::cli {

inline constexpr const char *version = MOVINGHEAT_VERSION;

/// Reads a config file, or the config embedded in a manifest.json from an earlier run.
inline RunConfig load_run_config(const std::string &path) {
  if (std::filesystem::path(path).extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read manifest '" + path + "'");
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError("malformed manifest '" + path + "': " + e.what());
    }
    if (!manifest.contains("config") || !manifest["config"].is_string()) {
      throw ValidationError("manifest '" + path + "' has no embedded config");
    }
    return parse_config_text(manifest["config"].get<std::string>());
  }
  return parse_config(path);
}

struct Outputs {
  std::filesystem::path dir;
  std::vector<std::string> files;

  std::string path(const std::string &name) {
    files.push_back(name);
    return (dir / name).string();
  }
};

inline void write_manifest(Outputs &out, const std::string &command, const RunConfig &rc,
                           double seconds, const nlohmann::json &extra) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = version;
  m["seed"] = rc.sim.seed;
  m["wall_clock_seconds"] = seconds;
  m["outputs"] = out.files;
  m["config"] = rc.resolved_text;
  if (!extra.empty()) m["arguments"] = extra;
  std::ofstream f(out.dir / "manifest.json");
  f << m.dump(2) << '\n';
  if (!f) throw ValidationError("failed writing manifest.json");
}

inline void write_trajectory_csv(const std::string &path, const Trajectory &traj, const DomainMotion &domain,
                                 std::size_t n) {
  csv::Writer w(path);
  std::string header = "step,t,a_t,l2_sq,h1_sq";
  for (std::size_t k = 1; k <= n; ++k) header += ",A_" + std::to_string(k);
  w.header(header);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto &s = traj.states[i];
    w.field(traj.steps[i]).field(traj.times[i]).field(domain.a(s.t)).field(l2_norm_sq(s)).field(h1_norm_sq(s, domain));
    for (double c : s.coeffs) w.field(c);
    w.end_row();
  }
  w.close();
}

inline void write_field_csv(const std::string &path, const Trajectory &traj, const DomainMotion &domain,
                            std::size_t grid_size) {
  csv::Writer w(path);
  w.header("t,x,u");
  for (const auto &s : traj.states) {
    const auto snap = synthesize(s, grid_size, domain);
    for (std::size_t i = 0; i < snap.xs.size(); ++i) {
      w.field(snap.t).field(snap.xs[i]).field(snap.values[i]);
      w.end_row();
    }
  }
  w.close();
}

inline void write_energy_csv(const std::string &path, const Trajectory &traj) {
  csv::Writer w(path);
  w.header("t,l2_sq,visc,sto,hs,residual");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto &l = traj.ledgers[i];
    w.field(traj.times[i]).field(l2_norm_sq(traj.states[i])).field(l.visc).field(l.sto).field(l.hs)
        .field(energy_residual(traj, i));
    w.end_row();
  }
  w.close();
}

inline void write_ensemble_csv(const std::string &path, const EnsembleSummary &e) {
  csv::Writer w(path);
  w.header("step,t,mean_l2_sq,var_l2_sq,se_l2_sq,mean_h1_sq,var_h1_sq,se_h1_sq");
  for (std::size_t i = 0; i < e.times.size(); ++i) {
    w.field(e.steps[i]).field(e.times[i]).field(e.mean_l2_sq[i]).field(e.var_l2_sq[i]).field(e.se_l2_sq[i])
        .field(e.mean_h1_sq[i]).field(e.var_h1_sq[i]).field(e.se_h1_sq[i]);
    w.end_row();
  }
  w.close();
}

inline void write_moments_csv(const std::string &path, const EnsembleSummary &e) {
  csv::Writer w(path);
  w.header("quantity,mean,std_error");
  auto row = [&](std::string_view name, double mean, double se) {
    w.field(name).field(mean).field(se);
    w.end_row();
  };
  if (e.n_paths() >= 2) {
    const auto r = moment_report(e);
    row("sup_l2_sq", r.e_sup_l2_sq, r.se_sup_l2_sq);
    row("y_norm_sq", r.e_y_norm_sq, r.se_y_norm_sq);
    row("sup_l2_sq_plus_y_norm_sq", r.e_combined, r.se_combined);
    row("sup_l2_sq_plus_y_norm_sq_p2", r.e_combined_p2, r.se_combined_p2);
    row("final_l2_sq", r.e_final_l2_sq, r.se_final_l2_sq);
    row("energy_balance", r.energy_balance, r.se_energy_balance);
  } else {
    const auto &p = e.paths.front();
    row("sup_l2_sq", p.sup_l2_sq, 0.0);
    row("y_norm_sq", p.y_norm_sq, 0.0);
    row("sup_l2_sq_plus_y_norm_sq", p.sup_l2_sq + p.y_norm_sq, 0.0);
    const double c = p.sup_l2_sq + p.y_norm_sq;
    row("sup_l2_sq_plus_y_norm_sq_p2", c * c, 0.0);
    row("final_l2_sq", p.final_l2_sq, 0.0);
    row("energy_balance", p.final_l2_sq - p.ledger.e0 + p.ledger.visc - p.ledger.hs, 0.0);
  }
  w.close();
}

inline std::vector<std::size_t> parse_levels(const std::string &text) {
  std::vector<std::size_t> levels;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    levels.push_back(config_detail::Reader::to_integer("converge", "levels", config_detail::trim(item)));
  }
  return levels;
}

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string> &args, std::ostream &err = std::cerr) {
  CLI::App app{"Spectral Galerkin simulation of the stochastic heat equation on a moving interval", "movingheat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  std::string config_path, out_dir;
  std::size_t workers = 1, seeds = 10, fd_m = 1024, dump_n = 16;
  std::string levels_text = "8,16,32";
  double fd_dt = 1e-4, dump_t = 0.0;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "Config file, or manifest.json of an earlier run")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides [output] out_dir; MOVINGHEAT_OUT overrides both)");
  };
  auto *simulate_cmd = app.add_subcommand("simulate", "Single path: trajectory.csv and field.csv");
  auto *ensemble_cmd = app.add_subcommand("ensemble", "Monte Carlo ensemble: ensemble.csv and moments.csv");
  auto *converge_cmd = app.add_subcommand("converge", "Self-convergence in n under shared noise: converge.csv");
  auto *energy_cmd = app.add_subcommand("energy-check", "Energy-balance ledger and residual: energy.csv");
  auto *oracle_cmd = app.add_subcommand("oracle-compare", "Compare against the mapped finite-difference solver: oracle.csv");
  auto *coupling_cmd = app.add_subcommand("coupling-dump", "Write the n x n coupling matrix b_jk(t): coupling.csv");
  for (auto *sub : {simulate_cmd, ensemble_cmd, converge_cmd, energy_cmd, oracle_cmd, coupling_cmd}) add_common(sub);
  ensemble_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  converge_cmd->add_option("--levels", levels_text, "Doubling Galerkin levels, e.g. 8,16,32");
  converge_cmd->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--M", fd_m, "Finite-difference intervals in the mapped coordinate");
  oracle_cmd->add_option("--dt-fd", fd_dt, "Finite-difference time step");
  coupling_cmd->add_option("--n", dump_n, "Matrix size")->check(CLI::PositiveNumber);
  coupling_cmd->add_option("--t", dump_t, "Time");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    std::ostringstream sink;
    const int code = app.exit(e, sink, sink);
    if (code == 0) {
      std::cout << sink.str();
      return 0;
    }
    err << sink.str();
    return 1;
  }

  try {
    const auto started = std::chrono::steady_clock::now();
    const RunConfig rc = load_run_config(config_path);
    const SimulationConfig &sim = rc.sim;

    Outputs out;
    out.dir = rc.out_dir;
    if (!out_dir.empty()) out.dir = out_dir;
    if (const char *env = std::getenv("MOVINGHEAT_OUT"); env && *env) out.dir = env;
    std::filesystem::create_directories(out.dir);

    nlohmann::json extra = nlohmann::json::object();
    std::string command;

    if (*simulate_cmd) {
      command = "simulate";
      const auto traj = simulate(sim, initial_state(rc.initial, sim.n, sim.domain));
      write_trajectory_csv(out.path("trajectory.csv"), traj, sim.domain, sim.n);
      write_field_csv(out.path("field.csv"), traj, sim.domain, sim.output.grid_size);
    } else if (*ensemble_cmd) {
      command = "ensemble";
      extra["workers"] = workers;
      const auto ens = simulate_ensemble(sim, initial_state(rc.initial, sim.n, sim.domain), workers);
      write_ensemble_csv(out.path("ensemble.csv"), ens);
      write_moments_csv(out.path("moments.csv"), ens);
    } else if (*converge_cmd) {
      command = "converge";
      extra["levels"] = levels_text;
      extra["seeds"] = seeds;
      const auto rows = self_convergence_study(sim, initial_function(rc.initial, sim.domain),
                                               parse_levels(levels_text), seeds);
      csv::Writer w(out.path("converge.csv"));
      w.header("seed,n,D_x,D_y");
      for (const auto &r : rows) {
        w.field(static_cast<unsigned long long>(r.seed)).field(r.n).field(r.d_x).field(r.d_y);
        w.end_row();
      }
      w.close();
    } else if (*energy_cmd) {
      command = "energy-check";
      const auto traj = simulate(sim, initial_state(rc.initial, sim.n, sim.domain));
      write_energy_csv(out.path("energy.csv"), traj);
    } else if (*oracle_cmd) {
      command = "oracle-compare";
      extra["M"] = fd_m;
      extra["dt_fd"] = fd_dt;
      if (sim.model.kind != DiffusionKind::zero) {
        throw ValidationError("oracle-compare is deterministic; set [noise] kind = zero");
      }
      const auto traj = simulate(sim, initial_state(rc.initial, sim.n, sim.domain));
      // FD saves land on the spectral save grid when the save interval is a multiple of dt_fd.
      const double save_interval = sim.dt * static_cast<double>(sim.output.snapshot_stride);
      const double ratio = save_interval / fd_dt;
      const std::size_t fd_stride =
          std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio && ratio >= 1.0 ? static_cast<std::size_t>(std::round(ratio)) : 0;
      const auto fd = fd_solve(sim.domain, initial_function(rc.initial, sim.domain), fd_m, fd_dt, sim.t_end, fd_stride);
      csv::Writer w(out.path("oracle.csv"));
      w.header("t,discrepancy_l2");
      for (double t : fd.times) {
        bool shared = false;
        for (double ts : traj.times) shared = shared || std::abs(ts - t) <= 1e-9 * std::max(1.0, t);
        if (!shared) continue;
        w.field(t).field(compare_with_spectral(traj, fd, sim.domain, t));
        w.end_row();
      }
      w.close();
    } else if (*coupling_cmd) {
      command = "coupling-dump";
      extra["n"] = dump_n;
      extra["t"] = dump_t;
      const auto b = coupling_matrix(dump_n, dump_t, sim.domain);
      csv::Writer w(out.path("coupling.csv"));
      for (std::size_t j = 1; j <= dump_n; ++j) {
        for (std::size_t k = 1; k <= dump_n; ++k) w.field(b(j, k));
        w.end_row();
      }
      w.close();
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(out, command, rc, seconds, extra);
    return 0;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace movingheat::cli
