#pragma once

// Monte Carlo ensembles. Paths are independent jobs with per-path noise streams;
// per-path results are stored by path index and reduced in index order, so the
// summary does not depend on how many workers ran or in what order they finished.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "movingheat/diagnostics.hpp"
#include "movingheat/galerkin.hpp"

namespace movingheat {

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0; // unbiased; 0 for a single sample
  double std_error = 0.0;
};

template <class Get>
SampleStats sample_stats(std::size_t count, Get &&get) {
  SampleStats s;
  CompensatedSum sum;
  for (std::size_t i = 0; i < count; ++i) sum.add(get(i));
  s.mean = sum.value() / static_cast<double>(count);
  if (count > 1) {
    CompensatedSum sq;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = get(i) - s.mean;
      sq.add(d * d);
    }
    s.variance = sq.value() / static_cast<double>(count - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(count));
  }
  return s;
}

} // namespace detail

/// Scalars kept from every path.
struct PathSummary {
  double sup_l2_sq = 0.0;  // sup_t |u(t)|^2
  double y_norm_sq = 0.0;  // int ||u||^2
  double final_l2_sq = 0.0;
  double final_h1_sq = 0.0;
  EnergyLedger ledger;     // at t_end
  double max_abs_residual = 0.0;
};

struct EnsembleSummary {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> mean_l2_sq, var_l2_sq, se_l2_sq;
  std::vector<double> mean_h1_sq, var_h1_sq, se_h1_sq;
  std::vector<PathSummary> paths;

  std::size_t n_paths() const { return paths.size(); }
};

template <class Job>
void run_parallel(std::size_t jobs, std::size_t workers, Job &&job) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs;
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline EnsembleSummary simulate_ensemble(const SimulationConfig &config, const CoefficientState &initial,
                                         std::size_t workers = 1) {
  validate(config);
  const std::size_t paths = config.n_paths;
  std::vector<PathSummary> summaries(paths);
  std::vector<std::vector<double>> l2(paths), h1(paths);
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::once_flag grid_once;

  run_parallel(paths, workers, [&](std::size_t p) {
    const Trajectory traj = simulate(config, initial, p);
    auto &l = l2[p];
    auto &h = h1[p];
    l.reserve(traj.size());
    h.reserve(traj.size());
    for (const auto &st : traj.states) {
      l.push_back(l2_norm_sq(st));
      h.push_back(h1_norm_sq(st, config.domain));
    }
    PathSummary &s = summaries[p];
    s.sup_l2_sq = *std::max_element(l.begin(), l.end());
    s.y_norm_sq = y_norm_sq(traj, config.domain);
    s.final_l2_sq = l.back();
    s.final_h1_sq = h.back();
    s.ledger = traj.ledger;
    s.max_abs_residual = max_abs_residual(traj);
    std::call_once(grid_once, [&] {
      steps = traj.steps;
      times = traj.times;
    });
  });

  EnsembleSummary out;
  out.steps = std::move(steps);
  out.times = std::move(times);
  const std::size_t nt = out.times.size();
  for (std::size_t i = 0; i < nt; ++i) {
    const auto sl = detail::sample_stats(paths, [&](std::size_t p) { return l2[p][i]; });
    const auto sh = detail::sample_stats(paths, [&](std::size_t p) { return h1[p][i]; });
    out.mean_l2_sq.push_back(sl.mean);
    out.var_l2_sq.push_back(sl.variance);
    out.se_l2_sq.push_back(sl.std_error);
    out.mean_h1_sq.push_back(sh.mean);
    out.var_h1_sq.push_back(sh.variance);
    out.se_h1_sq.push_back(sh.std_error);
  }
  out.paths = std::move(summaries);
  return out;
}

inline EnsembleSummary simulate_ensemble(const SimulationConfig &config,
                                         const std::function<double(double)> &u0, std::size_t workers = 1) {
  return simulate_ensemble(config, project_initial(u0, config.n, config.domain), workers);
}

/// Monte Carlo estimates of the moment quantities, each with standard error.
struct MomentReport {
  std::size_t n_paths = 0;
  double e_sup_l2_sq = 0.0, se_sup_l2_sq = 0.0;   // E sup_t |u|^2
  double e_y_norm_sq = 0.0, se_y_norm_sq = 0.0;   // E int ||u||^2
  double e_combined = 0.0, se_combined = 0.0;     // E[sup_t |u|^2 + int ||u||^2]
  double e_combined_p2 = 0.0, se_combined_p2 = 0.0; // E[(sup_t |u|^2 + int ||u||^2)^2]
  double e_final_l2_sq = 0.0, se_final_l2_sq = 0.0;
  /// mean(|u(T)|^2) - e0 + mean(visc) - mean(hs), and its standard error.
  double energy_balance = 0.0, se_energy_balance = 0.0;
};

inline MomentReport moment_report(const EnsembleSummary &ensemble) {
  const std::size_t n = ensemble.n_paths();
  if (n < 2) throw ValidationError("moment_report needs at least 2 paths");
  const auto &p = ensemble.paths;
  MomentReport r;
  r.n_paths = n;
  auto fill = [&](double &mean, double &se, auto get) {
    const auto s = detail::sample_stats(n, get);
    mean = s.mean;
    se = s.std_error;
  };
  fill(r.e_sup_l2_sq, r.se_sup_l2_sq, [&](std::size_t i) { return p[i].sup_l2_sq; });
  fill(r.e_y_norm_sq, r.se_y_norm_sq, [&](std::size_t i) { return p[i].y_norm_sq; });
  fill(r.e_combined, r.se_combined, [&](std::size_t i) { return p[i].sup_l2_sq + p[i].y_norm_sq; });
  fill(r.e_combined_p2, r.se_combined_p2, [&](std::size_t i) {
    const double v = p[i].sup_l2_sq + p[i].y_norm_sq;
    return v * v;
  });
  fill(r.e_final_l2_sq, r.se_final_l2_sq, [&](std::size_t i) { return p[i].final_l2_sq; });
  // Per-path combination, so correlations between the terms enter the error bar.
  fill(r.energy_balance, r.se_energy_balance, [&](std::size_t i) {
    return p[i].final_l2_sq - p[i].ledger.e0 + p[i].ledger.visc - p[i].ledger.hs;
  });
  return r;
}

} // namespace movingheat
