#pragma once

// Trajectory-level diagnostics: energy-balance residual, space-time norms and the
// truncation self-convergence study.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "movingheat/errors.hpp"
#include "movingheat/galerkin.hpp"
#include "movingheat/spectral_basis.hpp"

namespace movingheat {

/// r(t) = |u(t)|^2 - e0 + visc(t) - sto(t) - hs(t) at saved index `index`.
inline double energy_residual(const Trajectory &traj, std::size_t index) {
  if (index >= traj.size()) {
    std::ostringstream msg;
    msg << "trajectory index " << index << " beyond " << traj.size() << " saved states";
    throw ValidationError(msg.str());
  }
  const EnergyLedger &l = traj.ledgers[index];
  return l2_norm_sq(traj.states[index]) - l.e0 + l.visc - l.sto - l.hs;
}

inline double max_abs_residual(const Trajectory &traj) {
  double r = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) r = std::max(r, std::abs(energy_residual(traj, i)));
  return r;
}

/// sup_t |u(t)|_t over saved states.
inline double x_norm(const Trajectory &traj) {
  double s = 0.0;
  for (const auto &st : traj.states) s = std::max(s, l2_norm_sq(st));
  return std::sqrt(s);
}

/// int_0^T ||u(t)||_t^2 dt, trapezoid over saved states.
inline double y_norm_sq(const Trajectory &traj, const DomainMotion &domain) {
  double s = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double h = traj.times[i] - traj.times[i - 1];
    s += 0.5 * h * (h1_norm_sq(traj.states[i - 1], domain) + h1_norm_sq(traj.states[i], domain));
  }
  return s;
}

/// Distances between a level-n and a level-2n run that saw the same noise.
struct LevelDistance {
  double d_x = 0.0; // sup_t |u^{2n}(t) - u^n(t)|_t
  double d_y = 0.0; // int ||u^{2n} - u^n||_t^2 dt
};

/// Modes k <= n carry A^{2n}_k - A^n_k; modes n < k <= 2n carry the tail A^{2n}_k.
inline LevelDistance level_distance(const Trajectory &coarse, const Trajectory &fine,
                                    const DomainMotion &domain) {
  if (coarse.size() != fine.size()) throw ValidationError("trajectories saved at different times");
  LevelDistance out;
  double prev_h1 = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (coarse.times[i] != fine.times[i]) throw ValidationError("trajectories saved at different times");
    const auto &a = coarse.states[i].coeffs;
    const auto &b = fine.states[i].coeffs;
    const double w = std::numbers::pi / domain.a(fine.times[i]);
    double common = 0.0, common_h1 = 0.0, tail = 0.0, tail_h1 = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double d = k < a.size() ? b[k] - a[k] : b[k];
      const double kw = static_cast<double>(k + 1) * w;
      if (k < a.size()) {
        common += d * d;
        common_h1 += kw * kw * d * d;
      } else {
        tail += d * d;
        tail_h1 += kw * kw * d * d;
      }
    }
    out.d_x = std::max(out.d_x, std::sqrt(common + tail));
    const double h1 = common_h1 + tail_h1;
    if (i > 0) out.d_y += 0.5 * (fine.times[i] - fine.times[i - 1]) * (prev_h1 + h1);
    prev_h1 = h1;
  }
  return out;
}

struct ConvergenceRow {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double d_x = 0.0;
  double d_y = 0.0;
};

/// For each seed (base.seed + s) and level n, runs n and 2n on the same noise stream
/// (noise truncation base.model.m is held fixed) and reports the distances.
inline std::vector<ConvergenceRow> self_convergence_study(const SimulationConfig &base,
                                                          const std::function<double(double)> &u0,
                                                          const std::vector<std::size_t> &levels,
                                                          std::size_t n_seeds) {
  if (levels.empty()) throw ValidationError("convergence study needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == 0) throw ValidationError("convergence levels must be >= 1");
    if (i > 0 && levels[i] != 2 * levels[i - 1]) {
      throw ValidationError("convergence levels must double (e.g. 8,16,32)");
    }
  }
  std::vector<std::size_t> ns = levels;
  ns.push_back(2 * levels.back());

  std::map<std::size_t, CoefficientState> initial;
  const auto finest = project_initial(u0, ns.back(), base.domain);
  for (std::size_t n : ns) {
    initial[n] = CoefficientState{0.0, std::vector<double>(finest.coeffs.begin(),
                                                           finest.coeffs.begin() + static_cast<long>(n))};
  }

  std::vector<ConvergenceRow> rows;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    std::map<std::size_t, Trajectory> runs;
    for (std::size_t n : ns) {
      SimulationConfig c = base;
      c.n = n;
      c.seed = base.seed + s;
      runs.emplace(n, simulate(c, initial.at(n), 0));
    }
    for (std::size_t n : levels) {
      const auto d = level_distance(runs.at(n), runs.at(2 * n), base.domain);
      rows.push_back({base.seed + s, n, d.d_x, d.d_y});
    }
  }
  return rows;
}

} // namespace movingheat
