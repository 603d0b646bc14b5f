#pragma once

// Deterministic reference solver for the noise-free problem. With y = x / a_t the
// moving interval maps onto (0, 1) and v(t, y) = u(t, a_t y) satisfies
//   v_t = v_yy / a_t^2 + (a'_t y / a_t) v_y,   v(t, 0) = v(t, 1) = 0.
// Crank-Nicolson in time, central differences in y for both terms.

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "movingheat/domain_motion.hpp"
#include "movingheat/errors.hpp"
#include "movingheat/galerkin.hpp"
#include "movingheat/spectral_basis.hpp"

namespace movingheat {

struct MappedGridSolution {
  std::vector<double> ys;                  // M + 1 uniform points on [0, 1]
  std::vector<double> times;               // saved times
  std::vector<double> a_values;            // a_t at each saved time
  std::vector<std::vector<double>> values; // v(t, y_i) per saved time

  std::size_t size() const { return times.size(); }
  /// x-grid at saved index i: x = a_t y.
  std::vector<double> xs(std::size_t i) const {
    std::vector<double> out(ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) out[j] = a_values[i] * ys[j];
    return out;
  }
};

namespace detail {

/// Thomas algorithm for lower[i] v[i-1] + diag[i] v[i] + upper[i] v[i+1] = rhs[i].
inline void solve_tridiagonal(const std::vector<double> &lower, std::vector<double> diag,
                              const std::vector<double> &upper, std::vector<double> &rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (std::abs(diag[i]) < 1e-14) {
      std::ostringstream msg;
      msg << "Crank-Nicolson system singular: pivot " << diag[i] << " at row " << i;
      throw NumericalError(msg.str());
    }
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

} // namespace detail

/// Solves on [0, t_end] with M intervals in y. The initial state and the final state
/// are always saved; `save_stride` > 0 additionally saves every save_stride-th step.
inline MappedGridSolution fd_solve(const DomainMotion &domain, const std::function<double(double)> &u0,
                                   std::size_t M, double dt_fd, double t_end, std::size_t save_stride = 0) {
  if (M < 16) throw ValidationError("fd_solve needs M >= 16");
  if (!(dt_fd > 0.0)) throw ValidationError("fd_solve needs dt_fd > 0");
  if (t_end > domain.horizon() * (1.0 + 1e-12)) throw ValidationError("t_end beyond domain horizon");
  const std::size_t total = step_count(t_end, dt_fd);
  const double h = 1.0 / static_cast<double>(M);

  MappedGridSolution sol;
  sol.ys.resize(M + 1);
  for (std::size_t i = 0; i <= M; ++i) sol.ys[i] = (i == M) ? 1.0 : static_cast<double>(i) * h;

  std::vector<double> v(M + 1, 0.0);
  const double a0 = domain.a(0.0);
  for (std::size_t i = 1; i < M; ++i) v[i] = u0(a0 * sol.ys[i]);

  auto save = [&](double t) {
    sol.times.push_back(t);
    sol.a_values.push_back(domain.a(t));
    sol.values.push_back(v);
  };
  save(0.0);

  // Operator rows for interior node i: lo v[i-1] + mid v[i] + up v[i+1].
  const std::size_t ni = M - 1;
  auto coefficients = [&](double t, std::vector<double> &lo, std::vector<double> &mid,
                          std::vector<double> &up) {
    const double a = domain.a(t);
    const double diff = 1.0 / (a * a * h * h);
    const double conv = domain.a_prime(t) / (a * 2.0 * h);
    lo.resize(ni);
    mid.assign(ni, -2.0 * diff);
    up.resize(ni);
    for (std::size_t r = 0; r < ni; ++r) {
      const double c = conv * sol.ys[r + 1];
      lo[r] = diff - c;
      up[r] = diff + c;
    }
  };

  std::vector<double> lo0, mid0, up0, lo1, mid1, up1, rhs(ni);
  for (std::size_t s = 0; s < total; ++s) {
    const double t0 = static_cast<double>(s) * dt_fd;
    const double t1 = (s + 1 == total) ? t_end : static_cast<double>(s + 1) * dt_fd;
    const double half = 0.5 * (t1 - t0);
    coefficients(t0, lo0, mid0, up0);
    coefficients(t1, lo1, mid1, up1);
    for (std::size_t r = 0; r < ni; ++r) {
      const std::size_t i = r + 1;
      rhs[r] = v[i] + half * (lo0[r] * v[i - 1] + mid0[r] * v[i] + up0[r] * v[i + 1]);
    }
    for (std::size_t r = 0; r < ni; ++r) {
      lo1[r] = -half * lo1[r];
      mid1[r] = 1.0 - half * mid1[r];
      up1[r] = -half * up1[r];
    }
    detail::solve_tridiagonal(lo1, mid1, up1, rhs);
    for (std::size_t r = 0; r < ni; ++r) v[r + 1] = rhs[r];
    if (s + 1 == total || (save_stride > 0 && (s + 1) % save_stride == 0)) save(t1);
  }
  return sol;
}

/// Samples saved spectral states on the mapped grid, producing an FD-shaped solution.
inline MappedGridSolution sample_on_mapped_grid(const Trajectory &traj, const DomainMotion &domain,
                                                std::size_t M) {
  MappedGridSolution sol;
  sol.ys.resize(M + 1);
  for (std::size_t i = 0; i <= M; ++i) sol.ys[i] = (i == M) ? 1.0 : static_cast<double>(i) / M;
  for (const auto &state : traj.states) {
    const double a = domain.a(state.t);
    std::vector<double> v(M + 1, 0.0);
    for (std::size_t i = 1; i < M; ++i) v[i] = evaluate(state, a * sol.ys[i], domain);
    sol.times.push_back(state.t);
    sol.a_values.push_back(a);
    sol.values.push_back(std::move(v));
  }
  return sol;
}

/// u(t, x) = v(t, x / a_t) on the x-grid of saved index i.
inline FieldSnapshot fd_snapshot(const MappedGridSolution &sol, std::size_t i) {
  return FieldSnapshot{sol.times[i], sol.xs(i), sol.values[i]};
}

/// L2(I_t) discrepancy between a spectral trajectory and the FD solution at time t,
/// trapezoid on the mapped grid. Both must have a saved state at t.
inline double compare_with_spectral(const Trajectory &traj, const MappedGridSolution &fd,
                                    const DomainMotion &domain, double t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  std::size_t is = traj.size(), ifd = fd.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (std::abs(traj.times[i] - t) <= tol) is = i;
  }
  for (std::size_t i = 0; i < fd.size(); ++i) {
    if (std::abs(fd.times[i] - t) <= tol) ifd = i;
  }
  if (is == traj.size() || ifd == fd.size()) {
    std::ostringstream msg;
    msg << "time " << t << " is not saved by both solutions";
    throw ValidationError(msg.str());
  }
  const CoefficientState &state = traj.states[is];
  const double a = domain.a(state.t);
  const std::vector<double> &v = fd.values[ifd];
  const std::size_t M = fd.ys.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i <= M; ++i) {
    const bool boundary = i == 0 || i == M;
    const double spectral = boundary ? 0.0 : evaluate(state, a * fd.ys[i], domain);
    const double d = spectral - v[i];
    const double w = boundary ? 0.5 : 1.0;
    sum += w * d * d;
  }
  return std::sqrt(sum * a / static_cast<double>(M));
}

} // namespace movingheat
