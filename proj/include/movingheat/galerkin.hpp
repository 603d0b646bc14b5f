#pragma once

// Time stepping of the truncated interacting system, k = 1..n:
//   dA_k = [ sum_j b_jk(t) A_j + lambda_k(t) A_k ] dt + sum_j sigma_j^k dB_j.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "movingheat/diffusion_models.hpp"
#include "movingheat/domain_motion.hpp"
#include "movingheat/errors.hpp"
#include "movingheat/noise.hpp"
#include "movingheat/spectral_basis.hpp"

namespace movingheat {

enum class Scheme { explicit_em, exponential_em };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::explicit_em ? "explicit_em" : "exponential_em";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "explicit_em") return Scheme::explicit_em;
  if (name == "exponential_em") return Scheme::exponential_em;
  throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

/// Running sums of the energy balance
///   |u(t)|^2 = |u(0)|^2 - 2 int ||u||^2 + 2 int (u, sigma dW) + int ||sigma||_HS^2.
/// visc is a trapezoid sum; sto and hs use the left (Ito) endpoint.
struct EnergyLedger {
  double visc = 0.0;
  double sto = 0.0;
  double hs = 0.0;
  double e0 = 0.0;
};

struct OutputOptions {
  std::size_t grid_size = 129;
  std::size_t snapshot_stride = 1;
};

struct SimulationConfig {
  DomainMotion domain;
  std::size_t n = 16;
  DiffusionModel model;
  Scheme scheme = Scheme::exponential_em;
  double dt = 1e-3;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  std::size_t n_paths = 1;
  OutputOptions output;
  /// Each step's Brownian increment is the sum of this many sub-increments.
  std::uint32_t noise_refine = 1;
  /// Test hook: drop lambda_k from the drift (pure transport).
  bool zero_eigenvalues = false;
  bool record_noise = false;
};

/// Explicit Euler-Maruyama is kept inside dt <= 1.9 (delta0 / (n pi))^2.
inline double explicit_stability_bound(double delta0, std::size_t n) {
  const double r = delta0 / (static_cast<double>(n) * std::numbers::pi);
  return 1.9 * r * r;
}

/// Number of uniform steps covering [0, t_end]; throws if the grid is not uniform.
inline std::size_t step_count(double t_end, double dt) {
  const double q = t_end / dt;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 4.0 * std::numeric_limits<double>::epsilon() * r) {
    std::ostringstream msg;
    msg << "t_end = " << t_end << " is not an integer multiple of dt = " << dt;
    throw ValidationError(msg.str());
  }
  return static_cast<std::size_t>(r);
}

inline void validate(const SimulationConfig &c) {
  if (c.n == 0) throw ValidationError("Galerkin level n must be >= 1");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ValidationError("dt must be positive");
  if (!(c.t_end > 0.0)) throw ValidationError("t_end must be positive");
  if (c.t_end > c.domain.horizon() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "t_end = " << c.t_end << " exceeds the domain horizon T = " << c.domain.horizon();
    throw ValidationError(msg.str());
  }
  step_count(c.t_end, c.dt);
  if (c.n_paths == 0) throw ValidationError("n_paths must be >= 1");
  if (c.output.grid_size < 2) throw ValidationError("grid_size must be >= 2");
  if (c.output.snapshot_stride == 0) throw ValidationError("snapshot_stride must be >= 1");
  if (c.noise_refine == 0) throw ValidationError("noise_refine must be >= 1");
  if (c.scheme == Scheme::explicit_em) {
    const double bound = explicit_stability_bound(c.domain.delta0(), c.n);
    if (c.dt > bound) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "explicit_em needs dt <= 1.9 (delta0 / (n pi))^2 = " << bound << " (delta0 = "
          << c.domain.delta0() << ", n = " << c.n << "), got dt = " << c.dt;
      throw ValidationError(msg.str());
    }
  }
}

/// Coupling part sum_j b_jk A_j only.
inline std::vector<double> coupling_drift(const CoefficientState &state, const DomainMotion &domain) {
  std::vector<double> out;
  coupling_matrix(state.n(), state.t, domain).apply_transposed(state.coeffs, out);
  return out;
}

inline std::vector<double> drift(const CoefficientState &state, const DomainMotion &domain,
                                 bool zero_eigenvalues = false) {
  auto out = coupling_drift(state, domain);
  if (!zero_eigenvalues) {
    const double a = domain.a(state.t);
    for (std::size_t k = 1; k <= state.n(); ++k) {
      out[k - 1] += eigenvalue_for_length(static_cast<long>(k), a) * state.coeffs[k - 1];
    }
  }
  return out;
}

namespace detail {

inline void check_finite(const CoefficientState &s, std::size_t step_index, const SimulationConfig &c) {
  for (double v : s.coeffs) {
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite state at step " << step_index << " (t = " << s.t << ")";
      if (c.scheme == Scheme::explicit_em) {
        msg << "; explicit_em stability bound is dt <= "
            << explicit_stability_bound(c.domain.delta0(), c.n);
      }
      throw NumericalError(msg.str());
    }
  }
}

/// One step from `state` to time t_next given the precomputed kick.
inline CoefficientState advance(const CoefficientState &state, const SimulationConfig &c,
                                const std::vector<double> &kick, double t_next) {
  const std::size_t n = state.n();
  const double dt = c.dt;
  CoefficientState out{t_next, std::vector<double>(n)};
  std::vector<double> transport = coupling_drift(state, c.domain);
  if (c.scheme == Scheme::explicit_em) {
    const double a = c.domain.a(state.t);
    for (std::size_t k = 1; k <= n; ++k) {
      const double lam = c.zero_eigenvalues ? 0.0 : eigenvalue_for_length(static_cast<long>(k), a);
      out.coeffs[k - 1] = state.coeffs[k - 1] + (transport[k - 1] + lam * state.coeffs[k - 1]) * dt +
                          kick[k - 1];
    }
  } else {
    const double a_mid = c.domain.a(state.t + 0.5 * dt);
    for (std::size_t k = 1; k <= n; ++k) {
      const double lam = c.zero_eigenvalues ? 0.0 : eigenvalue_for_length(static_cast<long>(k), a_mid);
      out.coeffs[k - 1] =
          std::exp(lam * dt) * (state.coeffs[k - 1] + transport[k - 1] * dt + kick[k - 1]);
    }
  }
  return out;
}

} // namespace detail

/// One scheme step of size config.dt.
inline CoefficientState step(const CoefficientState &state, const SimulationConfig &config,
                             const NoiseIncrement &increment) {
  if (state.n() != config.n) throw ValidationError("state size does not match config.n");
  if (state.t + config.dt > config.t_end * (1.0 + 1e-12) + 1e-15) {
    throw ValidationError("step would pass t_end");
  }
  const auto kick = noise_kick(config.model, state, increment);
  auto next = detail::advance(state, config, kick, state.t + config.dt);
  detail::check_finite(next, 0, config);
  return next;
}

struct Trajectory {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<CoefficientState> states;
  /// Ledger as of each saved time.
  std::vector<EnergyLedger> ledgers;
  /// Increments for every step when SimulationConfig::record_noise is set.
  std::vector<NoiseIncrement> noise;
  EnergyLedger ledger;
  std::uint64_t path = 0;

  std::size_t size() const { return times.size(); }
};

/// Steps a single path from an already projected initial state.
inline Trajectory simulate(const SimulationConfig &config, const CoefficientState &initial,
                           std::uint64_t path = 0) {
  validate(config);
  if (initial.n() != config.n) throw ValidationError("initial state size does not match config.n");
  const std::size_t total = step_count(config.t_end, config.dt);
  const std::size_t stride = config.output.snapshot_stride;
  const NoiseStream stream(config.seed, path);
  const DomainMotion &dom = config.domain;

  Trajectory traj;
  traj.path = path;
  CoefficientState state{0.0, initial.coeffs};
  EnergyLedger ledger;
  ledger.e0 = l2_norm_sq(state);

  auto save = [&](std::size_t i) {
    traj.steps.push_back(i);
    traj.times.push_back(state.t);
    traj.states.push_back(state);
    traj.ledgers.push_back(ledger);
  };
  save(0);

  double h1_prev = h1_norm_sq(state, dom);
  for (std::size_t i = 0; i < total; ++i) {
    const auto inc = draw_increment(stream, i, config.model.m, config.dt, config.noise_refine);
    const auto kick = noise_kick(config.model, state, inc);
    const double hs_now = hs_norm_sq(config.model, state);
    double sto = 0.0;
    for (std::size_t k = 0; k < state.n(); ++k) sto += state.coeffs[k] * kick[k];

    const double t_next = (i + 1 == total) ? config.t_end : static_cast<double>(i + 1) * config.dt;
    state = detail::advance(state, config, kick, t_next);
    detail::check_finite(state, i + 1, config);

    const double h1_next = h1_norm_sq(state, dom);
    ledger.visc += config.dt * (h1_prev + h1_next);
    ledger.sto += 2.0 * sto;
    ledger.hs += hs_now * config.dt;
    h1_prev = h1_next;

    if (config.record_noise) traj.noise.push_back(inc);
    if ((i + 1) % stride == 0 || i + 1 == total) save(i + 1);
  }
  traj.ledger = ledger;
  return traj;
}

inline Trajectory simulate(const SimulationConfig &config, const std::function<double(double)> &u0,
                           std::uint64_t path = 0) {
  return simulate(config, project_initial(u0, config.n, config.domain), path);
}

} // namespace movingheat
