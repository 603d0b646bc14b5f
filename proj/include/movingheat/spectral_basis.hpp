#pragma once

// Moving Dirichlet sine basis on I_t = (0, a_t):
//   lambda_k(t) = -(k pi / a_t)^2,   e_k(t, x) = sqrt(2 / a_t) sin(k pi x / a_t),
// and the mode coupling b_jk(t) = int e_j d/dt e_k dx that boundary motion induces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "movingheat/domain_motion.hpp"
#include "movingheat/errors.hpp"
#include "movingheat/quadrature.hpp"

namespace movingheat {

/// Galerkin state: coefficients A_k of u(t) in the basis e_k(t), k = 1..n (stored 0-based).
struct CoefficientState {
  double t = 0.0;
  std::vector<double> coeffs;

  std::size_t n() const { return coeffs.size(); }
  /// 1-based access, matching the mode numbering.
  double mode(std::size_t k) const { return coeffs[k - 1]; }
};

/// Physical-space view of a state on a uniform grid of [0, a_t].
struct FieldSnapshot {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<double> values;
};

namespace detail {
inline void check_mode(long k, const char *what) {
  if (k < 1) {
    std::ostringstream msg;
    msg << what << " index must be >= 1, got " << k;
    throw ValidationError(msg.str());
  }
}
} // namespace detail

inline double eigenvalue_for_length(long k, double a) {
  detail::check_mode(k, "eigenvalue");
  const double w = static_cast<double>(k) * std::numbers::pi / a;
  return -w * w;
}

inline double eigenvalue(long k, double t, const DomainMotion &domain) {
  return eigenvalue_for_length(k, domain.a(t));
}

inline double eigenfunction(long k, double t, double x, const DomainMotion &domain) {
  detail::check_mode(k, "eigenfunction");
  const double a = domain.a(t);
  if (!(x >= 0.0 && x <= a)) {
    std::ostringstream msg;
    msg << "x = " << x << " outside [0, " << a << "]";
    throw ValidationError(msg.str());
  }
  return std::sqrt(2.0 / a) * std::sin(static_cast<double>(k) * std::numbers::pi * x / a);
}

/// b_jk for the boundary rate ratio a'/a. Computed for j < k and negated otherwise,
/// so b_jk == -b_kj holds bitwise.
inline double coupling_for_ratio(long j, long k, double rate_ratio) {
  detail::check_mode(j, "coupling");
  detail::check_mode(k, "coupling");
  if (j == k) return 0.0;
  if (j > k) return -coupling_for_ratio(k, j, rate_ratio);
  const double dj = static_cast<double>(j);
  const double dk = static_cast<double>(k);
  const double sign = ((j + k) % 2 == 0) ? 1.0 : -1.0;
  return sign * rate_ratio * (2.0 * dj * dk / (dj * dj - dk * dk));
}

inline double coupling(long j, long k, double t, const DomainMotion &domain) {
  return coupling_for_ratio(j, k, domain.a_prime(t) / domain.a(t));
}

/// Dense n x n coupling matrix, row j, column k (0-based storage of 1-based modes).
class CouplingMatrix {
public:
  CouplingMatrix(std::size_t n, double rate_ratio) : n_(n), b_(n * n, 0.0) {
    if (rate_ratio == 0.0) return;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t k = j + 1; k <= n; ++k) {
        const double v = coupling_for_ratio(static_cast<long>(j), static_cast<long>(k), rate_ratio);
        b_[(j - 1) * n + (k - 1)] = v;
        b_[(k - 1) * n + (j - 1)] = -v;
      }
    }
  }

  std::size_t n() const { return n_; }
  double operator()(std::size_t j, std::size_t k) const { return b_[(j - 1) * n_ + (k - 1)]; }

  /// out_k = sum_j A_j b_jk.
  void apply_transposed(const std::vector<double> &coeffs, std::vector<double> &out) const {
    out.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double aj = coeffs[j];
      if (aj == 0.0) continue;
      const double *row = &b_[j * n_];
      for (std::size_t k = 0; k < n_; ++k) out[k] += aj * row[k];
    }
  }

private:
  std::size_t n_;
  std::vector<double> b_;
};

inline CouplingMatrix coupling_matrix(std::size_t n, double t, const DomainMotion &domain) {
  return CouplingMatrix(n, domain.a_prime(t) / domain.a(t));
}

/// u(t, x) = sum_k A_k e_k(t, x).
inline double evaluate(const CoefficientState &state, double x, const DomainMotion &domain) {
  const double a = domain.a(state.t);
  const double scale = std::sqrt(2.0 / a);
  const double phase = std::numbers::pi * x / a;
  double sum = 0.0;
  for (std::size_t k = 1; k <= state.n(); ++k) {
    sum += state.coeffs[k - 1] * std::sin(static_cast<double>(k) * phase);
  }
  return scale * sum;
}

namespace detail {
inline std::vector<double> project_with_panels(const std::function<double(double)> &u0,
                                               std::size_t n, double a, int panels) {
  std::vector<double> coeffs(n, 0.0);
  const double scale = std::sqrt(2.0 / a);
  quadrature::for_each_node(0.0, a, panels, [&](double x, double w) {
    const double fx = w * scale * u0(x);
    const double phase = std::numbers::pi * x / a;
    for (std::size_t k = 1; k <= n; ++k) {
      coeffs[k - 1] += fx * std::sin(static_cast<double>(k) * phase);
    }
  });
  return coeffs;
}
} // namespace detail

/// A_k(0) = (u0, e_k(0)) on I_0 by composite Gauss-Legendre, doubling the panel count
/// until two successive coefficient vectors agree to 1e-10 relative.
inline CoefficientState project_initial(const std::function<double(double)> &u0, std::size_t n,
                                        const DomainMotion &domain, double t = 0.0) {
  if (n == 0) throw ValidationError("Galerkin level n must be >= 1");
  constexpr int max_doublings = 6;
  const double a = domain.a(t);
  int panels = std::max<int>(8, static_cast<int>(n));
  auto prev = detail::project_with_panels(u0, n, a, panels);
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    auto next = detail::project_with_panels(u0, n, a, panels);
    double diff = 0.0, size = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      diff = std::max(diff, std::abs(next[k] - prev[k]));
      size = std::max(size, std::abs(next[k]));
    }
    if (!std::isfinite(diff)) break;
    if (diff <= 1e-10 * size) return CoefficientState{t, std::move(next)};
    prev = std::move(next);
  }
  throw NumericalError("initial-data projection did not converge after 6 panel doublings");
}

inline FieldSnapshot synthesize(const CoefficientState &state, std::size_t grid_size,
                                const DomainMotion &domain) {
  if (grid_size < 2) throw ValidationError("grid_size must be >= 2");
  const double a = domain.a(state.t);
  FieldSnapshot snap;
  snap.t = state.t;
  snap.xs.resize(grid_size);
  snap.values.assign(grid_size, 0.0);
  for (std::size_t i = 0; i < grid_size; ++i) {
    snap.xs[i] = (i + 1 == grid_size) ? a : a * static_cast<double>(i) / (grid_size - 1);
  }
  for (std::size_t i = 1; i + 1 < grid_size; ++i) snap.values[i] = evaluate(state, snap.xs[i], domain);
  return snap;
}

/// |u(t)|_t^2 by Parseval.
inline double l2_norm_sq(const CoefficientState &state) {
  double s = 0.0;
  for (double c : state.coeffs) s += c * c;
  return s;
}

/// ||u(t)||_t^2 = -sum_k lambda_k(t) A_k^2.
inline double h1_norm_sq(const CoefficientState &state, const DomainMotion &domain) {
  const double w = std::numbers::pi / domain.a(state.t);
  double s = 0.0;
  for (std::size_t k = 1; k <= state.n(); ++k) {
    const double c = state.coeffs[k - 1] * static_cast<double>(k) * w;
    s += c * c;
  }
  return s;
}

} // namespace movingheat
