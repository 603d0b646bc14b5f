#pragma once

// Independent reference computations for the tests. Nothing here calls into the
// library's quadrature or coupling code.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace movingheat::testing {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite rule: `panels` panels of `order` nodes each.
template <class F>
double integrate(F &&f, double lo, double hi, int panels, int order) {
  const auto [x, w] = gauss_legendre(order);
  const double h = (hi - lo) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) s += 0.5 * h * w[i] * f(c + 0.5 * h * x[i]);
  }
  return s;
}

inline double e_k(int k, double a, double x) {
  return std::sqrt(2.0 / a) * std::sin(k * std::numbers::pi * x / a);
}

/// d/dt e_k(t, x) for a boundary with value a and rate da, differentiated by hand:
/// a' * [ -e_k / (2a) - sqrt(2/a) cos(k pi x / a) k pi x / a^2 ].
inline double e_k_time_derivative(int k, double a, double da, double x) {
  const double phase = k * std::numbers::pi * x / a;
  return da * (-e_k(k, a, x) / (2.0 * a) -
               std::sqrt(2.0 / a) * std::cos(phase) * k * std::numbers::pi * x / (a * a));
}

/// int_0^a e_j (d/dt e_k) dx with at least 4 (j + k) + 16 nodes.
inline double coupling_by_quadrature(int j, int k, double a, double da) {
  const int nodes = 4 * (j + k) + 16;
  const int order = 20;
  const int panels = (nodes + order - 1) / order;
  return integrate([&](double x) { return e_k(j, a, x) * e_k_time_derivative(k, a, da, x); }, 0.0, a,
                   panels, order);
}

} // namespace movingheat::testing
