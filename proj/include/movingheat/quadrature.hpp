#pragma once

#include <array>
#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>

namespace movingheat::quadrature {

/// Nodes per panel of the composite rule.
inline constexpr int panel_order = 16;

/// Calls visit(x, w) for every node of a composite Gauss-Legendre rule with
/// `panels` equal panels on [lo, hi].
template <class Visit>
void for_each_node(double lo, double hi, int panels, Visit &&visit) {
  using rule = boost::math::quadrature::gauss<double, panel_order>;
  const auto &abscissa = rule::abscissa();
  const auto &weights = rule::weights();
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double center = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      const double dx = half * abscissa[i];
      const double w = half * weights[i];
      if (dx == 0.0) {
        visit(center, w);
      } else {
        visit(center - dx, w);
        visit(center + dx, w);
      }
    }
  }
}

template <class F>
double integrate(F &&f, double lo, double hi, int panels) {
  double sum = 0.0;
  for_each_node(lo, hi, panels, [&](double x, double w) { sum += w * f(x); });
  return sum;
}

} // namespace movingheat::quadrature
