#pragma once

// Moving right endpoint a(t) of the interval I_t = (0, a(t)).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "movingheat/errors.hpp"

namespace movingheat {

enum class DomainKind { constant, linear, sinusoidal, exponential, table };

inline std::string_view to_string(DomainKind kind) {
  switch (kind) {
  case DomainKind::constant: return "constant";
  case DomainKind::linear: return "linear";
  case DomainKind::sinusoidal: return "sinusoidal";
  case DomainKind::exponential: return "exponential";
  case DomainKind::table: return "table";
  }
  return "?";
}

inline DomainKind parse_domain_kind(std::string_view name) {
  for (auto k : {DomainKind::constant, DomainKind::linear, DomainKind::sinusoidal,
                 DomainKind::exponential, DomainKind::table}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown domain kind '" + std::string(name) + "'");
}

/// Family parameters. Which fields matter depends on the kind:
///   constant     a(t) = a0
///   linear       a(t) = a0 + slope * t
///   sinusoidal   a(t) = a0 + amp * sin(omega * t)
///   exponential  a(t) = a0 * exp(slope * t)
///   table        natural cubic spline through (table_t, table_a)
struct DomainParams {
  double a0 = 1.0;
  double slope = 0.0;
  double amp = 0.0;
  double omega = 0.0;
  std::vector<double> table_t;
  std::vector<double> table_a;
};

namespace detail {

/// Natural cubic spline (zero second derivative at both ends). C^2 inside, so a' is continuous.
class NaturalCubicSpline {
public:
  NaturalCubicSpline() = default;

  NaturalCubicSpline(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) {
      throw ValidationError("spline table needs at least two (t, a) pairs of equal length");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(xs_[i] > xs_[i - 1])) throw ValidationError("spline knots must be strictly increasing");
    }
    m_.assign(n, 0.0);
    if (n == 2) return;

    // Tridiagonal system for the interior second derivatives.
    const std::size_t ni = n - 2;
    std::vector<double> diag(ni), upper(ni), rhs(ni);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = xs_[i] - xs_[i - 1];
      const double h1 = xs_[i + 1] - xs_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
    }
    // Symmetric: the sub-diagonal of row i equals the super-diagonal of row i-1.
    for (std::size_t i = 1; i < ni; ++i) {
      const double w = upper[i - 1] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[ni] = rhs[ni - 1] / diag[ni - 1];
    for (std::size_t i = ni - 1; i-- > 0;) {
      m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
    }
  }

  double value(double x) const {
    const auto [i, h, s] = locate(x);
    const double s1 = 1.0 - s;
    return s1 * ys_[i] + s * ys_[i + 1] +
           h * h / 6.0 * ((s1 * s1 * s1 - s1) * m_[i] + (s * s * s - s) * m_[i + 1]);
  }

  double derivative(double x) const {
    const auto [i, h, s] = locate(x);
    const double s1 = 1.0 - s;
    return (ys_[i + 1] - ys_[i]) / h +
           h / 6.0 * (-(3.0 * s1 * s1 - 1.0) * m_[i] + (3.0 * s * s - 1.0) * m_[i + 1]);
  }

  double front() const { return xs_.front(); }
  double back() const { return xs_.back(); }

private:
  struct Where {
    std::size_t i;
    double h;
    double s;
  };

  Where locate(double x) const {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
    i = std::min(i, xs_.size() - 2);
    const double h = xs_[i + 1] - xs_[i];
    return {i, h, (x - xs_[i]) / h};
  }

  std::vector<double> xs_, ys_, m_;
};

} // namespace detail

class DomainMotion;
DomainMotion make_domain(DomainKind kind, DomainParams params, double horizon);

/// Immutable once built; share freely between threads.
class DomainMotion {
public:
  static constexpr int validation_samples = 1000;

  DomainKind kind() const { return kind_; }
  const DomainParams &params() const { return params_; }
  double horizon() const { return horizon_; }
  double delta0() const { return delta0_; }
  double big_l() const { return big_l_; }

  double a(double t) const {
    t = checked_time(t);
    switch (kind_) {
    case DomainKind::constant: return params_.a0;
    case DomainKind::linear: return params_.a0 + params_.slope * t;
    case DomainKind::sinusoidal: return params_.a0 + params_.amp * std::sin(params_.omega * t);
    case DomainKind::exponential: return params_.a0 * std::exp(params_.slope * t);
    case DomainKind::table: return spline_.value(t);
    }
    return 0.0;
  }

  double a_prime(double t) const {
    t = checked_time(t);
    switch (kind_) {
    case DomainKind::constant: return 0.0;
    case DomainKind::linear: return params_.slope;
    case DomainKind::sinusoidal:
      return params_.amp * params_.omega * std::cos(params_.omega * t);
    case DomainKind::exponential: return params_.a0 * params_.slope * std::exp(params_.slope * t);
    case DomainKind::table: return spline_.derivative(t);
    }
    return 0.0;
  }

private:
  friend DomainMotion make_domain(DomainKind, DomainParams, double);

  double checked_time(double t) const {
    // Accumulated step times may overshoot T by a few ulps.
    const double slack = 1e-12 * std::max(1.0, horizon_);
    if (!(t >= -slack && t <= horizon_ + slack)) {
      std::ostringstream msg;
      msg << "time " << t << " outside [0, " << horizon_ << "]";
      throw ValidationError(msg.str());
    }
    return std::clamp(t, 0.0, horizon_);
  }

  DomainKind kind_ = DomainKind::constant;
  DomainParams params_;
  double horizon_ = 1.0;
  double delta0_ = 1.0;
  double big_l_ = 1.0;
  detail::NaturalCubicSpline spline_;
};

/// Validates the family and computes delta0 / L from a uniform sample of [0, T]:
/// delta0 = 0.99 * min a, L = 1.01 * max(max a, max |a'|).
inline DomainMotion make_domain(DomainKind kind, DomainParams params, double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("domain horizon T must be positive and finite");
  }
  for (double v : {params.a0, params.slope, params.amp, params.omega}) {
    if (!std::isfinite(v)) throw ValidationError("domain parameters must be finite");
  }

  DomainMotion d;
  d.kind_ = kind;
  d.horizon_ = horizon;
  if (kind == DomainKind::table) {
    d.spline_ = detail::NaturalCubicSpline(params.table_t, params.table_a);
    const double slack = 1e-12 * std::max(1.0, horizon);
    if (d.spline_.front() > slack || d.spline_.back() < horizon - slack) {
      throw ValidationError("domain table must cover [0, T]");
    }
  }
  d.params_ = std::move(params);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < DomainMotion::validation_samples; ++i) {
    const double t = horizon * i / (DomainMotion::validation_samples - 1);
    const double a = d.a(t);
    const double da = d.a_prime(t);
    if (!std::isfinite(a) || !std::isfinite(da)) {
      throw ValidationError("domain boundary is not finite on [0, T]");
    }
    lo = std::min(lo, a);
    hi = std::max({hi, a, std::abs(da)});
  }
  if (!(lo > 0.0)) {
    std::ostringstream msg;
    msg << to_string(kind) << " domain reaches a(t) = " << lo << " <= 0 on [0, " << horizon << "]";
    throw ValidationError(msg.str());
  }
  d.delta0_ = 0.99 * lo;
  d.big_l_ = 1.01 * hi;
  return d;
}

inline double a_at(const DomainMotion &domain, double t) { return domain.a(t); }
inline double a_prime_at(const DomainMotion &domain, double t) { return domain.a_prime(t); }

/// Reads `t,a` rows; a non-numeric first line is taken as a header.
inline std::pair<std::vector<double>, std::vector<double>> load_domain_table(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open domain table '" + path + "'");
  std::vector<double> ts, as;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t = 0.0, a = 0.0;
    if (!(row >> t >> a)) {
      if (first) {
        first = false;
        continue;
      }
      throw ValidationError("malformed row in domain table '" + path + "': " + line);
    }
    first = false;
    ts.push_back(t);
    as.push_back(a);
  }
  return {std::move(ts), std::move(as)};
}

} // namespace movingheat
