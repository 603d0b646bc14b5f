#pragma once

// Noise coefficient sigma(s, u) represented through its matrix elements
//   sigma_j^k(s, u) = (e_k(s), sigma(s, u) f_j)_s,
// k = Galerkin mode, j = driving Brownian motion. The fixed basis f_j is never built.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "movingheat/errors.hpp"
#include "movingheat/noise.hpp"
#include "movingheat/spectral_basis.hpp"

namespace movingheat {

enum class DiffusionKind { zero, moving_diagonal, general_matrix };

inline std::string_view to_string(DiffusionKind kind) {
  switch (kind) {
  case DiffusionKind::zero: return "zero";
  case DiffusionKind::moving_diagonal: return "moving_diagonal";
  case DiffusionKind::general_matrix: return "general_matrix";
  }
  return "?";
}

inline DiffusionKind parse_diffusion_kind(std::string_view name) {
  for (auto k : {DiffusionKind::zero, DiffusionKind::moving_diagonal, DiffusionKind::general_matrix}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown noise kind '" + std::string(name) + "'");
}

/// zero:            sigma_j^k = 0
/// moving_diagonal: sigma_j^k = delta_jk q_j (gamma + beta A_j), q_j = j^-p
/// general_matrix:  sigma_j^k = table(k, j), state independent
struct DiffusionModel {
  DiffusionKind kind = DiffusionKind::zero;
  double gamma = 0.0;
  double beta = 0.0;
  double decay_p = 1.0;
  std::size_t m = 1;
  double lipschitz_k = 1.0;
  // general_matrix only: rows = modes k, columns = noises j (so columns == m).
  std::size_t rows = 0;
  std::vector<double> table;

  double weight(std::size_t j) const { return std::pow(static_cast<double>(j), -decay_p); }
  double table_at(std::size_t k, std::size_t j) const { return table[(k - 1) * m + (j - 1)]; }
};

inline DiffusionModel make_zero_model(std::size_t m = 1) {
  if (m == 0) throw ValidationError("noise truncation m must be >= 1");
  DiffusionModel model;
  model.m = m;
  return model;
}

/// Smallest K for which moving_diagonal satisfies both the Lipschitz and the
/// linear-growth bound: max(beta q_1, gamma sqrt(sum_j q_j^2)).
inline double moving_diagonal_constant(double gamma, double beta, double p, std::size_t m) {
  double sum_q2 = 0.0;
  for (std::size_t j = 1; j <= m; ++j) sum_q2 += std::pow(static_cast<double>(j), -2.0 * p);
  return std::max(beta, gamma * std::sqrt(sum_q2));
}

inline DiffusionModel make_moving_diagonal(double gamma, double beta, double p, std::size_t m,
                                           std::optional<double> declared_k = std::nullopt) {
  if (!(gamma >= 0.0) || !(beta >= 0.0)) throw ValidationError("gamma and beta must be >= 0");
  if (!(p > 0.5)) throw ValidationError("mode-decay exponent p must exceed 1/2");
  if (m == 0) throw ValidationError("noise truncation m must be >= 1");
  DiffusionModel model;
  model.kind = DiffusionKind::moving_diagonal;
  model.gamma = gamma;
  model.beta = beta;
  model.decay_p = p;
  model.m = m;
  const double needed = moving_diagonal_constant(gamma, beta, p, m);
  if (declared_k) {
    if (*declared_k < needed) {
      std::ostringstream msg;
      msg << "declared lipschitz_k = " << *declared_k << " is below the required " << needed;
      throw ValidationError(msg.str());
    }
    model.lipschitz_k = *declared_k;
  } else {
    model.lipschitz_k = needed > 0.0 ? needed : 1.0;
  }
  return model;
}

/// `table` is row-major, rows = modes, columns = driving noises.
inline DiffusionModel make_general_matrix(std::vector<std::vector<double>> table, double declared_k) {
  if (table.empty() || table.front().empty()) throw ValidationError("general_matrix table is empty");
  if (!(declared_k > 0.0)) throw ValidationError("general_matrix requires lipschitz_k > 0");
  DiffusionModel model;
  model.kind = DiffusionKind::general_matrix;
  model.rows = table.size();
  model.m = table.front().size();
  model.lipschitz_k = declared_k;
  double frob = 0.0;
  for (const auto &row : table) {
    if (row.size() != model.m) throw ValidationError("general_matrix rows have unequal length");
    for (double v : row) {
      if (!std::isfinite(v)) throw ValidationError("general_matrix entries must be finite");
      frob += v * v;
      model.table.push_back(v);
    }
  }
  // State independent, so growth at u = 0 is the binding condition.
  if (std::sqrt(frob) > declared_k) {
    std::ostringstream msg;
    msg << "general_matrix Hilbert-Schmidt norm " << std::sqrt(frob) << " exceeds lipschitz_k "
        << declared_k;
    throw ValidationError(msg.str());
  }
  return model;
}

inline std::vector<std::vector<double>> load_matrix_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream in_row(line);
    std::vector<double> row;
    double v = 0.0;
    while (in_row >> v) row.push_back(v);
    if (!in_row.eof()) throw ValidationError("malformed row in matrix file '" + path + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double sigma_coeff(const DiffusionModel &model, std::size_t j, std::size_t k,
                          const CoefficientState &state) {
  if (j < 1 || j > model.m || k < 1 || k > state.n()) {
    std::ostringstream msg;
    msg << "sigma index (j=" << j << ", k=" << k << ") outside [1," << model.m << "] x [1,"
        << state.n() << "]";
    throw ValidationError(msg.str());
  }
  switch (model.kind) {
  case DiffusionKind::zero: return 0.0;
  case DiffusionKind::moving_diagonal:
    return j == k ? model.weight(j) * (model.gamma + model.beta * state.mode(j)) : 0.0;
  case DiffusionKind::general_matrix: return k <= model.rows ? model.table_at(k, j) : 0.0;
  }
  return 0.0;
}

/// sum_{k <= n, j <= m} (sigma_j^k)^2.
inline double hs_norm_sq(const DiffusionModel &model, const CoefficientState &state) {
  double s = 0.0;
  switch (model.kind) {
  case DiffusionKind::zero: break;
  case DiffusionKind::moving_diagonal: {
    const std::size_t top = std::min(model.m, state.n());
    for (std::size_t j = 1; j <= top; ++j) {
      const double c = model.weight(j) * (model.gamma + model.beta * state.mode(j));
      s += c * c;
    }
    break;
  }
  case DiffusionKind::general_matrix: {
    const std::size_t top = std::min(model.rows, state.n());
    for (std::size_t i = 0; i < top * model.m; ++i) s += model.table[i] * model.table[i];
    break;
  }
  }
  return s;
}

/// kick_k = sum_j sigma_j^k dB_j.
inline std::vector<double> noise_kick(const DiffusionModel &model, const CoefficientState &state,
                                      const NoiseIncrement &increment) {
  if (increment.m() != model.m) {
    std::ostringstream msg;
    msg << "noise increment has " << increment.m() << " components, model expects " << model.m;
    throw ValidationError(msg.str());
  }
  std::vector<double> kick(state.n(), 0.0);
  switch (model.kind) {
  case DiffusionKind::zero: break;
  case DiffusionKind::moving_diagonal: {
    const std::size_t top = std::min(model.m, state.n());
    for (std::size_t k = 1; k <= top; ++k) {
      kick[k - 1] = model.weight(k) * (model.gamma + model.beta * state.mode(k)) * increment.dB[k - 1];
    }
    break;
  }
  case DiffusionKind::general_matrix: {
    const std::size_t top = std::min(model.rows, state.n());
    for (std::size_t k = 1; k <= top; ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= model.m; ++j) s += model.table_at(k, j) * increment.dB[j - 1];
      kick[k - 1] = s;
    }
    break;
  }
  }
  return kick;
}

/// Worst observed ratios over random state pairs; both must be <= 1 for the
/// declared constant K to be consistent with the Lipschitz and growth bounds.
struct AssumptionCheck {
  double lipschitz_ratio = 0.0; // max ||sigma(u) - sigma(v)||_HS / (K |u - v|)
  double growth_ratio = 0.0;    // max ||sigma(u)||_HS^2 / (K^2 (|u| + 1)^2)
  double off_diagonal_max = 0.0; // max |sigma_j^k| over j != k
};

inline AssumptionCheck check_assumptions(const DiffusionModel &model, std::size_t n, int pairs,
                                         std::uint64_t seed, double scale = 3.0) {
  const NoiseStream rng(seed, 0);
  AssumptionCheck out;
  for (int p = 0; p < pairs; ++p) {
    CoefficientState u{0.0, std::vector<double>(n)}, v{0.0, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
      u.coeffs[k] = scale * rng.standard_normal(static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(2 * k));
      v.coeffs[k] = scale * rng.standard_normal(static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(2 * k + 1));
    }
    double diff_sq = 0.0, dist_sq = 0.0;
    for (std::size_t j = 1; j <= model.m; ++j) {
      for (std::size_t k = 1; k <= n; ++k) {
        const double su = sigma_coeff(model, j, k, u);
        const double d = su - sigma_coeff(model, j, k, v);
        diff_sq += d * d;
        if (j != k) out.off_diagonal_max = std::max(out.off_diagonal_max, std::abs(su));
      }
    }
    for (std::size_t k = 0; k < n; ++k) dist_sq += (u.coeffs[k] - v.coeffs[k]) * (u.coeffs[k] - v.coeffs[k]);
    const double K = model.lipschitz_k;
    if (dist_sq > 0.0) {
      out.lipschitz_ratio = std::max(out.lipschitz_ratio, std::sqrt(diff_sq) / (K * std::sqrt(dist_sq)));
    }
    const double norm_u = std::sqrt(l2_norm_sq(u));
    out.growth_ratio = std::max(out.growth_ratio, hs_norm_sq(model, u) / (K * K * (norm_u + 1.0) * (norm_u + 1.0)));
  }
  return out;
}

} // namespace movingheat
