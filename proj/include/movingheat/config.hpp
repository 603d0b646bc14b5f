#pragma once

// Run configuration: UTF-8 text, `[section]` headers, `key = value` lines, `#` comments.
// Unknown sections and keys are errors.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "movingheat/csv.hpp"
#include "movingheat/diffusion_models.hpp"
#include "movingheat/domain_motion.hpp"
#include "movingheat/errors.hpp"
#include "movingheat/galerkin.hpp"
#include "movingheat/spectral_basis.hpp"

namespace movingheat {

enum class InitialKind { modes, parabola };

/// u0 either as explicit mode coefficients in e_k(0) or as scale * x (a0 - x).
struct InitialCondition {
  InitialKind kind = InitialKind::modes;
  std::vector<double> coeffs{1.0};
  double scale = 1.0;
};

struct RunConfig {
  SimulationConfig sim;
  InitialCondition initial;
  std::string out_dir = ".";
  /// Canonical text of every resolved key; parses back to the same RunConfig.
  std::string resolved_text;
};

namespace config_detail {

using Section = std::map<std::string, std::pair<std::string, int>>; // key -> (value, line)
using Document = std::map<std::string, Section>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline const std::map<std::string, std::set<std::string>> &schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"domain", {"kind", "a0", "slope", "amp", "omega", "T", "table_path"}},
      {"noise", {"kind", "gamma", "beta", "p", "m", "lipschitz_k", "matrix_path"}},
      {"sim", {"n", "scheme", "dt", "t_end", "seed", "n_paths"}},
      {"output", {"grid_size", "snapshot_stride", "out_dir"}},
      {"initial", {"kind", "coeffs", "scale"}},
  };
  return s;
}

inline Document parse_document(std::string_view text) {
  Document doc;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!schema().count(section)) {
        throw ValidationError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": key outside any [section]");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!schema().at(section).count(key)) {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" +
                            section + "]");
    }
    if (doc[section].count(key)) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    doc[section][key] = {value, line_no};
  }
  return doc;
}

class Reader {
public:
  explicit Reader(const Document &doc) : doc_(doc) {}

  std::optional<std::string> text(const std::string &section, const std::string &key) const {
    const auto s = doc_.find(section);
    if (s == doc_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second.first;
  }

  std::string require_text(const std::string &section, const std::string &key) const {
    auto v = text(section, key);
    if (!v) throw ValidationError("missing required key '" + key + "' in [" + section + "]");
    return *v;
  }

  std::optional<double> real(const std::string &section, const std::string &key) const {
    auto v = text(section, key);
    if (!v) return std::nullopt;
    return to_real(section, key, *v);
  }

  double require_real(const std::string &section, const std::string &key) const {
    return to_real(section, key, require_text(section, key));
  }

  std::optional<std::uint64_t> integer(const std::string &section, const std::string &key) const {
    auto v = text(section, key);
    if (!v) return std::nullopt;
    return to_integer(section, key, *v);
  }

  std::uint64_t require_integer(const std::string &section, const std::string &key) const {
    return to_integer(section, key, require_text(section, key));
  }

  static double to_real(const std::string &section, const std::string &key, const std::string &v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw ValidationError("key '" + key + "' in [" + section + "] expects a number, got '" + v + "'");
    }
    return out;
  }

  static std::uint64_t to_integer(const std::string &section, const std::string &key, const std::string &v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ValidationError("key '" + key + "' in [" + section + "] expects a non-negative integer, got '" +
                            v + "'");
    }
    return out;
  }

private:
  const Document &doc_;
};

inline std::string resolve_path(const std::string &path, const std::filesystem::path &base_dir) {
  std::filesystem::path p(path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return std::filesystem::absolute(p).lexically_normal().string();
}

} // namespace config_detail

/// Coefficients A(0) for a Galerkin level n.
inline CoefficientState initial_state(const InitialCondition &init, std::size_t n, const DomainMotion &domain) {
  if (init.kind == InitialKind::modes) {
    CoefficientState s{0.0, std::vector<double>(n, 0.0)};
    for (std::size_t k = 0; k < std::min(n, init.coeffs.size()); ++k) s.coeffs[k] = init.coeffs[k];
    return s;
  }
  const double a0 = domain.a(0.0);
  const double scale = init.scale;
  return project_initial([=](double x) { return scale * x * (a0 - x); }, n, domain);
}

/// u0 as a function on [0, a0].
inline std::function<double(double)> initial_function(const InitialCondition &init, const DomainMotion &domain) {
  const double a0 = domain.a(0.0);
  if (init.kind == InitialKind::parabola) {
    const double scale = init.scale;
    return [=](double x) { return scale * x * (a0 - x); };
  }
  const std::vector<double> coeffs = init.coeffs;
  return [=](double x) {
    const double phase = std::numbers::pi * x / a0;
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * std::sin(static_cast<double>(k + 1) * phase);
    return std::sqrt(2.0 / a0) * s;
  };
}

/// Canonical text for a resolved configuration.
inline std::string render_config(const RunConfig &rc, const std::string &table_path,
                                 const std::string &matrix_path) {
  using csv::format;
  const auto &c = rc.sim;
  const auto &dp = c.domain.params();
  std::ostringstream o;
  o << "[domain]\n"
    << "kind = " << to_string(c.domain.kind()) << "\n"
    << "T = " << format(c.domain.horizon()) << "\n";
  if (c.domain.kind() == DomainKind::table) {
    o << "table_path = " << table_path << "\n";
  } else {
    o << "a0 = " << format(dp.a0) << "\n"
      << "slope = " << format(dp.slope) << "\n"
      << "amp = " << format(dp.amp) << "\n"
      << "omega = " << format(dp.omega) << "\n";
  }
  o << "\n[noise]\n"
    << "kind = " << to_string(c.model.kind) << "\n"
    << "m = " << c.model.m << "\n"
    << "lipschitz_k = " << format(c.model.lipschitz_k) << "\n";
  if (c.model.kind == DiffusionKind::moving_diagonal) {
    o << "gamma = " << format(c.model.gamma) << "\n"
      << "beta = " << format(c.model.beta) << "\n"
      << "p = " << format(c.model.decay_p) << "\n";
  } else if (c.model.kind == DiffusionKind::general_matrix) {
    o << "matrix_path = " << matrix_path << "\n";
  }
  o << "\n[sim]\n"
    << "n = " << c.n << "\n"
    << "scheme = " << to_string(c.scheme) << "\n"
    << "dt = " << format(c.dt) << "\n"
    << "t_end = " << format(c.t_end) << "\n"
    << "seed = " << c.seed << "\n"
    << "n_paths = " << c.n_paths << "\n"
    << "\n[output]\n"
    << "grid_size = " << c.output.grid_size << "\n"
    << "snapshot_stride = " << c.output.snapshot_stride << "\n"
    << "out_dir = " << rc.out_dir << "\n"
    << "\n[initial]\n";
  if (rc.initial.kind == InitialKind::modes) {
    o << "kind = modes\ncoeffs = ";
    for (std::size_t i = 0; i < rc.initial.coeffs.size(); ++i) {
      o << (i ? ", " : "") << format(rc.initial.coeffs[i]);
    }
    o << "\n";
  } else {
    o << "kind = parabola\nscale = " << format(rc.initial.scale) << "\n";
  }
  return o.str();
}

/// Parses and fully validates configuration text. Relative file paths resolve
/// against `base_dir`.
inline RunConfig parse_config_text(std::string_view text, const std::filesystem::path &base_dir = {}) {
  using namespace config_detail;
  const Document doc = parse_document(text);
  const Reader r(doc);
  RunConfig rc;

  // [domain]
  const DomainKind dkind = parse_domain_kind(r.require_text("domain", "kind"));
  const double horizon = r.require_real("domain", "T");
  DomainParams dp;
  dp.a0 = r.real("domain", "a0").value_or(1.0);
  dp.slope = r.real("domain", "slope").value_or(0.0);
  dp.amp = r.real("domain", "amp").value_or(0.0);
  dp.omega = r.real("domain", "omega").value_or(0.0);
  std::string table_path;
  if (dkind == DomainKind::table) {
    table_path = resolve_path(r.require_text("domain", "table_path"), base_dir);
    auto [ts, as] = load_domain_table(table_path);
    dp.table_t = std::move(ts);
    dp.table_a = std::move(as);
  }
  rc.sim.domain = make_domain(dkind, std::move(dp), horizon);

  // [sim]
  rc.sim.n = r.require_integer("sim", "n");
  if (rc.sim.n == 0) throw ValidationError("key 'n' in [sim] must be >= 1");
  rc.sim.scheme = parse_scheme(r.text("sim", "scheme").value_or("exponential_em"));
  rc.sim.dt = r.require_real("sim", "dt");
  rc.sim.t_end = r.require_real("sim", "t_end");
  rc.sim.seed = r.integer("sim", "seed").value_or(0);
  rc.sim.n_paths = r.integer("sim", "n_paths").value_or(1);

  // [noise]
  const DiffusionKind nkind = parse_diffusion_kind(r.text("noise", "kind").value_or("zero"));
  const std::size_t m = r.integer("noise", "m").value_or(rc.sim.n);
  const auto declared_k = r.real("noise", "lipschitz_k");
  std::string matrix_path;
  switch (nkind) {
  case DiffusionKind::zero:
    rc.sim.model = make_zero_model(m);
    if (declared_k) rc.sim.model.lipschitz_k = *declared_k;
    break;
  case DiffusionKind::moving_diagonal:
    rc.sim.model = make_moving_diagonal(r.real("noise", "gamma").value_or(0.0),
                                        r.real("noise", "beta").value_or(0.0),
                                        r.real("noise", "p").value_or(1.0), m, declared_k);
    break;
  case DiffusionKind::general_matrix: {
    matrix_path = resolve_path(r.require_text("noise", "matrix_path"), base_dir);
    if (!declared_k) throw ValidationError("missing required key 'lipschitz_k' in [noise] for general_matrix");
    rc.sim.model = make_general_matrix(load_matrix_csv(matrix_path), *declared_k);
    if (r.integer("noise", "m") && *r.integer("noise", "m") != rc.sim.model.m) {
      throw ValidationError("key 'm' in [noise] disagrees with the matrix column count");
    }
    break;
  }
  }

  // [output]
  rc.sim.output.grid_size = r.integer("output", "grid_size").value_or(129);
  rc.sim.output.snapshot_stride = r.integer("output", "snapshot_stride").value_or(1);
  rc.out_dir = r.text("output", "out_dir").value_or(".");

  // [initial]
  const std::string ikind = r.text("initial", "kind").value_or("modes");
  if (ikind == "modes") {
    rc.initial.kind = InitialKind::modes;
    if (auto list = r.text("initial", "coeffs")) {
      rc.initial.coeffs.clear();
      std::string item;
      std::istringstream in(*list);
      while (std::getline(in, item, ',')) rc.initial.coeffs.push_back(Reader::to_real("initial", "coeffs", trim(item)));
      if (rc.initial.coeffs.empty()) throw ValidationError("key 'coeffs' in [initial] is empty");
    }
  } else if (ikind == "parabola") {
    rc.initial.kind = InitialKind::parabola;
    rc.initial.scale = r.real("initial", "scale").value_or(1.0);
  } else {
    throw ValidationError("unknown initial kind '" + ikind + "' (expected modes or parabola)");
  }

  validate(rc.sim);
  rc.resolved_text = render_config(rc, table_path, matrix_path);
  return rc;
}

inline RunConfig parse_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), std::filesystem::path(path).parent_path());
}

} // namespace movingheat
