#pragma once

// Counter-based Gaussian noise. Every draw is a pure function of
// (seed, path, step, mode), so any path can be regenerated on any worker.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "movingheat/errors.hpp"

namespace movingheat {

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Standard normal stream for one Monte Carlo path.
class NoiseStream {
public:
  NoiseStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path() const { return path_; }

  /// N(0, 1) keyed by (seed, path, step, j). Box-Muller on one Philox block.
  double standard_normal(std::uint64_t step, std::uint32_t j) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(step >> 32), j,
                                  static_cast<std::uint32_t>(path_)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32) ^
                                  static_cast<std::uint32_t>(path_ >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    const std::uint64_t x = (std::uint64_t{r[0]} << 32) | r[1];
    const std::uint64_t y = (std::uint64_t{r[2]} << 32) | r[3];
    constexpr double two_m53 = 1.0 / 9007199254740992.0;
    const double u1 = (static_cast<double>(x >> 11) + 0.5) * two_m53; // (0, 1)
    const double u2 = static_cast<double>(y >> 11) * two_m53;         // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

/// Brownian increments dB_j ~ N(0, dt), j = 1..m, for one time step.
struct NoiseIncrement {
  std::vector<double> dB;
  std::size_t m() const { return dB.size(); }
};

/// Increments for time step `step`. With refine = R the step is the sum of R
/// sub-increments on the grid of width dt / R, so runs at dt, dt/2, dt/4 sharing
/// the finest grid see the same Brownian path.
inline NoiseIncrement draw_increment(const NoiseStream &stream, std::uint64_t step, std::size_t m,
                                     double dt, std::uint32_t refine = 1) {
  if (!(dt > 0.0)) throw ValidationError("noise increment needs dt > 0");
  if (refine == 0) throw ValidationError("noise refinement factor must be >= 1");
  NoiseIncrement inc;
  inc.dB.assign(m, 0.0);
  const double sub_sd = std::sqrt(dt / refine);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::uint32_t r = 0; r < refine; ++r) {
      sum += stream.standard_normal(step * refine + r, static_cast<std::uint32_t>(j + 1));
    }
    inc.dB[j] = sub_sd * sum;
  }
  return inc;
}

} // namespace movingheat
