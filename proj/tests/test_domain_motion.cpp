#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "movingheat/domain_motion.hpp"

namespace movingheat {
namespace {

DomainParams params(double a0, double slope = 0, double amp = 0, double omega = 0) {
  DomainParams p;
  p.a0 = a0;
  p.slope = slope;
  p.amp = amp;
  p.omega = omega;
  return p;
}

TEST(DomainMotion, ConstantFamily) {
  const auto d = make_domain(DomainKind::constant, params(1.0), 1.0);
  for (double t : {0.0, 0.25, 1.0}) {
    EXPECT_EQ(a_at(d, t), 1.0);
    EXPECT_EQ(a_prime_at(d, t), 0.0);
  }
  const auto d2 = make_domain(DomainKind::constant, params(2.0), 1.0);
  EXPECT_EQ(a_at(d2, 0.3), 2.0);
}

TEST(DomainMotion, LinearFamily) {
  const auto d = make_domain(DomainKind::linear, params(1.0, 0.25), 0.5);
  EXPECT_NEAR(a_at(d, 0.4), 1.1, 1e-15);
  EXPECT_EQ(a_prime_at(d, 0.4), 0.25);
  const auto d2 = make_domain(DomainKind::linear, params(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(a_at(d2, 0.5), 1.5);
}

TEST(DomainMotion, SinusoidalFamily) {
  const auto d = make_domain(DomainKind::sinusoidal, params(1.0, 0, 0.5, 1.0), 1.0);
  EXPECT_EQ(a_at(d, 0.0), 1.0);
  EXPECT_EQ(a_prime_at(d, 0.0), 0.5);
  EXPECT_NEAR(a_at(d, 0.7), 1.0 + 0.5 * std::sin(0.7), 1e-15);
  const auto d2 = make_domain(DomainKind::sinusoidal, params(1.0, 0, 0.25, 2.0), 1.0);
  EXPECT_NEAR(a_at(d2, std::numbers::pi / 4), 1.25, 1e-15);
}

TEST(DomainMotion, BoundsFromSamplingWithMargins) {
  const auto d = make_domain(DomainKind::sinusoidal, params(1.0, 0, 0.5, 1.0), 1.0);
  EXPECT_NEAR(d.delta0(), 0.99 * 1.0, 1e-12);            // min a = a(0)
  EXPECT_NEAR(d.big_l(), 1.01 * (1.0 + 0.5 * std::sin(1.0)), 1e-12);
  for (int i = 0; i < 1000; ++i) {
    const double t = i / 999.0;
    EXPECT_GE(d.a(t), d.delta0());
    EXPECT_LE(d.a(t), d.big_l());
    EXPECT_LE(std::abs(d.a_prime(t)), d.big_l());
  }
}

TEST(DomainMotion, BigLCoversTheDerivative) {
  // |a'| = 4 dominates a <= 1.5.
  const auto d = make_domain(DomainKind::sinusoidal, params(1.0, 0, 0.5, 8.0), 1.0);
  EXPECT_GE(d.big_l(), 4.0);
}

TEST(DomainMotion, RejectsNonPositiveBoundary) {
  EXPECT_THROW(make_domain(DomainKind::linear, params(1.0, -2.0), 1.0), ValidationError);
  EXPECT_THROW(make_domain(DomainKind::constant, params(0.0), 1.0), ValidationError);
  EXPECT_THROW(make_domain(DomainKind::sinusoidal, params(1.0, 0, 1.5, 3.0), 2.0), ValidationError);
  EXPECT_THROW(make_domain(DomainKind::constant, params(1.0), 0.0), ValidationError);
}

TEST(DomainMotion, RejectsTimesOutsideHorizon) {
  const auto d = make_domain(DomainKind::linear, params(1.0, 0.25), 0.5);
  EXPECT_THROW(d.a(-0.1), ValidationError);
  EXPECT_THROW(d.a_prime(0.6), ValidationError);
  EXPECT_NO_THROW(d.a(0.5));
}

TEST(DomainMotion, FiniteDifferenceMatchesDerivativeForEveryFamily) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(0.01, 0.99);
  const DomainMotion families[] = {
      make_domain(DomainKind::constant, params(1.3), 1.0),
      make_domain(DomainKind::linear, params(1.0, 0.25), 1.0),
      make_domain(DomainKind::sinusoidal, params(1.0, 0, 0.5, 1.0), 1.0),
      make_domain(DomainKind::exponential, params(1.0, 0.3), 1.0),
  };
  const double h = 1e-6;
  for (const auto &d : families) {
    for (int i = 0; i < 100; ++i) {
      const double t = pick(rng);
      const double fd = (d.a(t + h) - d.a(t - h)) / (2 * h);
      const double exact = d.a_prime(t);
      if (exact == 0.0) {
        EXPECT_EQ(fd, 0.0);
      } else {
        EXPECT_LE(std::abs(fd - exact) / std::abs(exact), 1e-6) << to_string(d.kind()) << " t=" << t;
      }
    }
  }
}

TEST(DomainMotion, TableSplineOfLinearDataHasExactSlope) {
  DomainParams p;
  for (int i = 0; i <= 20; ++i) {
    const double t = i * 0.05;
    p.table_t.push_back(t);
    p.table_a.push_back(1.0 + 0.1 * t);
  }
  const auto d = make_domain(DomainKind::table, p, 1.0);
  for (double t : {0.013, 0.25, 0.5, 0.77, 0.9}) {
    EXPECT_NEAR(d.a_prime(t), 0.1, 1e-8);
    EXPECT_NEAR(d.a(t), 1.0 + 0.1 * t, 1e-12);
  }
}

TEST(DomainMotion, TableSplineIsContinuouslyDifferentiableAtKnots) {
  DomainParams p;
  for (int i = 0; i <= 10; ++i) {
    const double t = i * 0.1;
    p.table_t.push_back(t);
    p.table_a.push_back(1.0 + 0.3 * std::sin(3.0 * t));
  }
  const auto d = make_domain(DomainKind::table, p, 1.0);
  for (int i = 1; i < 10; ++i) {
    const double knot = i * 0.1;
    EXPECT_NEAR(d.a_prime(knot - 1e-9), d.a_prime(knot + 1e-9), 1e-6);
    EXPECT_NEAR(d.a(knot), p.table_a[i], 1e-14);
  }
  // Interpolant tracks the smooth source.
  EXPECT_NEAR(d.a(0.55), 1.0 + 0.3 * std::sin(1.65), 2e-3);
}

TEST(DomainMotion, TableMustCoverHorizon) {
  DomainParams p;
  p.table_t = {0.0, 0.5};
  p.table_a = {1.0, 1.1};
  EXPECT_THROW(make_domain(DomainKind::table, p, 1.0), ValidationError);
}

TEST(DomainMotion, LoadsTableCsv) {
  const auto path = std::filesystem::temp_directory_path() / "movingheat_table_test.csv";
  {
    std::ofstream f(path);
    f << "t,a\n0,1\n0.5,1.05\n1,1.1\n";
  }
  auto [ts, as] = load_domain_table(path.string());
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_EQ(as[2], 1.1);
  std::filesystem::remove(path);
}

} // namespace
} // namespace movingheat
