#include <gtest/gtest.h>

#include "thorp/exact_kernel.hpp"
#include "thorp/mixbound.hpp"

using namespace thorp;

TEST(Bound, ValidateRejects) {
  EXPECT_THROW(mixing_bound_from_profile({0.0, 0.1, 10.0}), convergence_error);
  EXPECT_THROW(mixing_bound_from_profile({0.5, 0.0, 10.0}), convergence_error);
  EXPECT_THROW(mixing_bound_from_profile({0.5, 1.0, 10.0}), contract_error);
  EXPECT_THROW(mixing_bound_from_profile({0.5, 0.1, 0.0}), contract_error);
  EXPECT_THROW(mixing_bound_from_profile({0.5, 0.1, 10.0}, 5.0), contract_error);
}

TEST(Bound, F1SquareRootPhase) {
  // a = 1/4: z -> z^(1/2), so 16 -> 4 -> 2.
  EXPECT_NEAR(f1_iterate_log(0.25, std::log(16.0), 2), std::log(2.0), 1e-15);
  EXPECT_NEAR(f1_iterate_log(0.25, std::log(16.0), 1), std::log(4.0), 1e-15);
  EXPECT_EQ(f1_iterate_log(0.1, 3.0, 0), 3.0);
}

TEST(Bound, F2GeometricPhase) {
  // Z_0 = 4 and a negligible a: only the floor b moves z.
  for (double b : {0.05, 0.1, 0.3, 0.7}) {
    const auto r = mixing_bound_from_profile({1e-9, b, 2.0 * std::log(4.0)});
    const auto m = static_cast<std::uint64_t>(std::ceil(std::log(8.0) / -std::log1p(-b)));
    EXPECT_EQ(r.n_exact, m) << b;
    EXPECT_EQ(r.tau_bound, 2 * m);
    EXPECT_EQ(r.n1, 0u);
    EXPECT_EQ(r.n2, m);
    EXPECT_TRUE(r.iterated);
  }
}

TEST(Bound, ExactIterationNeverWorseThanPhases) {
  for (double a : {0.05, 0.1, 0.25, 0.4})
    for (double b : {0.01, 0.1, 0.5})
      for (double lv : {3.0, 10.0, 60.0, 500.0}) {
        const auto r = mixing_bound_from_profile({a, b, lv});
        ASSERT_TRUE(r.iterated);
        EXPECT_LE(r.tau_bound, r.tau_phase) << a << " " << b << " " << lv;
        EXPECT_LE(static_cast<double>(r.n1), std::max(r.n1_closed, 0.0) + 1e-9);
      }
}

TEST(Bound, Monotone) {
  const std::vector<double> as{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.45};
  const std::vector<double> bs{0.001, 0.01, 0.05, 0.1, 0.3, 0.6, 0.9};
  for (double lv : {5.0, 40.0, 400.0}) {
    for (std::size_t i = 0; i < as.size(); ++i)
      for (std::size_t j = 0; j < bs.size(); ++j) {
        const auto t = mixing_bound_from_profile({as[i], bs[j], lv}).tau_bound;
        if (i + 1 < as.size()) {
          EXPECT_LE(mixing_bound_from_profile({as[i + 1], bs[j], lv}).tau_bound, t);
        }
        if (j + 1 < bs.size()) {
          EXPECT_LE(mixing_bound_from_profile({as[i], bs[j + 1], lv}).tau_bound, t);
        }
      }
  }
}

TEST(Bound, IterationCapReported) {
  const auto r = mixing_bound_from_profile({1e-6, 1e-6, 100.0}, 0.5, 1000);
  EXPECT_FALSE(r.iterated);
  EXPECT_EQ(r.n_exact, 1000u);
}

TEST(Bound, PublishedShapesForSmallD) {
  // a = c/(2 d^42), b = c d^-28, ln|V| = ln (2^d)!, c = 1.
  for (int d = 2; d <= 10; ++d) {
    const double dd = d;
    const ProfileBoundSpec spec{0.5 * std::pow(dd, -42.0), std::pow(dd, -28.0),
                                log_factorial(std::uint64_t{1} << d)};
    const auto r = mixing_bound_from_profile(spec, 0.5, 10);
    EXPECT_FALSE(r.iterated);
    EXPECT_LE(r.n1_closed, std::pow(dd, 43.0)) << d;
    EXPECT_GT(r.n1_closed, 0.0);
    const double m = std::pow(dd, 28.0) * std::log(8.0);
    EXPECT_GE(r.n2_closed, m * (1 - 1e-15)) << d;
    EXPECT_LE(r.n2_closed, m * (1 + 1e-15) + 1.0) << d;
  }
}

TEST(Bound, LogFactorial) {
  EXPECT_EQ(log_factorial(0), 0.0);
  EXPECT_EQ(log_factorial(1), 0.0);
  EXPECT_NEAR(log_factorial(5), std::log(120.0), 1e-14);
  const std::uint64_t edge = std::uint64_t{1} << 22;
  EXPECT_NEAR(log_factorial(edge + 1) - log_factorial(edge), std::log(static_cast<double>(edge + 1)), 1e-3);
}

TEST(Fit, SyntheticProfile) {
  SizeProfile prof;
  prof.psi = {2.0, 0.5, 0.6, 0.25, 0.3};  // index 0 unused; running min 0.5, 0.5, 0.25, 0.25
  const auto spec = fit_profile_bound(prof, 8);
  double a = 1e300;
  const double run[] = {0.0, 0.5, 0.5, 0.25, 0.25};
  for (int j = 1; j <= 4; ++j) a = std::min(a, std::log(1.0 - run[j]) / std::log(std::min((j + 1) / 8.0, 0.5)));
  EXPECT_NEAR(spec.a, a, 1e-15);
  EXPECT_DOUBLE_EQ(spec.b, 0.25);
  EXPECT_DOUBLE_EQ(spec.log_v, std::log(8.0));
  // The certified profile really lies below the measured one.
  for (int j = 1; j <= 4; ++j) {
    const double right = std::min((j + 1) / 8.0, 0.5);
    EXPECT_LE(std::max(1.0 - std::pow(right, spec.a), spec.b), run[j] + 1e-12) << j;
  }
}

TEST(Fit, VacuousAndDegenerate) {
  SizeProfile flat;
  flat.psi = {2.0, 1.0, 1.0};
  EXPECT_EQ(fit_profile_bound(flat, 4).a, 1.0);
  SizeProfile stuck;
  stuck.psi = {2.0, 0.0, 0.0};
  EXPECT_THROW(fit_profile_bound(stuck, 4), contract_error);
}

TEST(Fit, CardChainGivesFiniteBound) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::thorp());
  const auto prof = profile_by_size(op, ProfileMode::exhaustive);
  const auto spec = fit_profile_bound(prof, op.size());
  EXPECT_GT(spec.a, 0.0);
  EXPECT_GT(spec.b, 0.0);
  const auto r = mixing_bound_from_profile(spec);
  EXPECT_TRUE(r.iterated);
  EXPECT_GE(r.tau_bound, 1u);
}

TEST(Constants, Values) {
  const auto r = constants_solver();
  EXPECT_EQ(r.alpha_min, 64u);
  EXPECT_EQ(r.beta, 657920u);
  EXPECT_EQ(r.c_min, 24u);
  EXPECT_TRUE(r.tail_monotone);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.table.size(), 1000u);
}

TEST(Constants, AlphaIsBindingAtDimensionOne) {
  // 4/alpha <= 1/16 at d = 1.
  EXPECT_NEAR(alpha_slack(64.0, 1), 0.0, 1e-12);
  EXPECT_LT(alpha_slack(63.0, 1), -1e-3);
  for (int d = 2; d <= 50; ++d) EXPECT_GT(alpha_slack(64.0, d), 0.0);
  // c = 23 fails somewhere in 1..1000
  double worst = 1e300;
  for (int d = 1; d <= 1000; ++d) worst = std::min(worst, c_slack(23.0, 64.0, 657920.0, d));
  EXPECT_LT(worst, 0.0);
}

TEST(TruncatedCorollary, GridPasses) {
  const auto r = trunccor_arithmetic_check();
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.points, 3800u);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(trunccor_point(1, 1, 1).pass);
  EXPECT_THROW(trunccor_point(1, 2, 3), contract_error);
}
