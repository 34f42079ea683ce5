#include <gtest/gtest.h>

#include <random>

#include "thorp/evolving_sets.hpp"
#include "thorp/exact_kernel.hpp"
#include "thorp/l2_analysis.hpp"

using namespace thorp;

namespace {

// E|S~| and E sqrt(|S~|/|S|) by a midpoint rule in U, independent of the
// level-set bookkeeping.
std::pair<double, double> riemann_expectations(const DenseKernel& k, const StateSet& s, int grid) {
  std::vector<double> mass(k.size(), 0.0);
  for (std::size_t x = 0; x < k.size(); ++x)
    if (s[x])
      for (std::size_t y = 0; y < k.size(); ++y) mass[y] += k(x, y);
  double size = 0.0, root = 0.0;
  const double n = static_cast<double>(set_size(s));
  for (int i = 0; i < grid; ++i) {
    const double u = (i + 0.5) / grid;
    int c = 0;
    for (double m : mass) c += m >= u ? 1 : 0;
    size += c;
    root += std::sqrt(c / n);
  }
  return {size / grid, root / grid};
}

DenseKernel half_kernel() {
  DenseKernel k(2);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) k(x, y) = 0.5;
  return k;
}

}  // namespace

TEST(Sets, Helpers) {
  const auto s = set_from_indices(5, {0, 3});
  EXPECT_EQ(set_size(s), 2u);
  EXPECT_EQ(set_indices(complement(s)), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(format_set(s), "{0;3}");
  EXPECT_EQ(format_set(StateSet(3, false)), "{}");
  EXPECT_THROW(set_from_indices(2, {2}), contract_error);
}

TEST(EvolvingSets, StepThreshold) {
  const auto k = half_kernel();
  const auto s = set_from_indices(2, {0});
  EXPECT_EQ(set_size(es_step(s, k, 0.5)), 2u);
  EXPECT_EQ(set_size(es_step(s, k, 0.75)), 0u);
}

TEST(EvolvingSets, MartingaleExactOnCardChains) {
  for (int d = 1; d <= 3; ++d) {
    const auto op = build_operator(StateSpaceSpec::card(d), Schedule::thorp());
    const std::size_t n = op.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      StateSet s(n, false);
      for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1ULL;
      ASSERT_EQ(es_exact_expectations(s, op).expected_size, Dyadic::integer(set_size(s)));
    }
  }
}

TEST(EvolvingSets, ExpectationsMatchRiemannOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng() % 6;
    const auto k = random_birkhoff_kernel(n, rng);
    StateSet s(n, false);
    for (std::size_t i = 0; i < n; ++i) s[i] = rng() % 2;
    if (set_size(s) == 0) s[0] = true;
    const auto e = es_exact_expectations(s, k);
    const auto [size, root] = riemann_expectations(k, s, 200'000);
    EXPECT_NEAR(e.expected_size, size, 1e-4);
    EXPECT_NEAR(e.expected_size, static_cast<double>(set_size(s)), 1e-12);
    EXPECT_NEAR(e.expected_root_ratio, root, 1e-4);
    EXPECT_NEAR(e.psi, 1.0 - e.expected_root_ratio, 1e-15);
  }
}

TEST(EvolvingSets, OneStepLawIsAProbability) {
  const auto op = build_operator(StateSpaceSpec::full(2), Schedule::thorp());
  for (std::size_t x : {0u, 7u, 23u}) {
    Dyadic total;
    for (const auto& [t, p] : one_step_law(set_from_indices(24, {x, (x + 5) % 24}), op)) total += p;
    EXPECT_EQ(total, Dyadic::one());
  }
}

TEST(EvolvingSets, DualityExact) {
  for (const auto& spec : {StateSpaceSpec::card(2), StateSpaceSpec::card(3), StateSpaceSpec::full(2)}) {
    const auto op = build_operator(spec, Schedule::thorp());
    for (int n : {0, 1, 2}) {
      for (const auto& r : verify_duality(op, 0, n, CheckMode::exact)) {
        EXPECT_TRUE(r.pass) << spec.name() << " n=" << n << " y=" << r.y << " gap=" << r.gap;
      }
    }
  }
}

TEST(EvolvingSets, DualityDenseMatchesPowers) {
  std::mt19937_64 rng(5);
  const auto k = random_birkhoff_kernel(5, rng);
  const auto kk = k * k * k;
  const auto hit = duality_hit_probabilities(k, 2, 3);
  for (std::size_t y = 0; y < 5; ++y) EXPECT_NEAR(hit[y], kk(2, y), 1e-12);
}

TEST(EvolvingSets, DualityMonteCarlo) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::zigzag());
  DualityOptions opts;
  opts.trials = 40'000;
  opts.seed = 3;
  for (const auto& r : verify_duality(op, 1, 2, CheckMode::monte_carlo, opts))
    EXPECT_TRUE(r.pass) << "y=" << r.y << " gap=" << r.gap << " se=" << r.standard_error;
}

TEST(EvolvingSets, ComplementLaw) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::thorp());
  for (std::uint64_t mask = 1; mask < 255; ++mask) {
    StateSet s(8, false);
    for (std::size_t i = 0; i < 8; ++i) s[i] = (mask >> i) & 1ULL;
    ASSERT_TRUE(complement_law_matches(s, op)) << format_set(s);
  }
  std::mt19937_64 rng(8);
  const auto k = random_birkhoff_kernel(6, rng);
  EXPECT_TRUE(complement_law_matches(set_from_indices(6, {1, 4}), k));
}

TEST(RootRatio, TwoStateHalfKernel) {
  const auto r = root_ratio_check(set_from_indices(2, {0}), half_kernel());
  EXPECT_DOUBLE_EQ(r.alpha, 0.5);
  EXPECT_NEAR(r.lhs, 0.5 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.rhs, std::pow(0.75, 0.25), 1e-15);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.remark_holds);
}

TEST(RootRatio, HoldsOnRandomKernels) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 7;
    const auto k = random_birkhoff_kernel(n, rng);
    StateSet s(n, false);
    for (std::size_t i = 0; i < n; ++i) s[i] = rng() % 2;
    if (set_size(s) == 0) s[rng() % n] = true;
    const auto r = root_ratio_check(s, k);
    ASSERT_TRUE(r.pass) << r.lhs << " > " << r.rhs;
    ASSERT_TRUE(r.remark_holds);
  }
}

TEST(RootRatio, PermutationKernelIsTight) {
  // A permutation moves S rigidly: ratio 1, alpha 1.
  const auto k = permutation_kernel({2, 0, 1, 3});
  const auto r = root_ratio_check(set_from_indices(4, {0, 1}), k);
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  EXPECT_DOUBLE_EQ(r.alpha, 1.0);
  EXPECT_TRUE(r.pass);
}

TEST(Profile, ExhaustiveMatchesBruteForce) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::thorp());
  const auto prof = profile_by_size(op, ProfileMode::exhaustive);
  std::vector<double> best(5, 2.0);
  for (std::uint64_t mask = 1; mask < 256; ++mask) {
    StateSet s(8, false);
    for (std::size_t i = 0; i < 8; ++i) s[i] = (mask >> i) & 1ULL;
    const auto size = set_size(s);
    if (size <= 4) best[size] = std::min(best[size], set_psi(s, op));
  }
  for (std::size_t size = 1; size <= 4; ++size) {
    EXPECT_NEAR(prof.psi[size], best[size], 1e-12) << size;
    EXPECT_NEAR(set_psi(prof.argmin[size], op), prof.psi[size], 1e-12);
  }
}

TEST(Profile, SampledIsNeverBelowExhaustive) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::zigzag());
  const auto ex = profile_by_size(op, ProfileMode::exhaustive);
  ProfileOptions opts;
  opts.samples_per_size = 200;
  const auto sm = profile_by_size(op, ProfileMode::sampled, opts);
  for (std::size_t size = 1; size < ex.psi.size(); ++size) EXPECT_GE(sm.psi[size], ex.psi[size] - 1e-12);
}

TEST(Profile, PointsAreMonotoneWithVacuousValue) {
  const auto op = build_operator(StateSpaceSpec::card(3), Schedule::thorp());
  const std::vector<double> grid{0.05, 0.125, 0.25, 0.5, 0.75, 1.0};
  const auto pts = root_profile(op, grid, ProfileMode::exhaustive);
  ASSERT_EQ(pts.size(), grid.size());
  EXPECT_EQ(pts[0].psi, 1.0);  // no nonempty set has |S| <= 0.4
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LE(pts[i].psi, pts[i - 1].psi);
  EXPECT_EQ(pts[4].psi, pts[3].psi);
  EXPECT_THROW(root_profile(op, {0.0}, ProfileMode::exhaustive), contract_error);
  ProfileOptions small;
  small.exhaustive_limit = 4;
  EXPECT_THROW(profile_by_size(op, ProfileMode::exhaustive, small), contract_error);
}
