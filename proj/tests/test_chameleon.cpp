#include <gtest/gtest.h>

#include <random>

#include "thorp/chameleon.hpp"

using namespace thorp;

namespace {

// Antisocial counts by direct replay on a "card at position" vector, reading
// the coins in ringing order.
std::vector<std::uint32_t> antisocial_oracle(int d, const std::vector<bool>& coins, std::uint64_t rounds,
                                             const std::vector<int>& a, const std::vector<int>& b) {
  const int n = 1 << d;
  std::vector<int> deck(n);
  for (int p = 0; p < n; ++p) deck[p] = p;
  auto in = [](const std::vector<int>& s, int c) { return std::find(s.begin(), s.end(), c) != s.end(); };
  std::size_t used = 0;
  std::vector<std::uint32_t> out;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    std::vector<bool> social(n, false);
    for (int s = 0; s < 2 * d; ++s) {
      const int j = s < d ? s + 1 : 2 * d - s;
      const int bit = 1 << (d - j);
      for (int p = 0; p < n; ++p) {
        if (p & bit) continue;
        const int u = deck[p], v = deck[p | bit];
        if (in(a, u) && in(b, v)) social[u] = true;
        if (in(a, v) && in(b, u)) social[v] = true;
        if (coins[used++]) std::swap(deck[p], deck[p | bit]);
      }
    }
    std::uint32_t z = 0;
    for (int c : a) z += social[c] ? 0 : 1;
    out.push_back(z);
  }
  return out;
}

Trace zigzag_trace(int d, std::uint64_t rounds, std::uint64_t seed) {
  CoinStream coins(seed);
  return run_schedule(DeckState::identity(d), Schedule::zigzag(), rounds, coins).trace;
}

}  // namespace

TEST(Chameleon, ZigzagDirections) {
  std::vector<int> dirs;
  for (int s = 0; s < 8; ++s) dirs.push_back(zigzag_direction(2, s));
  EXPECT_EQ(dirs, (std::vector<int>{1, 2, 2, 1, 1, 2, 2, 1}));
  EXPECT_EQ(zigzag_direction(1, 0), 1);
  EXPECT_EQ(zigzag_direction(1, 1), 1);
}

TEST(Chameleon, InitColorsAndValidation) {
  const auto s = cham_init(2, {3, 0, 2}, 1);
  EXPECT_EQ(s.color[3], Color::white);
  EXPECT_EQ(s.color[0], Color::white);
  EXPECT_EQ(s.color[2], Color::red);
  EXPECT_EQ(s.color[1], Color::black);
  EXPECT_EQ(s.nonblack, 3u);
  EXPECT_EQ(s.nonblack_mask(), 0b1101u);
  EXPECT_DOUBLE_EQ(red_mass(s), 1.0);
  EXPECT_THROW(cham_init(2, {0, 1}, 1), contract_error);        // b <= 2^(d-1)
  EXPECT_THROW(cham_init(2, {0, 1, 1}, 1), contract_error);     // duplicate
  EXPECT_THROW(cham_init(2, {0, 1, 9}, 1), contract_error);     // unknown card
  EXPECT_THROW(cham_init(2, {0, 1, 2}, 0), contract_error);     // period
  EXPECT_STREQ(to_string(Color::pink), "pink");
}

TEST(Chameleon, DimensionOneFirstStepPinkens) {
  for (bool coin : {false, true}) {
    auto s = cham_init(1, first_cards(2), 1);
    ConstantCoins c{coin};
    const auto ev = cham_step_in_place(s, c);
    EXPECT_EQ(ev.pinkened, 2u);
    EXPECT_FALSE(ev.depinked);
    EXPECT_EQ(s.counts().pink, 2u);
    EXPECT_DOUBLE_EQ(rho(s, 0), 0.5);
    EXPECT_DOUBLE_EQ(red_mass(s), 1.0);
    EXPECT_EQ(s.deck.position_of(1), coin ? 0u : 1u);
  }
}

TEST(Chameleon, DimensionOneRoundEndsWithDepink) {
  for (bool coin : {false, true}) {
    auto s = cham_init(1, first_cards(2), 1);
    ConstantCoins c{coin};
    cham_step_in_place(s, c);
    const auto ev = cham_step_in_place(s, c);
    EXPECT_EQ(ev.pinkened, 0u);
    EXPECT_TRUE(ev.depinked);
    EXPECT_EQ(s.rounds_done, 1u);
    EXPECT_DOUBLE_EQ(red_mass(s), coin ? 2.0 : 0.0);
  }
}

TEST(Chameleon, PeriodDelaysDepink) {
  auto s = cham_init(2, first_cards(3), 3);
  CoinStream c(4);
  std::uint64_t depinks = 0;
  for (int t = 0; t < 4 * 9; ++t) depinks += cham_step_in_place(s, c).depinked ? 1 : 0;
  EXPECT_EQ(depinks, 3u);
  EXPECT_EQ(depink_draws(2, 36, 3), 3u);
  EXPECT_EQ(depink_draws(2, 8, 1), 2u);
}

TEST(Chameleon, BlackCardsNeverChange) {
  auto s = cham_init(3, first_cards(5), 1);
  CoinStream c(12);
  for (int t = 0; t < 60; ++t) {
    cham_step_in_place(s, c);
    for (CardId card = 5; card < 8; ++card) ASSERT_EQ(s.color[card], Color::black);
    ASSERT_EQ(s.nonblack_mask() != 0, true);
  }
}

TEST(Chameleon, IdentityExactSmall) {
  const auto r1 = verify_chameleon_identity(1, 2, 6, 1, CheckMode::exact);
  EXPECT_TRUE(r1.pass) << r1.max_group_gap;
  const auto r2 = verify_chameleon_identity(2, 3, 4, 1, CheckMode::exact);
  EXPECT_TRUE(r2.pass) << r2.max_group_gap;
  EXPECT_EQ(r2.rows.size(), 5u * 4u);
  EXPECT_GT(r2.groups, 5u);
  const auto r3 = verify_chameleon_identity(2, 4, 2, 2, CheckMode::exact);
  EXPECT_TRUE(r3.pass);
}

TEST(Chameleon, IdentityRowZeroIsPointMass) {
  const auto r = verify_chameleon_identity(2, 3, 0, 1, CheckMode::exact);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[2].card_probability, 1.0);  // x_b = card 2 starts at position 2
  EXPECT_EQ(r.rows[2].mean_rho, 1.0);
}

TEST(Chameleon, IdentityCapThrows) {
  IdentityOptions tight;
  tight.coin_bit_cap = 10;
  EXPECT_THROW(verify_chameleon_identity(2, 3, 4, 1, CheckMode::exact, tight), size_error);
}

TEST(Chameleon, IdentityMonteCarlo) {
  IdentityOptions opts;
  opts.trials = 20'000;
  opts.seed = 9;
  const auto r = verify_chameleon_identity(3, 5, 6, 2, CheckMode::monte_carlo, opts);
  EXPECT_TRUE(r.pass);
  for (const auto& row : r.rows) EXPECT_GT(row.standard_error + (row.n == 0 ? 1.0 : 0.0), 0.0);
}

TEST(Chameleon, RedMassIsAMartingale) {
  const auto r = red_mass_check(2, 3, 1, 5, 20'000, 2);
  EXPECT_TRUE(r.conserved_before_first_depink);
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.rows[4].round, 5u);
}

TEST(Antisocial, MatchesReplayOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + trial % 2;
    const int n = 1 << d;
    const std::uint64_t rounds = 1 + rng() % 4;
    const auto trace = zigzag_trace(d, rounds, rng());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int ka = 1 + static_cast<int>(rng() % (n / 2));
    const std::vector<int> a(order.begin(), order.begin() + ka);
    const std::vector<int> b(order.begin() + ka, order.begin() + ka + 1 + rng() % (n - ka));
    const CardSet ca(a.begin(), a.end()), cb(b.begin(), b.end());
    const auto got = antisocial_count(DeckState::identity(d), trace, ca, cb, 2 * d);
    EXPECT_EQ(got, antisocial_oracle(d, trace.coins(), rounds, a, b));
  }
}

TEST(Antisocial, PartialRoundIgnoredAndOverlapRejected) {
  CoinStream coins(3);
  auto run = run_schedule(DeckState::identity(2), Schedule::zigzag(), 2, coins);
  Trace partial;
  for (std::size_t i = 0; i < run.trace.size() - 2; ++i) {
    const auto& e = run.trace.entries()[i];
    partial.record(e.step, e.direction, e.lower, e.coin);
  }
  EXPECT_EQ(antisocial_count(DeckState::identity(2), partial, {0}, {1}, 4).size(), 1u);
  EXPECT_THROW(antisocial_count(DeckState::identity(2), run.trace, {0, 1}, {1}, 4), contract_error);
}

TEST(Avoids, Windows) {
  EXPECT_TRUE(avoids({8, 8, 8}, 8, 3));
  EXPECT_FALSE(avoids({8, 7, 8}, 8, 2));  // 7 = 7k/8 is not above it
  EXPECT_TRUE(avoids({0, 8, 8}, 8, 2));
  EXPECT_FALSE(avoids({}, 1, 1));
  EXPECT_THROW(avoids({1}, 1, 0), contract_error);
}

TEST(Mixes, AllTailsTraceAtD2) {
  // With no swaps, card 0 meets cards 2 and 1 and never card 3.
  ConstantCoins tails{false};
  const auto trace = run_schedule(DeckState::identity(2), Schedule::zigzag(), 3, tails).trace;
  const auto start = DeckState::identity(2);
  EXPECT_TRUE(mixes({0, 1, 2, 3}, start, trace, 1, 4).mixes);
  const auto r = mixes({0, 3}, start, trace, 2, 4);
  EXPECT_FALSE(r.mixes);
  EXPECT_EQ(r.witness, (CardSet{0}));
  EXPECT_TRUE(r.exhaustive);
}

TEST(Mixes, ExhaustiveAgreesWithSampled) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto trace = zigzag_trace(2, 4, seed);
    const auto start = DeckState::identity(2);
    const CardSet s{0, 1, 2, 3};
    for (std::uint64_t window : {1u, 2u, 4u}) {
      const auto ex = mixes(s, start, trace, window, 4);
      MixesOptions opts;
      opts.seed = seed;
      opts.samples = 2'000;
      const auto sm = mixes_sampled(s, start, trace, window, 4, opts);
      EXPECT_EQ(ex.mixes, sm.mixes) << seed << " " << window;
      EXPECT_FALSE(sm.exhaustive);
    }
  }
}

TEST(Moments, ExactBoundAtD2) {
  for (const auto& [a, b] : std::vector<std::pair<CardSet, CardSet>>{{{0}, {1, 2}}, {{0, 3}, {1, 2}}, {{0}, {1, 2, 3}}}) {
    const auto rows = moment_bound_exact(2, a, b, {0.0, 0.5, 1.0, 2.0});
    for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.theta << ": " << r.lhs << " > " << r.bound;
    EXPECT_NEAR(rows[0].lhs, 1.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(moment_phi(0.25, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(free_fraction(3, {0, 1}), 0.75);
}

TEST(Moments, ExactAtD3AndMonteCarlo) {
  const CardSet a{0, 5, 6}, b{1, 2, 3, 4};
  for (const auto& r : moment_bound_exact(3, a, b, {0.25, 1.0})) EXPECT_TRUE(r.pass);
  for (const auto& r : moment_bound_mc(3, a, b, {0.25, 1.0}, 20'000, 5)) EXPECT_TRUE(r.pass);
  EXPECT_THROW(moment_bound_exact(3, {0}, {0}, {1.0}), contract_error);
}

TEST(Tail, BoundHolds) {
  CardSet a, b;
  for (CardId c = 0; c < 16; ++c) (c % 2 ? b : a).push_back(c);
  const auto r = tail_bound_check(4, a, b, 20'000, 8);
  EXPECT_TRUE(r.pass) << r.empirical << " vs " << r.bound;
  EXPECT_EQ(r.k, 8u);
  EXPECT_THROW(tail_bound_check(4, {0}, {1}, 10, 1), contract_error);  // p = 15/16
}

TEST(Decay, TraceShape) {
  const auto rows = red_decay_trace(2, 3, 2, 4, 2'000, 1);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].mean_z, 1.0);
  EXPECT_EQ(rows[0].mean_root_sharp, 1.0);
  EXPECT_EQ(rows[3].round, 6u);
  for (const auto& r : rows) {
    EXPECT_GE(r.pinkening_bound_fraction, 0.0);
    EXPECT_LE(r.pinkening_bound_fraction, 1.0);
  }
  EXPECT_LT(rows[4].mean_root_sharp, rows[0].mean_root_sharp);
}
