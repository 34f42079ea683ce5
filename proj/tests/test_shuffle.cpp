#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "thorp/exact_kernel.hpp"
#include "thorp/shuffle.hpp"

using namespace thorp;

TEST(Hypercube, CoordinateConvention) {
  // (1,0,0) -> shift -> (0,0,1)
  EXPECT_EQ(rotate_left(0b100, 3), 0b001u);
  EXPECT_EQ(rotate_left(0b011, 3), 0b110u);
  EXPECT_EQ(rotate_left(1, 1), 1u);
  EXPECT_EQ(direction_mask(3, 1), 0b100u);
  EXPECT_EQ(direction_mask(3, 3), 0b001u);
  EXPECT_EQ(coordinate(0b100, 3, 1), 1);
  EXPECT_EQ(coordinate(0b100, 3, 3), 0);
}

TEST(Hypercube, EdgesAscending) {
  std::vector<Position> lows;
  for_each_edge(3, 2, [&](Position lo, Position hi) {
    EXPECT_EQ(lo ^ hi, 0b010u);
    lows.push_back(lo);
  });
  EXPECT_EQ(lows, (std::vector<Position>{0, 1, 4, 5}));
}

TEST(Deck, RejectsBadInput) {
  EXPECT_THROW(DeckState::identity(0), contract_error);
  EXPECT_THROW(DeckState::from_occupants(2, {0, 1, 1, 3}), contract_error);
  EXPECT_THROW(DeckState::from_occupants(2, {0, 1, 2}), contract_error);
  auto deck = DeckState::identity(2);
  ConstantCoins heads{true};
  EXPECT_THROW(apply_kj(deck, 3, heads), contract_error);
  EXPECT_THROW(apply_kj(deck, 0, heads), contract_error);
}

TEST(Deck, KjAllHeadsIsInvolution) {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 5; ++d) {
    std::vector<CardId> occ(deck_size(d));
    std::iota(occ.begin(), occ.end(), 0);
    std::shuffle(occ.begin(), occ.end(), rng);
    const auto deck = DeckState::from_occupants(d, occ);
    for (int j = 1; j <= d; ++j) {
      ConstantCoins heads{true};
      const auto once = apply_kj(deck, j, heads);
      EXPECT_TRUE(once.is_bijection());
      EXPECT_FALSE(once == deck);
      EXPECT_EQ(apply_kj(once, j, heads), deck);
    }
  }
}

TEST(Deck, AllTailsIsIdentity) {
  ConstantCoins tails{false};
  const auto deck = DeckState::identity(4);
  EXPECT_EQ(apply_kj(deck, 2, tails), deck);
}

TEST(Deck, ClassicPassAtDimensionOneIsOneStep) {
  for (bool coin : {false, true}) {
    ConstantCoins a{coin}, b{coin};
    EXPECT_EQ(classic_thorp_pass(DeckState::identity(1), a), apply_kj(DeckState::identity(1), 1, b));
  }
}

TEST(Deck, ShiftMovesCardsAlongRotation) {
  auto deck = DeckState::identity(3);
  deck.cyclic_shift();
  for (CardId c = 0; c < 8; ++c) EXPECT_EQ(deck.position_of(c), rotate_left(c, 3));
}

TEST(Schedule, ParseAndName) {
  for (std::string s : {"thorp", "zigzag", "classic", "truncated:2", "step:5"})
    EXPECT_EQ(Schedule::parse(s).name(), s);
  EXPECT_THROW(Schedule::parse("riffle"), contract_error);
  EXPECT_THROW(Schedule::parse("truncated:x"), contract_error);
  EXPECT_THROW(Schedule::truncated(4).validate(3), contract_error);
}

TEST(Schedule, Directions) {
  EXPECT_EQ(Schedule::zigzag().directions(1), (std::vector<int>{1, 1}));
  EXPECT_EQ(Schedule::zigzag().directions(3), (std::vector<int>{1, 2, 3, 3, 2, 1}));
  EXPECT_EQ(Schedule::truncated(3).directions(3), Schedule::thorp().directions(3));
  EXPECT_EQ(Schedule::single_step(4).directions(3, 0), (std::vector<int>{2}));
}

TEST(Schedule, ZeroRoundsLeavesDeck) {
  CoinStream coins(9);
  const auto run = run_schedule(DeckState::identity(3), Schedule::zigzag(), 0, coins);
  EXPECT_EQ(run.deck, DeckState::identity(3));
  EXPECT_TRUE(run.trace.empty());
}

TEST(Schedule, TraceReplayIsBitExact) {
  CoinStream a(42), b(42);
  const auto ra = run_schedule(DeckState::identity(4), Schedule::zigzag(), 7, a);
  const auto rb = run_schedule(DeckState::identity(4), Schedule::zigzag(), 7, b);
  EXPECT_EQ(ra.trace, rb.trace);
  EXPECT_EQ(ra.deck, rb.deck);
  EXPECT_EQ(ra.trace.size(), 7u * 8u * 8u);

  std::stringstream text;
  ra.trace.write_text(text);
  const auto back = Trace::read_text(text);
  EXPECT_EQ(back, ra.trace);

  ReplayCoins replay(back.coins());
  const auto rc = run_schedule(DeckState::identity(4), Schedule::zigzag(), 7, replay);
  EXPECT_EQ(rc.deck, ra.deck);
}

TEST(Schedule, MalformedTraceRejected) {
  std::stringstream bad("0 1 0 2\n");
  EXPECT_THROW(Trace::read_text(bad), contract_error);
  std::stringstream worse("0 1\n");
  EXPECT_THROW(Trace::read_text(worse), contract_error);
}

TEST(Schedule, DifferentSeedsDiffer) {
  CoinStream a(1), b(2);
  EXPECT_NE(run_schedule(DeckState::identity(4), Schedule::thorp(), 3, a).trace,
            run_schedule(DeckState::identity(4), Schedule::thorp(), 3, b).trace);
}

TEST(Coins, StreamIsBalanced) {
  CoinStream c(5);
  int heads = 0;
  for (int i = 0; i < 100'000; ++i) heads += c.next() ? 1 : 0;
  EXPECT_NEAR(heads / 100'000.0, 0.5, 4 * 0.5 / std::sqrt(100'000.0));
}

TEST(ProjectSet, Basics) {
  const auto deck = DeckState::identity(2);
  EXPECT_EQ(project_set(deck, {0, 1}), (std::vector<Position>{0b00, 0b01}));
  EXPECT_EQ(project_set(deck, {3, 2, 1, 0}).size(), 4u);
  EXPECT_THROW(project_set(deck, {4}), contract_error);
  EXPECT_THROW(project_set(deck, {1, 1}), contract_error);
  EXPECT_THROW(project_set(deck, {}), contract_error);
}

TEST(ProjectSet, SetStepForcedMove) {
  ConstantCoins heads{true};
  EXPECT_EQ(set_step({0b00}, 2, 1, heads), (std::vector<Position>{0b10}));
  CoinStream c(1);
  EXPECT_EQ(set_step({0, 1, 2, 3}, 2, 2, c), (std::vector<Position>{0, 1, 2, 3}));
}

TEST(ProjectSet, SetStepMatchesDeckStep) {
  std::mt19937_64 rng(11);
  const int d = 3;
  for (int t = 0; t < 1000; ++t) {
    std::vector<CardId> occ(8);
    std::iota(occ.begin(), occ.end(), 0);
    std::shuffle(occ.begin(), occ.end(), rng);
    const auto deck = DeckState::from_occupants(d, occ);
    std::vector<CardId> cards;
    for (CardId c = 0; c < 8; ++c)
      if (rng() % 2) cards.push_back(c);
    if (cards.empty()) cards.push_back(static_cast<CardId>(rng() % 8));
    const int j = static_cast<int>(rng() % 3) + 1;
    CoinStream c1(rng());
    CoinStream c2 = c1;
    const auto moved = apply_kj(deck, j, c1);
    const auto set = set_step(project_set(deck, cards), d, j, c2);
    ASSERT_EQ(set, project_set(moved, cards));
    ASSERT_EQ(set.size(), cards.size());
  }
}

TEST(Classic, DPassesEqualOneRound) {
  for (int d = 2; d <= 3; ++d) {
    const auto spec = StateSpaceSpec::full(d);
    const auto round = exact_distribution(spec, 0, Schedule::thorp(), 1);
    const auto passes = exact_distribution(spec, 0, Schedule::classic(), d);
    EXPECT_EQ(round, passes) << "d=" << d;
  }
}

TEST(Classic, TwoPassesMatchOracleAtD2) {
  // Oracle: classic pass = ring direction 1 then rotate, written directly.
  const int d = 2;
  std::map<oracle::Deck, double> dist{{{0, 1, 2, 3}, 1.0}};
  for (int pass = 0; pass < d; ++pass) {
    std::map<oracle::Deck, double> next;
    for (const auto& [deck, w] : dist)
      for (std::uint64_t pat = 0; pat < 4; ++pat) {
        auto rung = oracle::play(deck, d, {1}, pat);
        oracle::Deck shifted(4);
        for (int p = 0; p < 4; ++p) shifted[((p << 1) | (p >> 1)) & 3] = rung[p];
        next[shifted] += w / 4;
      }
    dist = next;
  }
  std::map<oracle::Deck, double> round;
  for (std::uint64_t pat = 0; pat < 16; ++pat) round[oracle::play({0, 1, 2, 3}, d, {1, 2}, pat)] += 1.0 / 16;
  EXPECT_EQ(dist, round);
}
