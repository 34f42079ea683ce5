#pragma once

// The chameleon process: the zigzag shuffle (K_1..K_d then K_d..K_1 per round)
// with cards colored red, white, pink or black.
//
// Whenever a ringing edge joins a red card and a white card, both turn pink.
// This happens whether or not that edge's coin swaps them. At the end of every
// `depink_period` rounds one fair coin recolors all pink cards red or all of
// them white. Black cards never change.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "thorp/coins.hpp"
#include "thorp/errors.hpp"
#include "thorp/evolving_sets.hpp"
#include "thorp/shuffle.hpp"
#include "thorp/stats.hpp"

namespace thorp {

enum class Color : std::uint8_t { black, white, red, pink };

inline const char* to_string(Color c) {
  switch (c) {
    case Color::black: return "black";
    case Color::white: return "white";
    case Color::red: return "red";
    case Color::pink: return "pink";
  }
  return "?";
}

/// Direction of step `step` (0-based) of the zigzag shuffle.
constexpr int zigzag_direction(int d, std::uint64_t step) {
  const auto s = static_cast<int>(step % (2 * static_cast<std::uint64_t>(d)));
  return s < d ? s + 1 : 2 * d - s;
}

struct ColorCounts {
  std::uint32_t black = 0, white = 0, red = 0, pink = 0;
};

struct ChameleonState {
  DeckState deck;
  std::vector<Color> color;  // indexed by card id
  std::uint32_t nonblack = 0;
  std::uint64_t steps_done = 0;
  std::uint64_t rounds_done = 0;
  std::uint64_t depink_period = 1;  // rounds

  int dimension() const { return deck.dimension(); }
  Color color_at(Position p) const { return color[deck.occupant(p)]; }

  ColorCounts counts() const {
    ColorCounts c;
    for (Color col : color) {
      switch (col) {
        case Color::black: ++c.black; break;
        case Color::white: ++c.white; break;
        case Color::red: ++c.red; break;
        case Color::pink: ++c.pink; break;
      }
    }
    return c;
  }

  /// W_n as a position bitmask (d <= 6).
  std::uint64_t nonblack_mask() const {
    std::uint64_t m = 0;
    for (Position p = 0; p < deck.size(); ++p)
      if (color_at(p) != Color::black) m |= std::uint64_t{1} << p;
    return m;
  }
};

/// cards = (x_1, ..., x_b): x_b red, the rest of the list white, others black.
inline ChameleonState cham_init(int d, const std::vector<CardId>& cards,
                                std::uint64_t depink_period, DeckState deck = {}) {
  check_dimension(d);
  if (deck.dimension() == 0) deck = DeckState::identity(d);
  require(deck.dimension() == d, "deck dimension mismatch");
  const auto b = static_cast<std::uint32_t>(cards.size());
  require(b > deck_size(d) / 2, "chameleon process needs b > 2^(d-1) nonblack cards");
  require(b <= deck_size(d), "more nonblack cards than cards");
  require(depink_period >= 1, "de-pinking period must be at least one round");
  ChameleonState s;
  s.deck = std::move(deck);
  s.color.assign(deck_size(d), Color::black);
  for (CardId c : cards) {
    require(c < deck_size(d), "unknown card id " + std::to_string(c));
    require(s.color[c] == Color::black, "duplicate card in chameleon card list");
    s.color[c] = Color::white;
  }
  s.color[cards.back()] = Color::red;
  s.nonblack = b;
  s.depink_period = depink_period;
  return s;
}

/// Cards 0..b-1 in order, so x_b = b - 1.
inline std::vector<CardId> first_cards(std::uint32_t b) {
  std::vector<CardId> cards(b);
  for (std::uint32_t i = 0; i < b; ++i) cards[i] = i;
  return cards;
}

/// Collective recoloring of every pink card.
inline void depink(ChameleonState& s, bool to_red) {
  for (Color& c : s.color)
    if (c == Color::pink) c = to_red ? Color::red : Color::white;
}

struct StepEvents {
  std::uint32_t pinkened = 0;
  bool depinked = false;
};

/// One K_j step of the zigzag schedule; draws the de-pinking coin when the
/// step closes a checkpoint round.
template <CoinSource Coins>
StepEvents cham_step_in_place(ChameleonState& s, Coins& coins, Trace* trace = nullptr) {
  const int d = s.dimension();
  const int j = zigzag_direction(d, s.steps_done);
  StepEvents ev;
  for_each_edge(d, j, [&](Position lower, Position upper) {
    Color& a = s.color[s.deck.occupant(lower)];
    Color& b = s.color[s.deck.occupant(upper)];
    if ((a == Color::red && b == Color::white) || (a == Color::white && b == Color::red)) {
      a = b = Color::pink;
      ev.pinkened += 2;
    }
    const bool heads = coins.next();
    if (trace) trace->record(s.steps_done, j, lower, heads);
    if (heads) s.deck.swap_positions(lower, upper);
  });
  ++s.steps_done;
  if (s.steps_done % (2 * static_cast<std::uint64_t>(d)) == 0) {
    ++s.rounds_done;
    if (s.rounds_done % s.depink_period == 0) {
      depink(s, coins.next());
      ev.depinked = true;
    }
  }
  return ev;
}

template <CoinSource Coins>
ChameleonState cham_step(ChameleonState s, Coins& coins) {
  cham_step_in_place(s, coins);
  return s;
}

/// 1 for a red card at x, 1/2 for a pink card, 0 otherwise.
inline double rho(const ChameleonState& s, Position x) {
  switch (s.color_at(x)) {
    case Color::red: return 1.0;
    case Color::pink: return 0.5;
    default: return 0.0;
  }
}

/// Z = sum over x of rho(x).
inline double red_mass(const ChameleonState& s) {
  const auto c = s.counts();
  return c.red + 0.5 * c.pink;
}

/// Number of de-pinking coins drawn during the first n steps.
inline std::uint64_t depink_draws(int d, std::uint64_t n, std::uint64_t period) {
  return (n / (2 * static_cast<std::uint64_t>(d))) / period;
}

// ---------------------------------------------------------------------------
// The identity P(X_n(x_b) = x | W) = E(rho_n(x) | W).
// Here n counts half-rounds of d steps (K_1..K_d or K_d..K_1); W is recorded
// after every step.

struct IdentityRow {
  std::uint64_t n = 0;
  Position x = 0;
  double card_probability = 0.0;  // P(X_n(x_b) = x)
  double mean_rho = 0.0;          // E rho_n(x)
  double gap = 0.0;
  double standard_error = 0.0;    // Monte Carlo only
  bool pass = false;
};

struct IdentityReport {
  CheckMode mode = CheckMode::exact;
  std::vector<IdentityRow> rows;
  double max_group_gap = 0.0;  // exact mode: worst per-W-trajectory gap
  std::uint64_t groups = 0;    // exact mode: W-trajectories seen, summed over n
  bool pass = true;
};

struct IdentityOptions {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  int coin_bit_cap = 22;
  double tolerance = 1e-12;
  double z_limit = 4.0;
};

inline IdentityReport verify_chameleon_identity(int d, std::uint32_t b, std::uint64_t n_max,
                                                std::uint64_t period, CheckMode mode,
                                                const IdentityOptions& options = {}) {
  const auto cards = first_cards(b);
  const CardId tracked = cards.back();
  const ChameleonState start = cham_init(d, cards, period);
  const std::uint32_t positions = deck_size(d);
  IdentityReport report;
  report.mode = mode;

  if (mode == CheckMode::exact) {
    require(d <= 6, "exact identity check needs d <= 6");
    for (std::uint64_t n = 0; n <= n_max; ++n) {
      const std::uint64_t steps = n * static_cast<std::uint64_t>(d);
      const std::uint64_t bits = steps * (positions / 2) + depink_draws(d, steps, period);
      if (bits > static_cast<std::uint64_t>(options.coin_bit_cap)) {
        throw size_error("exact chameleon identity at n=" + std::to_string(n) + " needs " +
                         std::to_string(bits) + " coin bits (cap " +
                         std::to_string(options.coin_bit_cap) + ")");
      }
      struct Group {
        double count = 0;
        std::vector<double> card, rho_sum;
      };
      std::map<std::vector<std::uint64_t>, Group> groups;
      std::vector<double> card_total(positions, 0.0), rho_total(positions, 0.0);
      for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << bits); ++pattern) {
        PatternCoins coins(pattern, static_cast<int>(bits));
        ChameleonState s = start;
        std::vector<std::uint64_t> key;
        for (std::uint64_t t = 0; t < steps; ++t) {
          cham_step_in_place(s, coins);
          key.push_back(s.nonblack_mask());
        }
        Group& g = groups[key];
        if (g.card.empty()) {
          g.card.assign(positions, 0.0);
          g.rho_sum.assign(positions, 0.0);
        }
        g.count += 1;
        const Position where = s.deck.position_of(tracked);
        g.card[where] += 1;
        card_total[where] += 1;
        for (Position x = 0; x < positions; ++x) {
          const double r = rho(s, x);
          g.rho_sum[x] += r;
          rho_total[x] += r;
        }
      }
      report.groups += groups.size();
      for (const auto& [key, g] : groups) {
        for (Position x = 0; x < positions; ++x) {
          const double gap = std::abs(g.card[x] - g.rho_sum[x]) / g.count;
          report.max_group_gap = std::max(report.max_group_gap, gap);
        }
      }
      const double total = static_cast<double>(std::uint64_t{1} << bits);
      for (Position x = 0; x < positions; ++x) {
        IdentityRow row;
        row.n = n;
        row.x = x;
        row.card_probability = card_total[x] / total;
        row.mean_rho = rho_total[x] / total;
        row.gap = std::abs(row.card_probability - row.mean_rho);
        row.pass = row.gap <= options.tolerance;
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
      }
    }
    report.pass = report.pass && report.max_group_gap <= options.tolerance;
    return report;
  }

  // Monte Carlo: the two sides come from disjoint seed families.
  std::vector<std::vector<RunningStat>> card(n_max + 1, std::vector<RunningStat>(positions));
  std::vector<std::vector<RunningStat>> rho_stat(n_max + 1, std::vector<RunningStat>(positions));
  for (std::uint64_t t = 0; t < options.trials; ++t) {
    CoinStream coins_a(derive_seed(options.seed, 2 * t));
    CoinStream coins_b(derive_seed(options.seed, 2 * t + 1));
    ChameleonState sa = start, sb = start;
    for (std::uint64_t n = 0;; ++n) {
      const Position where = sa.deck.position_of(tracked);
      for (Position x = 0; x < positions; ++x) {
        card[n][x].add(x == where ? 1.0 : 0.0);
        rho_stat[n][x].add(rho(sb, x));
      }
      if (n == n_max) break;
      for (int t = 0; t < d; ++t) {
        cham_step_in_place(sa, coins_a);
        cham_step_in_place(sb, coins_b);
      }
    }
  }
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    for (Position x = 0; x < positions; ++x) {
      IdentityRow row;
      row.n = n;
      row.x = x;
      row.card_probability = card[n][x].mean();
      row.mean_rho = rho_stat[n][x].mean();
      row.gap = std::abs(row.card_probability - row.mean_rho);
      row.standard_error = std::hypot(card[n][x].standard_error(), rho_stat[n][x].standard_error());
      row.pass = row.gap <= options.z_limit * row.standard_error + options.tolerance;
      report.pass = report.pass && row.pass;
      report.rows.push_back(row);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Red mass.

struct RedMassRow {
  std::uint64_t round = 0;
  double mean_z = 0.0;
  double standard_error = 0.0;
  bool pass = false;  // |mean - 1| <= z_limit * se
};

struct RedMassReport {
  bool conserved_before_first_depink = true;  // sum of rho == 1 at every step
  std::vector<RedMassRow> rows;                // one per de-pinking checkpoint
  bool pass = true;
};

inline RedMassReport red_mass_check(int d, std::uint32_t b, std::uint64_t period,
                                    std::uint64_t checkpoints, std::uint64_t trials,
                                    std::uint64_t seed, double z_limit = 4.0) {
  const ChameleonState start = cham_init(d, first_cards(b), period);
  std::vector<RunningStat> stats(checkpoints);
  RedMassReport report;
  const std::uint64_t steps = checkpoints * period * 2 * static_cast<std::uint64_t>(d);
  for (std::uint64_t t = 0; t < trials; ++t) {
    CoinStream coins(derive_seed(seed, t));
    ChameleonState s = start;
    std::uint64_t checkpoint = 0;
    for (std::uint64_t step = 0; step < steps; ++step) {
      const StepEvents ev = cham_step_in_place(s, coins);
      if (ev.depinked) {
        stats[checkpoint++].add(red_mass(s));
      } else if (checkpoint == 0 && red_mass(s) != 1.0) {
        report.conserved_before_first_depink = false;
      }
    }
  }
  report.pass = report.conserved_before_first_depink;
  for (std::uint64_t c = 0; c < checkpoints; ++c) {
    RedMassRow row;
    row.round = (c + 1) * period;
    row.mean_z = stats[c].mean();
    row.standard_error = stats[c].standard_error();
    row.pass = std::abs(row.mean_z - 1.0) <= z_limit * row.standard_error + 1e-12;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Antisocial cards, avoidance and mixing.

using CardSet = std::vector<CardId>;

namespace detail {

inline std::vector<char> membership(const CardSet& cards, std::uint32_t n) {
  std::vector<char> m(n, 0);
  for (CardId c : cards) {
    require(c < n, "unknown card id " + std::to_string(c));
    m[c] = 1;
  }
  return m;
}

// Replays `trace` from `start`; calls meet(round, card_a, card_b) for every
// ringing edge before its coin is applied. Only complete rounds are visited.
template <class Meet>
std::uint64_t replay_meetings(const DeckState& start, const Trace& trace,
                              std::uint64_t steps_per_round, Meet&& meet) {
  require(steps_per_round >= 1, "steps per round must be positive");
  DeckState deck = start;
  const auto& entries = trace.entries();
  std::uint64_t step_count = 0;
  std::uint64_t last_step = UINT64_MAX;
  for (const auto& e : entries) {
    if (e.step != last_step) {
      ++step_count;
      last_step = e.step;
    }
  }
  const std::uint64_t rounds = step_count / steps_per_round;
  std::uint64_t step_ordinal = 0;
  last_step = UINT64_MAX;
  for (const auto& e : entries) {
    if (e.step != last_step) {
      if (last_step != UINT64_MAX) ++step_ordinal;
      last_step = e.step;
    }
    const std::uint64_t round = step_ordinal / steps_per_round;
    if (round >= rounds) break;
    const Position upper = e.lower | direction_mask(deck.dimension(), e.direction);
    meet(round, deck.occupant(e.lower), deck.occupant(upper));
    if (e.coin) deck.swap_positions(e.lower, upper);
  }
  return rounds;
}

}  // namespace detail

/// Z(A, B, j) for every complete round j of the trace: the number of cards of
/// A that never sit across a ringing edge from a card of B during round j.
inline std::vector<std::uint32_t> antisocial_count(const DeckState& start, const Trace& trace,
                                                   const CardSet& a, const CardSet& b,
                                                   std::uint64_t steps_per_round) {
  const auto in_a = detail::membership(a, start.size());
  const auto in_b = detail::membership(b, start.size());
  for (CardId c : a) require(!in_b[c], "antisocial_count needs disjoint A and B");
  std::vector<std::vector<char>> social;
  const auto rounds = detail::replay_meetings(
      start, trace, steps_per_round, [&](std::uint64_t round, CardId u, CardId v) {
        if (social.size() <= round) social.resize(round + 1, std::vector<char>(start.size(), 0));
        if (in_a[u] && in_b[v]) social[round][u] = 1;
        if (in_a[v] && in_b[u]) social[round][v] = 1;
      });
  std::vector<std::uint32_t> z(rounds, static_cast<std::uint32_t>(a.size()));
  for (std::uint64_t r = 0; r < rounds && r < social.size(); ++r) {
    for (CardId c : a) z[r] -= social[r][c] ? 1 : 0;
  }
  return z;
}

/// Z > 7k/8 for `window` consecutive rounds somewhere in `counts`.
inline bool avoids(const std::vector<std::uint32_t>& counts, std::uint32_t k, std::uint64_t window) {
  require(window >= 1, "avoidance window must be at least one round");
  std::uint64_t run = 0;
  for (auto z : counts) {
    run = (8ULL * z > 7ULL * k) ? run + 1 : 0;
    if (run >= window) return true;
  }
  return false;
}

struct MixesOptions {
  std::size_t exhaustive_limit = 20;
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 1;
};

struct MixesResult {
  bool mixes = true;
  CardSet witness;  // an A that avoids S - A, when S does not mix
  bool exhaustive = true;
};

/// Whether no split S = A + B with |A| <= |S|/2 has A avoiding B.
inline MixesResult mixes(const CardSet& s, const DeckState& start, const Trace& trace,
                         std::uint64_t window, std::uint64_t steps_per_round,
                         const MixesOptions& options = {}) {
  require(window >= 1, "avoidance window must be at least one round");
  require(!s.empty() && s.size() <= 64, "mixes supports 1 <= |S| <= 64");
  std::vector<int> index(start.size(), -1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(s[i] < start.size(), "unknown card id");
    require(index[s[i]] < 0, "duplicate card in S");
    index[s[i]] = static_cast<int>(i);
  }
  std::vector<std::vector<std::uint64_t>> met;
  const auto rounds = detail::replay_meetings(
      start, trace, steps_per_round, [&](std::uint64_t round, CardId u, CardId v) {
        if (met.size() <= round) met.resize(round + 1, std::vector<std::uint64_t>(s.size(), 0));
        if (index[u] >= 0 && index[v] >= 0) {
          met[round][index[u]] |= std::uint64_t{1} << index[v];
          met[round][index[v]] |= std::uint64_t{1} << index[u];
        }
      });
  met.resize(rounds, std::vector<std::uint64_t>(s.size(), 0));
  const std::size_t n = s.size();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;

  auto split_avoids = [&](std::uint64_t a_mask) {
    const std::uint64_t b_mask = all & ~a_mask;
    const auto k = static_cast<std::uint32_t>(__builtin_popcountll(a_mask));
    std::uint64_t run = 0;
    for (std::uint64_t r = 0; r < rounds; ++r) {
      std::uint32_t z = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((a_mask >> i) & 1ULL) && (met[r][i] & b_mask) == 0) ++z;
      run = (8ULL * z > 7ULL * k) ? run + 1 : 0;
      if (run >= window) return true;
    }
    return false;
  };
  auto witness_of = [&](std::uint64_t a_mask) {
    CardSet w;
    for (std::size_t i = 0; i < n; ++i)
      if ((a_mask >> i) & 1ULL) w.push_back(s[i]);
    return w;
  };

  MixesResult result;
  if (n <= options.exhaustive_limit) {
    for (std::uint64_t a_mask = 1; a_mask <= all && a_mask != 0; ++a_mask) {
      if (2 * static_cast<std::size_t>(__builtin_popcountll(a_mask)) > n) continue;
      if (split_avoids(a_mask)) {
        result.mixes = false;
        result.witness = witness_of(a_mask);
        return result;
      }
      if (a_mask == all) break;
    }
    return result;
  }
  result.exhaustive = false;
  if (n < 2) return result;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> size_pick(1, n / 2);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::uint64_t t = 0; t < options.samples; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t k = size_pick(rng);
    std::uint64_t a_mask = 0;
    for (std::size_t i = 0; i < k; ++i) a_mask |= std::uint64_t{1} << order[i];
    if (split_avoids(a_mask)) {
      result.mixes = false;
      result.witness = witness_of(a_mask);
      return result;
    }
  }
  return result;
}

/// Same as mixes() but only over sampled splits, for cross-checking.
inline MixesResult mixes_sampled(const CardSet& s, const DeckState& start, const Trace& trace,
                                 std::uint64_t window, std::uint64_t steps_per_round,
                                 MixesOptions options = {}) {
  options.exhaustive_limit = 0;
  return mixes(s, start, trace, window, steps_per_round, options);
}

// ---------------------------------------------------------------------------
// Large deviations for the antisocial count over one Thorp round K_1..K_d.

/// Phi_p(theta) = 1 - p + p e^theta.
inline double moment_phi(double p, double theta) { return 1.0 - p + p * std::exp(theta); }

/// p = 1 - |B| / 2^d.
inline double free_fraction(int d, const CardSet& b) {
  return 1.0 - static_cast<double>(b.size()) / static_cast<double>(deck_size(d));
}

namespace detail {

struct RoundOutcome {
  std::uint32_t antisocial = 0;
  std::vector<std::uint64_t> b_trajectory;  // positions of B after each step
};

template <CoinSource Coins>
RoundOutcome thorp_round_antisocial(DeckState deck, const std::vector<char>& in_a,
                                    const std::vector<char>& in_b, std::uint32_t k, Coins& coins) {
  const int d = deck.dimension();
  std::vector<char> social(deck.size(), 0);
  RoundOutcome out;
  for (int j = 1; j <= d; ++j) {
    for_each_edge(d, j, [&](Position lower, Position upper) {
      const CardId u = deck.occupant(lower), v = deck.occupant(upper);
      if (in_a[u] && in_b[v]) social[u] = 1;
      if (in_a[v] && in_b[u]) social[v] = 1;
      if (coins.next()) deck.swap_positions(lower, upper);
    });
    std::uint64_t mask = 0;
    for (Position p = 0; p < deck.size() && p < 64; ++p)
      if (in_b[deck.occupant(p)]) mask |= std::uint64_t{1} << p;
    out.b_trajectory.push_back(mask);
  }
  out.antisocial = k;
  for (CardId c = 0; c < deck.size(); ++c)
    if (in_a[c] && social[c]) --out.antisocial;
  return out;
}

}  // namespace detail

struct MomentRow {
  double theta = 0.0;
  double lhs = 0.0;  // E[e^{theta Z}] (exact: worst B-trajectory group)
  double standard_error = 0.0;
  double bound = 0.0;  // Phi_p(theta)^k
  bool pass = false;
};

/// Exact E[e^{theta Z} | B-trajectory] for every trajectory, over all
/// d 2^(d-1) coins of one round; reports the worst group per theta.
inline std::vector<MomentRow> moment_bound_exact(int d, const CardSet& a, const CardSet& b,
                                                 const std::vector<double>& thetas,
                                                 int coin_bit_cap = 20) {
  const DeckState start = DeckState::identity(d);
  const auto in_a = detail::membership(a, start.size());
  const auto in_b = detail::membership(b, start.size());
  for (CardId c : a) require(!in_b[c], "moment bound needs disjoint A and B");
  const int bits = d * static_cast<int>(deck_size(d) / 2);
  if (bits > coin_bit_cap) throw size_error("exact moment check needs too many coin bits");
  const auto k = static_cast<std::uint32_t>(a.size());
  std::map<std::vector<std::uint64_t>, std::vector<std::uint32_t>> groups;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << bits); ++pattern) {
    PatternCoins coins(pattern, bits);
    auto out = detail::thorp_round_antisocial(start, in_a, in_b, k, coins);
    groups[out.b_trajectory].push_back(out.antisocial);
  }
  const double p = free_fraction(d, b);
  std::vector<MomentRow> rows;
  for (double theta : thetas) {
    require(theta >= 0.0, "theta must be nonnegative");
    MomentRow row;
    row.theta = theta;
    row.bound = std::pow(moment_phi(p, theta), static_cast<double>(k));
    for (const auto& [key, zs] : groups) {
      double sum = 0.0;
      for (auto z : zs) sum += std::exp(theta * z);
      row.lhs = std::max(row.lhs, sum / static_cast<double>(zs.size()));
    }
    row.pass = row.lhs <= row.bound + 1e-12;
    rows.push_back(row);
  }
  return rows;
}

/// Monte Carlo estimate of E[e^{theta Z}] (unconditional).
inline std::vector<MomentRow> moment_bound_mc(int d, const CardSet& a, const CardSet& b,
                                              const std::vector<double>& thetas,
                                              std::uint64_t trials, std::uint64_t seed,
                                              double z_limit = 4.0) {
  const DeckState start = DeckState::identity(d);
  const auto in_a = detail::membership(a, start.size());
  const auto in_b = detail::membership(b, start.size());
  for (CardId c : a) require(!in_b[c], "moment bound needs disjoint A and B");
  const auto k = static_cast<std::uint32_t>(a.size());
  std::vector<RunningStat> stats(thetas.size());
  for (std::uint64_t t = 0; t < trials; ++t) {
    CoinStream coins(derive_seed(seed, t));
    const auto z = detail::thorp_round_antisocial(start, in_a, in_b, k, coins).antisocial;
    for (std::size_t i = 0; i < thetas.size(); ++i) stats[i].add(std::exp(thetas[i] * z));
  }
  const double p = free_fraction(d, b);
  std::vector<MomentRow> rows;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    require(thetas[i] >= 0.0, "theta must be nonnegative");
    MomentRow row;
    row.theta = thetas[i];
    row.lhs = stats[i].mean();
    row.standard_error = stats[i].standard_error();
    row.bound = std::pow(moment_phi(p, thetas[i]), static_cast<double>(k));
    row.pass = row.lhs <= row.bound + z_limit * row.standard_error + 1e-12;
    rows.push_back(row);
  }
  return rows;
}

struct TailResult {
  std::uint32_t k = 0;
  double p = 0.0;
  double empirical = 0.0;  // P(Z > 7k/8)
  double standard_error = 0.0;
  double bound = 0.0;      // e^{-k/64}
  bool pass = false;
};

inline TailResult tail_bound_check(int d, const CardSet& a, const CardSet& b, std::uint64_t trials,
                                   std::uint64_t seed, double z_limit = 4.0) {
  const double p = free_fraction(d, b);
  require(p <= 0.75, "tail bound needs p = 1 - |B|/2^d <= 3/4");
  const DeckState start = DeckState::identity(d);
  const auto in_a = detail::membership(a, start.size());
  const auto in_b = detail::membership(b, start.size());
  for (CardId c : a) require(!in_b[c], "tail bound needs disjoint A and B");
  const auto k = static_cast<std::uint32_t>(a.size());
  RunningStat stat;
  for (std::uint64_t t = 0; t < trials; ++t) {
    CoinStream coins(derive_seed(seed, t));
    const auto z = detail::thorp_round_antisocial(start, in_a, in_b, k, coins).antisocial;
    stat.add(8ULL * z > 7ULL * k ? 1.0 : 0.0);
  }
  TailResult r;
  r.k = k;
  r.p = p;
  r.empirical = stat.mean();
  r.standard_error = stat.standard_error();
  r.bound = std::exp(-static_cast<double>(k) / 64.0);
  r.pass = r.empirical <= r.bound + z_limit * r.standard_error;
  return r;
}

// ---------------------------------------------------------------------------
// Decay of the symmetrized red mass.

struct DecayRow {
  std::uint64_t checkpoint = 0;
  std::uint64_t round = 0;
  double mean_z = 0.0;
  double mean_root_sharp = 0.0;  // E sqrt(min(Z, b - Z))
  double standard_error = 0.0;
  double pinkening_bound_fraction = 0.0;  // P >= |A_n| / (8d) over the window
};

/// Checkpoint 0 is the start; checkpoint c follows the c-th de-pinking.
inline std::vector<DecayRow> red_decay_trace(int d, std::uint32_t b, std::uint64_t period,
                                             std::uint64_t checkpoints, std::uint64_t trials,
                                             std::uint64_t seed) {
  require(period >= 1, "de-pinking period must be at least one round");
  const ChameleonState start = cham_init(d, first_cards(b), period);
  std::vector<RunningStat> z_stat(checkpoints + 1), root_stat(checkpoints + 1);
  std::vector<RunningStat> bound_stat(checkpoints + 1);
  const double kb = static_cast<double>(b);
  auto record = [&](std::uint64_t c, const ChameleonState& s) {
    const double z = red_mass(s);
    z_stat[c].add(z);
    root_stat[c].add(std::sqrt(std::max(0.0, std::min(z, kb - z))));
  };
  for (std::uint64_t t = 0; t < trials; ++t) {
    CoinStream coins(derive_seed(seed, t));
    ChameleonState s = start;
    record(0, s);
    for (std::uint64_t c = 1; c <= checkpoints; ++c) {
      const auto counts = s.counts();
      const double z = red_mass(s);
      const double a_size = z <= kb / 2 ? counts.red : counts.white;
      std::uint32_t pinked = 0;
      while (true) {
        const StepEvents ev = cham_step_in_place(s, coins);
        pinked += ev.pinkened;
        if (ev.depinked) break;
      }
      bound_stat[c].add(static_cast<double>(pinked) >= a_size / (8.0 * d) ? 1.0 : 0.0);
      record(c, s);
    }
  }
  std::vector<DecayRow> rows;
  for (std::uint64_t c = 0; c <= checkpoints; ++c) {
    DecayRow row;
    row.checkpoint = c;
    row.round = c * period;
    row.mean_z = z_stat[c].mean();
    row.mean_root_sharp = root_stat[c].mean();
    row.standard_error = root_stat[c].standard_error();
    row.pinkening_bound_fraction = c == 0 ? 1.0 : bound_stat[c].mean();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace thorp
