#pragma once

// Thorp shuffle dynamics on the hypercube {0,1}^d.
//
// Position index i encodes (x_1, ..., x_d) with x_1 the most significant bit,
// so coordinate j flips under XOR with 1 << (d - j) and the classic cyclic
// shift (x_1, ..., x_d) -> (x_2, ..., x_d, x_1) is a rotate-left of i.
//
// Within one K_j step every direction-j edge rings; the coin of each edge is
// drawn in ascending order of its lower endpoint.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "thorp/coins.hpp"
#include "thorp/errors.hpp"

namespace thorp {

using Position = std::uint32_t;
using CardId = std::uint32_t;

inline constexpr int kMaxDimension = 24;

inline void check_dimension(int d) {
  require(d >= 1 && d <= kMaxDimension, "dimension d must be in [1, 24], got " + std::to_string(d));
}

inline void check_direction(int d, int j) {
  require(j >= 1 && j <= d,
          "direction j must be in [1, " + std::to_string(d) + "], got " + std::to_string(j));
}

constexpr std::uint32_t deck_size(int d) { return std::uint32_t{1} << d; }

constexpr std::uint32_t direction_mask(int d, int j) { return std::uint32_t{1} << (d - j); }

/// Coordinate x_i (1-based, x_1 most significant) of a position.
constexpr int coordinate(Position p, int d, int i) { return static_cast<int>((p >> (d - i)) & 1U); }

/// (x_1, ..., x_d) -> (x_2, ..., x_d, x_1).
constexpr Position rotate_left(Position p, int d) {
  const std::uint32_t mask = deck_size(d) - 1;
  return ((p << 1) | (p >> (d - 1))) & mask;
}

/// Calls fn(lower, upper) for every direction-j edge, ascending in lower.
template <class Fn>
void for_each_edge(int d, int j, Fn&& fn) {
  const std::uint32_t mask = direction_mask(d, j);
  const std::uint32_t n = deck_size(d);
  for (Position lower = 0; lower < n; ++lower) {
    if ((lower & mask) == 0) fn(lower, lower | mask);
  }
}

// Bijection between the 2^d positions and card ids. Both directions are kept
// so X_n(card) and the occupant of a position are O(1).
class DeckState {
 public:
  DeckState() = default;

  static DeckState identity(int d) {
    check_dimension(d);
    DeckState deck;
    deck.d_ = d;
    deck.occupant_.resize(deck_size(d));
    std::iota(deck.occupant_.begin(), deck.occupant_.end(), CardId{0});
    deck.position_ = deck.occupant_;
    return deck;
  }

  static DeckState from_occupants(int d, std::vector<CardId> occupants) {
    check_dimension(d);
    require(occupants.size() == deck_size(d), "occupant array must have 2^d entries");
    DeckState deck;
    deck.d_ = d;
    deck.position_.assign(occupants.size(), deck_size(d));
    for (Position p = 0; p < occupants.size(); ++p) {
      const CardId c = occupants[p];
      require(c < occupants.size() && deck.position_[c] == deck_size(d),
              "occupant array is not a bijection");
      deck.position_[c] = p;
    }
    deck.occupant_ = std::move(occupants);
    return deck;
  }

  int dimension() const { return d_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(occupant_.size()); }
  CardId occupant(Position p) const { return occupant_[p]; }
  Position position_of(CardId c) const { return position_[c]; }
  const std::vector<CardId>& occupants() const { return occupant_; }
  const std::vector<Position>& positions() const { return position_; }

  void swap_positions(Position a, Position b) {
    std::swap(occupant_[a], occupant_[b]);
    position_[occupant_[a]] = a;
    position_[occupant_[b]] = b;
  }

  /// Moves the card at p to rotate_left(p) for every p.
  void cyclic_shift() {
    std::vector<CardId> next(occupant_.size());
    for (Position p = 0; p < occupant_.size(); ++p) next[rotate_left(p, d_)] = occupant_[p];
    occupant_ = std::move(next);
    for (Position p = 0; p < occupant_.size(); ++p) position_[occupant_[p]] = p;
  }

  bool is_bijection() const {
    if (occupant_.size() != deck_size(d_) || position_.size() != occupant_.size()) return false;
    for (Position p = 0; p < occupant_.size(); ++p) {
      if (occupant_[p] >= occupant_.size() || position_[occupant_[p]] != p) return false;
    }
    return true;
  }

  friend bool operator==(const DeckState& a, const DeckState& b) {
    return a.d_ == b.d_ && a.occupant_ == b.occupant_;
  }

 private:
  int d_ = 0;
  std::vector<CardId> occupant_;
  std::vector<Position> position_;
};

struct TraceEntry {
  std::uint64_t step = 0;
  int direction = 0;
  Position lower = 0;
  bool coin = false;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

// Every ringing edge's coin, in draw order. Text form is one
// "step direction lower coin" line per entry.
class Trace {
 public:
  void record(std::uint64_t step, int direction, Position lower, bool coin) {
    entries_.push_back({step, direction, lower, coin});
  }

  const std::vector<TraceEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<bool> coins() const {
    std::vector<bool> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.coin);
    return out;
  }

  void write_text(std::ostream& os) const {
    for (const auto& e : entries_) {
      os << e.step << ' ' << e.direction << ' ' << e.lower << ' ' << (e.coin ? 1 : 0) << '\n';
    }
  }

  static Trace read_text(std::istream& is) {
    Trace trace;
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      TraceEntry e;
      int coin = 0;
      if (!(ls >> e.step >> e.direction >> e.lower >> coin) || (coin != 0 && coin != 1)) {
        throw contract_error("malformed trace line: " + line);
      }
      e.coin = coin == 1;
      trace.entries_.push_back(e);
    }
    return trace;
  }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<TraceEntry> entries_;
};

/// Rings every direction-j edge of `deck` in place, drawing one coin per edge.
template <CoinSource Coins>
void ring_direction(DeckState& deck, int j, Coins& coins, Trace* trace = nullptr,
                    std::uint64_t step = 0) {
  check_direction(deck.dimension(), j);
  for_each_edge(deck.dimension(), j, [&](Position lower, Position upper) {
    const bool heads = coins.next();
    if (trace) trace->record(step, j, lower, heads);
    if (heads) deck.swap_positions(lower, upper);
  });
}

/// One application of K_j.
template <CoinSource Coins>
DeckState apply_kj(DeckState deck, int j, Coins& coins, Trace* trace = nullptr,
                   std::uint64_t step = 0) {
  ring_direction(deck, j, coins, trace, step);
  return deck;
}

/// Direction used at time n of the Thorp shuffle: K_{(n mod d) + 1}.
constexpr int thorp_direction(std::uint64_t n, int d) { return static_cast<int>(n % d) + 1; }

template <CoinSource Coins>
DeckState thorp_step(DeckState deck, std::uint64_t n, Coins& coins, Trace* trace = nullptr) {
  ring_direction(deck, thorp_direction(n, deck.dimension()), coins, trace, n);
  return deck;
}

/// One pass of the original procedure: ring direction 1, then cyclic left shift.
template <CoinSource Coins>
DeckState classic_thorp_pass(DeckState deck, Coins& coins, Trace* trace = nullptr,
                             std::uint64_t step = 0) {
  ring_direction(deck, 1, coins, trace, step);
  deck.cyclic_shift();
  return deck;
}

enum class ScheduleKind { thorp_round, zigzag_round, truncated_round, classic_pass, single_step };

struct Schedule {
  ScheduleKind kind = ScheduleKind::thorp_round;
  int truncated_dimension = 0;  // d_star, truncated rounds only
  std::uint64_t start_step = 0;  // single steps only: time index of the first step

  static Schedule thorp() { return {ScheduleKind::thorp_round}; }
  static Schedule zigzag() { return {ScheduleKind::zigzag_round}; }
  static Schedule truncated(int d_star) { return {ScheduleKind::truncated_round, d_star}; }
  static Schedule classic() { return {ScheduleKind::classic_pass}; }
  static Schedule single_step(std::uint64_t n) { return {ScheduleKind::single_step, 0, n}; }

  void validate(int d) const {
    if (kind == ScheduleKind::truncated_round) {
      require(truncated_dimension >= 1 && truncated_dimension <= d,
              "truncated round requires 1 <= d_star <= d");
    }
  }

  /// Directions of round number `round` (a single step for single_step, and
  /// direction 1 for a classic pass, whose shift is applied separately).
  std::vector<int> directions(int d, std::uint64_t round = 0) const {
    validate(d);
    std::vector<int> dirs;
    switch (kind) {
      case ScheduleKind::thorp_round:
        for (int j = 1; j <= d; ++j) dirs.push_back(j);
        break;
      case ScheduleKind::zigzag_round:
        for (int j = 1; j <= d; ++j) dirs.push_back(j);
        for (int j = d; j >= 1; --j) dirs.push_back(j);
        break;
      case ScheduleKind::truncated_round:
        for (int j = 1; j <= truncated_dimension; ++j) dirs.push_back(j);
        break;
      case ScheduleKind::classic_pass:
        dirs.push_back(1);
        break;
      case ScheduleKind::single_step:
        dirs.push_back(thorp_direction(start_step + round, d));
        break;
    }
    return dirs;
  }

  bool shifts_after_round() const { return kind == ScheduleKind::classic_pass; }

  std::string name() const {
    switch (kind) {
      case ScheduleKind::thorp_round: return "thorp";
      case ScheduleKind::zigzag_round: return "zigzag";
      case ScheduleKind::truncated_round: return "truncated:" + std::to_string(truncated_dimension);
      case ScheduleKind::classic_pass: return "classic";
      case ScheduleKind::single_step: return "step:" + std::to_string(start_step);
    }
    return "?";
  }

  /// Parses thorp | zigzag | classic | truncated:D | step:N.
  static Schedule parse(const std::string& text) {
    if (text == "thorp") return thorp();
    if (text == "zigzag") return zigzag();
    if (text == "classic") return classic();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const std::string head = text.substr(0, colon);
      const std::string tail = text.substr(colon + 1);
      try {
        if (head == "truncated") return truncated(std::stoi(tail));
        if (head == "step") return single_step(std::stoull(tail));
      } catch (const std::logic_error&) {
      }
    }
    throw contract_error("unknown schedule '" + text + "'");
  }
};

struct ScheduleRun {
  DeckState deck;
  Trace trace;
};

/// Runs `rounds` rounds of `schedule`. Trace step indices count K_j
/// applications from zero.
template <CoinSource Coins>
ScheduleRun run_schedule(DeckState deck, const Schedule& schedule, std::uint64_t rounds,
                         Coins& coins) {
  const int d = deck.dimension();
  schedule.validate(d);
  ScheduleRun run;
  std::uint64_t step = 0;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    for (int j : schedule.directions(d, r)) ring_direction(deck, j, coins, &run.trace, step++);
    if (schedule.shifts_after_round()) deck.cyclic_shift();
  }
  run.deck = std::move(deck);
  return run;
}

/// Positions currently holding `cards`, sorted.
inline std::vector<Position> project_set(const DeckState& deck, const std::vector<CardId>& cards) {
  require(!cards.empty(), "project_set needs a nonempty card set");
  std::vector<Position> out;
  out.reserve(cards.size());
  for (CardId c : cards) {
    require(c < deck.size(), "unknown card id " + std::to_string(c));
    out.push_back(deck.position_of(c));
  }
  std::sort(out.begin(), out.end());
  require(std::adjacent_find(out.begin(), out.end()) == out.end(), "duplicate card ids");
  return out;
}

/// Induced step of an unordered position set under K_j. Consumes one coin per
/// direction-j edge in the same order as ring_direction, so a shared coin
/// stream drives a deck and its projection identically.
template <CoinSource Coins>
std::vector<Position> set_step(const std::vector<Position>& set, int d, int j, Coins& coins) {
  check_direction(d, j);
  std::vector<char> member(deck_size(d), 0);
  for (Position p : set) {
    require(p < deck_size(d), "position out of range");
    member[p] = 1;
  }
  for_each_edge(d, j, [&](Position lower, Position upper) {
    if (coins.next()) std::swap(member[lower], member[upper]);
  });
  std::vector<Position> out;
  out.reserve(set.size());
  for (Position p = 0; p < member.size(); ++p) {
    if (member[p]) out.push_back(p);
  }
  return out;
}

}  // namespace thorp
