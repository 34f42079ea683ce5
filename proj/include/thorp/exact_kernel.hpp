#pragma once

// Exact transition operators for the chains small enough to enumerate.
//
// One row of an operator is the exact law after one round of a schedule,
// obtained by pushing a point mass through each K_j step and enumerating the
// coin patterns that can change the state. All entries are dyadic. Powers and
// distances are computed in floating point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thorp/dense.hpp"
#include "thorp/dyadic.hpp"
#include "thorp/errors.hpp"
#include "thorp/shuffle.hpp"
#include "thorp/state_space.hpp"

namespace thorp {

using ExactDist = std::map<std::uint64_t, Dyadic>;

namespace detail {

// Calls emit(next_state, b) for each equally likely outcome of one K_j step;
// each outcome has probability 2^-b.
template <class Emit>
void enumerate_step(const StateSpaceSpec& spec, const ChainState& state, int j, Emit&& emit) {
  const int d = spec.d;
  const std::uint32_t mask = direction_mask(d, j);
  if (spec.kind == ChainKind::full) {
    std::vector<Position> lowers;
    for_each_edge(d, j, [&](Position lower, Position) { lowers.push_back(lower); });
    const int b = static_cast<int>(lowers.size());
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << b); ++pattern) {
      ChainState next = state;
      for (int e = 0; e < b; ++e) {
        if ((pattern >> e) & 1ULL) std::swap(next[lowers[e]], next[lowers[e] | mask]);
      }
      emit(next, b);
    }
    return;
  }
  std::vector<char> member(deck_size(d), 0);
  for (auto p : state) member[p] = 1;
  // Only edges with exactly one endpoint in the set can move it.
  std::vector<Position> boundary;
  for (auto p : state) {
    if (!member[p ^ mask]) boundary.push_back(p);
  }
  const int b = static_cast<int>(boundary.size());
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << b); ++pattern) {
    ChainState next = state;
    for (int e = 0; e < b; ++e) {
      if ((pattern >> e) & 1ULL) {
        auto it = std::find(next.begin(), next.end(), boundary[e]);
        *it = boundary[e] ^ mask;
      }
    }
    std::sort(next.begin(), next.end());
    emit(next, b);
  }
}

inline ChainState shifted(const StateSpaceSpec& spec, const ChainState& state) {
  ChainState next(state.size());
  if (spec.kind == ChainKind::full) {
    for (Position p = 0; p < state.size(); ++p) next[rotate_left(p, spec.d)] = state[p];
  } else {
    for (std::size_t i = 0; i < state.size(); ++i) next[i] = rotate_left(state[i], spec.d);
    std::sort(next.begin(), next.end());
  }
  return next;
}

// Upper bound on outcomes of one K_j step.
inline std::uint64_t step_branching(const StateSpaceSpec& spec) {
  const int edges = static_cast<int>(deck_size(spec.d) / 2);
  const int movable = spec.kind == ChainKind::full ? edges : std::min(edges, spec.k);
  return movable >= 63 ? UINT64_MAX : (std::uint64_t{1} << movable);
}

}  // namespace detail

/// Exact law after one K_j step from every state carrying mass in `dist`.
inline ExactDist exact_step(const StateSpaceSpec& spec, const ExactDist& dist, int j) {
  check_direction(spec.d, j);
  ExactDist out;
  for (const auto& [index, mass] : dist) {
    detail::enumerate_step(spec, spec.decode(index), j, [&](const ChainState& next, int b) {
      out[spec.encode(next)] += mass.halved(b);
    });
  }
  return out;
}

/// Exact law after `rounds` rounds of `schedule` started from state `start`.
inline ExactDist exact_distribution(const StateSpaceSpec& spec, std::uint64_t start,
                                    const Schedule& schedule, std::uint64_t rounds) {
  ExactDist dist{{start, Dyadic::one()}};
  for (std::uint64_t r = 0; r < rounds; ++r) {
    for (int j : schedule.directions(spec.d, r)) dist = exact_step(spec, dist, j);
    if (schedule.shifts_after_round()) {
      ExactDist moved;
      for (const auto& [index, mass] : dist) {
        moved[spec.encode(detail::shifted(spec, spec.decode(index)))] += mass;
      }
      dist = std::move(moved);
    }
  }
  return dist;
}

struct BuildOptions {
  std::uint64_t entry_cap = 100'000'000;  // |V| x branching
};

// Sparse operator with exact dyadic rows (sorted by column).
class TransitionOperator {
 public:
  using value_type = Dyadic;
  using Row = std::vector<std::pair<std::uint64_t, Dyadic>>;

  TransitionOperator() = default;
  TransitionOperator(StateSpaceSpec spec, std::vector<Row> rows)
      : spec_(spec), rows_(std::move(rows)) {}

  const StateSpaceSpec& spec() const { return spec_; }
  std::size_t size() const { return rows_.size(); }
  const Row& row(std::size_t x) const { return rows_[x]; }

  template <class Fn>
  void for_each_entry(std::size_t x, Fn&& fn) const {
    for (const auto& [y, p] : rows_[x]) fn(static_cast<std::size_t>(y), p);
  }

  Dyadic at(std::size_t x, std::size_t y) const {
    const auto& r = rows_[x];
    auto it = std::lower_bound(r.begin(), r.end(), y,
                               [](const auto& e, std::size_t col) { return e.first < col; });
    return (it != r.end() && it->first == y) ? it->second : Dyadic::zero();
  }

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  /// Exact row and column sums all equal to one.
  bool is_doubly_stochastic() const {
    std::vector<Dyadic> col(rows_.size());
    for (const auto& r : rows_) {
      Dyadic sum;
      for (const auto& [y, p] : r) {
        sum += p;
        col[y] += p;
      }
      if (sum != Dyadic::one()) return false;
    }
    return std::all_of(col.begin(), col.end(), [](const Dyadic& c) { return c == Dyadic::one(); });
  }

  DenseKernel to_dense() const {
    DenseKernel k(rows_.size());
    for (std::size_t x = 0; x < rows_.size(); ++x)
      for (const auto& [y, p] : rows_[x]) k(x, y) = p.to_double();
    return k;
  }

 private:
  StateSpaceSpec spec_;
  std::vector<Row> rows_;
};

/// One-round operator of `schedule` on `spec`.
inline TransitionOperator build_operator(const StateSpaceSpec& spec, const Schedule& schedule,
                                         const BuildOptions& options = {}) {
  schedule.validate(spec.d);
  const std::uint64_t states = spec.size();
  long double branching = 1;
  for (std::size_t i = 0; i < schedule.directions(spec.d).size(); ++i) {
    branching = std::min<long double>(branching * detail::step_branching(spec), states);
  }
  const long double estimate = static_cast<long double>(states) * branching;
  if (estimate > static_cast<long double>(options.entry_cap)) {
    throw size_error("operator for " + spec.name() + " with schedule " + schedule.name() +
                     " needs ~" + std::to_string(static_cast<double>(estimate)) +
                     " row entries, above the cap of " + std::to_string(options.entry_cap));
  }
  std::vector<TransitionOperator::Row> rows(states);
  for (std::uint64_t x = 0; x < states; ++x) {
    const ExactDist dist = exact_distribution(spec, x, schedule, 1);
    rows[x].assign(dist.begin(), dist.end());
  }
  TransitionOperator op(spec, std::move(rows));
  if (!op.is_doubly_stochastic()) {
    throw contract_error("operator for " + spec.name() + " is not doubly stochastic");
  }
  return op;
}

struct DistVector {
  StateSpaceSpec spec;
  std::vector<double> p;

  static DistVector point_mass(const StateSpaceSpec& spec, std::uint64_t x) {
    DistVector v{spec, std::vector<double>(spec.size(), 0.0)};
    v.p.at(x) = 1.0;
    return v;
  }
  static DistVector uniform(const StateSpaceSpec& spec) {
    const auto n = spec.size();
    return {spec, std::vector<double>(n, 1.0 / static_cast<double>(n))};
  }

  double total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
};

inline DistVector step_dist(const DistVector& dist, const TransitionOperator& op) {
  require(dist.spec == op.spec() && dist.p.size() == op.size(), "distribution and operator specs differ");
  DistVector out{dist.spec, std::vector<double>(dist.p.size(), 0.0)};
  for (std::size_t x = 0; x < op.size(); ++x) {
    const double mass = dist.p[x];
    if (mass == 0.0) continue;
    for (const auto& [y, prob] : op.row(x)) out.p[y] += mass * prob.to_double();
  }
  return out;
}

/// max_y |p^n(x, y) |V| - 1|.
inline double uniform_distance_of(const DistVector& dist) {
  const double n = static_cast<double>(dist.p.size());
  double worst = 0.0;
  for (double v : dist.p) worst = std::max(worst, std::abs(v * n - 1.0));
  return worst;
}

inline double uniform_distance(const TransitionOperator& op, std::uint64_t n, std::uint64_t x) {
  DistVector dist = DistVector::point_mass(op.spec(), x);
  for (std::uint64_t i = 0; i < n; ++i) dist = step_dist(dist, op);
  return uniform_distance_of(dist);
}

/// Distance after 0, 1, ..., n_max rounds from x.
inline std::vector<double> distance_curve(const TransitionOperator& op, std::uint64_t n_max,
                                          std::uint64_t x) {
  std::vector<double> curve;
  DistVector dist = DistVector::point_mass(op.spec(), x);
  curve.push_back(uniform_distance_of(dist));
  for (std::uint64_t i = 0; i < n_max; ++i) {
    dist = step_dist(dist, op);
    curve.push_back(uniform_distance_of(dist));
  }
  return curve;
}

struct MixingOptions {
  double threshold = 0.25;
  std::uint64_t iteration_cap = 100'000;
  // Start only from state 0. Valid when the chain looks the same from every
  // state (the full chain under relabeling of cards, the single-card chain
  // under XOR translation).
  bool transitive = false;
};

/// Least n with |p^n(x,y)|V| - 1| <= threshold for every start x considered.
inline std::uint64_t mixing_time(const TransitionOperator& op, const MixingOptions& options = {}) {
  const std::uint64_t starts = options.transitive ? 1 : op.size();
  std::vector<DistVector> rows;
  rows.reserve(starts);
  for (std::uint64_t x = 0; x < starts; ++x) rows.push_back(DistVector::point_mass(op.spec(), x));
  for (std::uint64_t n = 0; n <= options.iteration_cap; ++n) {
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, uniform_distance_of(r));
    if (worst <= options.threshold) return n;
    for (auto& r : rows) r = step_dist(r, op);
  }
  throw convergence_error("mixing_time did not reach " + std::to_string(options.threshold) +
                          " within " + std::to_string(options.iteration_cap) + " rounds");
}

/// lambda(k) after m rounds: max over k-sets S, S' of |C(2^d, k) P(S ->_m S') - 1|.
/// Returns the values for m = 0, 1, ..., m_max.
inline std::vector<double> lambda_curve(int d, int k, std::uint64_t m_max,
                                        const Schedule& schedule = Schedule::zigzag(),
                                        const BuildOptions& options = {}) {
  const StateSpaceSpec spec = StateSpaceSpec::subset(d, k);
  const TransitionOperator op = build_operator(spec, schedule, options);
  std::vector<DistVector> rows;
  for (std::uint64_t x = 0; x < op.size(); ++x) rows.push_back(DistVector::point_mass(spec, x));
  std::vector<double> curve;
  for (std::uint64_t m = 0;; ++m) {
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, uniform_distance_of(r));
    curve.push_back(worst);
    if (m == m_max) break;
    for (auto& r : rows) r = step_dist(r, op);
  }
  return curve;
}

inline double lambda_k(int d, int k, std::uint64_t m, const Schedule& schedule = Schedule::zigzag()) {
  return lambda_curve(d, k, m, schedule).back();
}

}  // namespace thorp
