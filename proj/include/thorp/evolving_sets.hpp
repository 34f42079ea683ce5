#pragma once

// Evolving sets over a doubly stochastic kernel.
//
// From S the next set is {y : p(S, y) >= U} with U uniform on [0, 1]. The law
// of one step has at most |V| + 1 atoms: sorting the distinct values
// v_1 > ... > v_r of p(S, .), the set {y : p(S, y) >= v_i} is taken with
// probability v_i - v_{i+1} (v_{r+1} = 0), and the empty set with probability
// 1 - v_1. All integrals below are sums over these half-open U-intervals, so
// the >= versus > convention never matters.
//
// Functions are templates over a kernel type exposing size(), value_type and
// for_each_entry(x, fn(y, p)); TransitionOperator (exact dyadic) and
// DenseKernel (double) both qualify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "thorp/coins.hpp"
#include "thorp/dense.hpp"
#include "thorp/dyadic.hpp"
#include "thorp/errors.hpp"

namespace thorp {

using StateSet = std::vector<bool>;

inline StateSet set_from_indices(std::size_t n, const std::vector<std::size_t>& members) {
  StateSet s(n, false);
  for (auto i : members) {
    require(i < n, "state index out of range");
    s[i] = true;
  }
  return s;
}

inline std::vector<std::size_t> set_indices(const StateSet& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) out.push_back(i);
  return out;
}

inline std::size_t set_size(const StateSet& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), true));
}

inline StateSet complement(StateSet s) {
  s.flip();
  return s;
}

/// "{0;3;5}".
inline std::string format_set(const StateSet& s) {
  std::string out = "{";
  bool first = true;
  for (auto i : set_indices(s)) {
    if (!first) out += ';';
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

namespace detail {

template <class Scalar>
Scalar scalar_one() {
  if constexpr (std::is_same_v<Scalar, Dyadic>) return Dyadic::one();
  else return Scalar{1};
}

template <class Scalar>
Scalar scalar_times(const Scalar& v, std::size_t n) {
  if constexpr (std::is_same_v<Scalar, Dyadic>) return v * Dyadic::integer(n);
  else return v * static_cast<Scalar>(n);
}

template <class Scalar>
Scalar clamped_difference(const Scalar& a, const Scalar& b) {
  if constexpr (std::is_same_v<Scalar, Dyadic>) return a - b;
  else return std::max(Scalar{0}, a - b);
}

}  // namespace detail

/// p(S, y) = sum over x in S of p(x, y), for every y.
template <class Kernel>
std::vector<typename Kernel::value_type> set_mass(const Kernel& op, const StateSet& s) {
  using Scalar = typename Kernel::value_type;
  require(s.size() == op.size(), "set and kernel sizes differ");
  std::vector<Scalar> mass(op.size(), Scalar{});
  for (std::size_t x = 0; x < op.size(); ++x) {
    if (!s[x]) continue;
    op.for_each_entry(x, [&](std::size_t y, const Scalar& p) { mass[y] += p; });
  }
  return mass;
}

template <class Kernel>
StateSet es_step(const StateSet& s, const Kernel& op, double u) {
  const auto mass = set_mass(op, s);
  StateSet next(op.size(), false);
  for (std::size_t y = 0; y < mass.size(); ++y) next[y] = to_double(mass[y]) >= u;
  return next;
}

// Distinct levels of p(S, .) in decreasing order, with how many states sit at
// or above each level.
template <class Scalar>
struct MassLevel {
  Scalar value;
  std::size_t count_at_or_above;
};

template <class Scalar>
std::vector<MassLevel<Scalar>> mass_levels(std::vector<Scalar> mass) {
  std::sort(mass.begin(), mass.end(), [](const Scalar& a, const Scalar& b) { return b < a; });
  std::vector<MassLevel<Scalar>> levels;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] == Scalar{}) break;
    if (!levels.empty() && levels.back().value == mass[i]) {
      levels.back().count_at_or_above = i + 1;
    } else {
      levels.push_back({mass[i], i + 1});
    }
  }
  return levels;
}

template <class Scalar>
struct SetExpectations {
  Scalar expected_size;        // E|S~|, exact for dyadic kernels
  double expected_root_ratio;  // E sqrt(|S~| / |S|)
  double psi;                  // 1 - expected_root_ratio
};

template <class Kernel>
SetExpectations<typename Kernel::value_type> es_exact_expectations(const StateSet& s,
                                                                   const Kernel& op) {
  using Scalar = typename Kernel::value_type;
  const std::size_t size = set_size(s);
  require(size > 0, "evolving-set expectations need a nonempty set");
  const auto levels = mass_levels(set_mass(op, s));
  Scalar expected{};
  double root = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Scalar next = i + 1 < levels.size() ? levels[i + 1].value : Scalar{};
    const Scalar width = detail::clamped_difference(levels[i].value, next);
    expected += detail::scalar_times(width, levels[i].count_at_or_above);
    root += to_double(width) *
            std::sqrt(static_cast<double>(levels[i].count_at_or_above) / static_cast<double>(size));
  }
  return {expected, root, 1.0 - root};
}

/// Atoms of the one-step law from S, as (next set, probability).
template <class Kernel>
std::vector<std::pair<StateSet, typename Kernel::value_type>> one_step_law(const StateSet& s,
                                                                           const Kernel& op) {
  using Scalar = typename Kernel::value_type;
  const auto mass = set_mass(op, s);
  const auto levels = mass_levels(mass);
  std::vector<std::pair<StateSet, Scalar>> law;
  const Scalar one = detail::scalar_one<Scalar>();
  const Scalar top = levels.empty() ? Scalar{} : levels.front().value;
  if (top < one) law.emplace_back(StateSet(op.size(), false), detail::clamped_difference(one, top));
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Scalar next = i + 1 < levels.size() ? levels[i + 1].value : Scalar{};
    StateSet t(op.size(), false);
    for (std::size_t y = 0; y < mass.size(); ++y) t[y] = !(mass[y] < levels[i].value);
    law.emplace_back(std::move(t), detail::clamped_difference(levels[i].value, next));
  }
  return law;
}

/// P_{x}(y in S_n) for every y, by enumerating the threshold tree with
/// identical sets merged at each level.
template <class Kernel>
std::vector<double> duality_hit_probabilities(const Kernel& op, std::size_t x, int n,
                                              std::size_t max_sets = 2'000'000) {
  require(x < op.size(), "start state out of range");
  require(n >= 0, "n must be nonnegative");
  std::map<StateSet, double> level{{set_from_indices(op.size(), {x}), 1.0}};
  for (int step = 0; step < n; ++step) {
    std::map<StateSet, double> next;
    for (const auto& [set, weight] : level) {
      if (set_size(set) == 0) {
        next[set] += weight;
        continue;
      }
      for (const auto& [t, prob] : one_step_law(set, op)) next[t] += weight * to_double(prob);
    }
    if (next.size() > max_sets) {
      throw size_error("threshold tree exceeds " + std::to_string(max_sets) + " distinct sets");
    }
    level = std::move(next);
  }
  std::vector<double> hit(op.size(), 0.0);
  for (const auto& [set, weight] : level)
    for (std::size_t y = 0; y < set.size(); ++y)
      if (set[y]) hit[y] += weight;
  return hit;
}

/// p^n(x, .) by repeated row application.
template <class Kernel>
std::vector<double> power_row(const Kernel& op, std::size_t x, int n) {
  std::vector<double> row(op.size(), 0.0);
  row[x] = 1.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(op.size(), 0.0);
    for (std::size_t z = 0; z < op.size(); ++z) {
      if (row[z] == 0.0) continue;
      op.for_each_entry(z, [&](std::size_t y, const auto& p) { next[y] += row[z] * to_double(p); });
    }
    row = std::move(next);
  }
  return row;
}

enum class CheckMode { exact, monte_carlo };

struct DualityReport {
  std::size_t x = 0;
  std::size_t y = 0;
  int n = 0;
  double transition_probability = 0.0;  // p^n(x, y)
  double hit_probability = 0.0;         // P_{x}(y in S_n)
  double gap = 0.0;
  double standard_error = 0.0;          // Monte Carlo only
  bool pass = false;
};

struct DualityOptions {
  double tolerance = 1e-12;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  double z_limit = 4.0;
};

/// Both sides of p^n(x, y) = P_{x}(y in S_n) for every y.
template <class Kernel>
std::vector<DualityReport> verify_duality(const Kernel& op, std::size_t x, int n, CheckMode mode,
                                          const DualityOptions& options = {}) {
  const auto lhs = power_row(op, x, n);
  std::vector<double> rhs;
  std::vector<double> se(op.size(), 0.0);
  if (mode == CheckMode::exact) {
    rhs = duality_hit_probabilities(op, x, n);
  } else {
    rhs.assign(op.size(), 0.0);
    for (std::uint64_t t = 0; t < options.trials; ++t) {
      CoinStream coins(derive_seed(options.seed, t));
      StateSet s = set_from_indices(op.size(), {x});
      for (int i = 0; i < n && set_size(s) > 0; ++i) {
        // U in (0, 1]
        s = es_step(s, op, 1.0 - coins.uniform());
      }
      for (std::size_t y = 0; y < s.size(); ++y)
        if (s[y]) rhs[y] += 1.0;
    }
    for (auto& v : rhs) v /= static_cast<double>(options.trials);
    for (std::size_t y = 0; y < se.size(); ++y) {
      se[y] = std::sqrt(lhs[y] * (1.0 - lhs[y]) / static_cast<double>(options.trials));
    }
  }
  std::vector<DualityReport> out;
  for (std::size_t y = 0; y < op.size(); ++y) {
    DualityReport r;
    r.x = x;
    r.y = y;
    r.n = n;
    r.transition_probability = lhs[y];
    r.hit_probability = rhs[y];
    r.gap = std::abs(lhs[y] - rhs[y]);
    r.standard_error = se[y];
    r.pass = mode == CheckMode::exact ? r.gap <= options.tolerance
                                      : r.gap <= options.z_limit * se[y] + options.tolerance;
    out.push_back(r);
  }
  return out;
}

/// The complement of the one-step law from S equals the one-step law from
/// S^c, compared atom by atom.
template <class Kernel>
bool complement_law_matches(const StateSet& s, const Kernel& op) {
  using Scalar = typename Kernel::value_type;
  std::map<StateSet, Scalar> direct, mirrored;
  for (const auto& [t, p] : one_step_law(complement(s), op)) direct[t] += p;
  for (const auto& [t, p] : one_step_law(s, op)) mirrored[complement(t)] += p;
  auto drop_zero = [](std::map<StateSet, Scalar>& m) {
    std::erase_if(m, [](const auto& kv) { return kv.second == Scalar{}; });
  };
  drop_zero(direct);
  drop_zero(mirrored);
  if (direct.size() != mirrored.size()) return false;
  for (const auto& [t, p] : direct) {
    auto it = mirrored.find(t);
    if (it == mirrored.end()) return false;
    if (std::abs(to_double(it->second) - to_double(p)) > 1e-12) return false;
  }
  return true;
}

struct RootRatioResult {
  double lhs = 0.0;    // E sqrt(|S~| / |S|)
  double alpha = 0.0;  // ||p(S, .)||_2^2 / ||1_S||_1
  double rhs = 0.0;    // [alpha (2 - alpha)]^(1/4)
  double delta = 0.0;  // 1 - alpha
  double remark_bound = 0.0;  // 1 - delta^2 / 4
  bool remark_holds = false;  // rhs == (1 - delta^2)^(1/4) <= 1 - delta^2 / 4
  bool pass = false;
};

template <class Kernel>
RootRatioResult root_ratio_check(const StateSet& s, const Kernel& op, double tol = 1e-12) {
  const auto mass = set_mass(op, s);
  double sum_sq = 0.0;
  for (const auto& v : mass) sum_sq += to_double(v) * to_double(v);
  RootRatioResult r;
  r.lhs = es_exact_expectations(s, op).expected_root_ratio;
  // Normalized norms share the 1/|V| factor, which cancels.
  r.alpha = sum_sq / static_cast<double>(set_size(s));
  const double inner = std::max(0.0, r.alpha * (2.0 - r.alpha));
  r.rhs = std::pow(inner, 0.25);
  r.delta = 1.0 - r.alpha;
  const double chain = std::pow(std::max(0.0, 1.0 - r.delta * r.delta), 0.25);
  r.remark_bound = 1.0 - r.delta * r.delta / 4.0;
  r.remark_holds = std::abs(chain - r.rhs) <= tol && chain <= r.remark_bound + tol;
  r.pass = r.lhs <= r.rhs + tol;
  return r;
}

enum class ProfileMode { exhaustive, sampled };

inline std::string to_string(ProfileMode m) {
  return m == ProfileMode::exhaustive ? "exhaustive" : "sampled";
}

struct RootProfilePoint {
  double x = 0.0;
  double psi = 0.0;
  ProfileMode mode = ProfileMode::exhaustive;
  StateSet argmin;
};

struct ProfileOptions {
  std::size_t exhaustive_limit = 24;
  std::size_t samples_per_size = 10'000;
  std::size_t descent_steps = 100;
  std::uint64_t seed = 1;
};

// Smallest psi(S) found among sets of each size 1..floor(|V|/2) (index 0 unused).
struct SizeProfile {
  std::vector<double> psi;
  std::vector<StateSet> argmin;
  ProfileMode mode = ProfileMode::exhaustive;
};

namespace detail {

inline double psi_from_mass(std::vector<double> mass, std::size_t size) {
  std::sort(mass.begin(), mass.end(), std::greater<>());
  double root = 0.0;
  for (std::size_t i = 0; i < mass.size() && mass[i] > 0.0; ++i) {
    const double next = i + 1 < mass.size() ? mass[i + 1] : 0.0;
    if (mass[i] == next) continue;
    root += (mass[i] - next) * std::sqrt(static_cast<double>(i + 1) / static_cast<double>(size));
  }
  return 1.0 - root;
}

template <class Kernel>
DenseKernel dense_of(const Kernel& op) {
  DenseKernel k(op.size());
  for (std::size_t x = 0; x < op.size(); ++x)
    op.for_each_entry(x, [&](std::size_t y, const auto& p) { k(x, y) = to_double(p); });
  return k;
}

}  // namespace detail

template <class Kernel>
double set_psi(const StateSet& s, const Kernel& op) {
  return es_exact_expectations(s, op).psi;
}

template <class Kernel>
SizeProfile profile_by_size(const Kernel& op, ProfileMode mode, const ProfileOptions& options = {}) {
  const std::size_t n = op.size();
  const std::size_t half = std::max<std::size_t>(1, n / 2);
  SizeProfile prof;
  prof.mode = mode;
  prof.psi.assign(half + 1, 2.0);
  prof.argmin.assign(half + 1, StateSet(n, false));
  const DenseKernel k = detail::dense_of(op);

  if (mode == ProfileMode::exhaustive) {
    require(n <= options.exhaustive_limit,
            "exhaustive root profile needs |V| <= " + std::to_string(options.exhaustive_limit));
    // Gray-code walk over all subsets, updating p(S, .) one row at a time.
    std::vector<double> mass(n, 0.0);
    std::uint64_t gray = 0;
    std::size_t size = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t i = 1; i < total; ++i) {
      const int bit = __builtin_ctzll(i);
      gray ^= std::uint64_t{1} << bit;
      const bool added = (gray >> bit) & 1ULL;
      const double sign = added ? 1.0 : -1.0;
      for (std::size_t y = 0; y < n; ++y) mass[y] += sign * k(static_cast<std::size_t>(bit), y);
      size += added ? 1 : 0;
      size -= added ? 0 : 1;
      if (size == 0 || size > half) continue;
      const double psi = detail::psi_from_mass(mass, size);
      if (psi < prof.psi[size]) {
        prof.psi[size] = psi;
        StateSet s(n, false);
        for (std::size_t b = 0; b < n; ++b) s[b] = (gray >> b) & 1ULL;
        prof.argmin[size] = std::move(s);
      }
    }
  } else {
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t size = 1; size <= half; ++size) {
      for (std::size_t t = 0; t < options.samples_per_size; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        StateSet s(n, false);
        for (std::size_t i = 0; i < size; ++i) s[order[i]] = true;
        double psi = set_psi(s, k);
        if (psi < prof.psi[size]) {
          prof.psi[size] = psi;
          prof.argmin[size] = s;
        }
      }
      // Single-element swap descent from the best sample.
      StateSet best = prof.argmin[size];
      double best_psi = prof.psi[size];
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t step = 0; step < options.descent_steps && size < n; ++step) {
        std::size_t in = pick(rng), out = pick(rng);
        while (!best[in]) in = pick(rng);
        while (best[out]) out = pick(rng);
        StateSet cand = best;
        cand[in] = false;
        cand[out] = true;
        const double psi = set_psi(cand, k);
        if (psi < best_psi) {
          best_psi = psi;
          best = std::move(cand);
        }
      }
      prof.psi[size] = best_psi;
      prof.argmin[size] = std::move(best);
    }
  }
  return prof;
}

/// psi(x) = inf{psi(S) : 1 <= |S| <= x |V|} for x <= 1/2 and psi(1/2) above.
/// Grid points with no qualifying nonempty set get the vacuous value 1.
inline std::vector<RootProfilePoint> profile_points(const SizeProfile& prof, std::size_t states,
                                                    const std::vector<double>& grid) {
  std::vector<RootProfilePoint> out;
  for (double x : grid) {
    require(x > 0.0 && x <= 1.0, "profile grid values must lie in (0, 1]");
    RootProfilePoint pt;
    pt.x = x;
    pt.mode = prof.mode;
    if (states == 1) {
      pt.psi = 0.0;
      pt.argmin = StateSet(1, true);
      out.push_back(pt);
      continue;
    }
    const double eff = std::min(x, 0.5);
    const auto limit = static_cast<std::size_t>(std::floor(eff * static_cast<double>(states) + 1e-9));
    pt.psi = 1.0;
    pt.argmin = StateSet(states, false);
    for (std::size_t size = 1; size <= limit && size < prof.psi.size(); ++size) {
      if (prof.psi[size] < pt.psi) {
        pt.psi = prof.psi[size];
        pt.argmin = prof.argmin[size];
      }
    }
    pt.psi = std::clamp(pt.psi, 0.0, 1.0);
    out.push_back(pt);
  }
  // Enforce monotone non-increasing order in x.
  std::vector<std::size_t> idx(out.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return out[a].x < out[b].x; });
  for (std::size_t i = 1; i < idx.size(); ++i) {
    auto& cur = out[idx[i]];
    const auto& prev = out[idx[i - 1]];
    if (cur.psi > prev.psi) {
      cur.psi = prev.psi;
      cur.argmin = prev.argmin;
    }
  }
  return out;
}

template <class Kernel>
std::vector<RootProfilePoint> root_profile(const Kernel& op, const std::vector<double>& grid,
                                           ProfileMode mode, const ProfileOptions& options = {}) {
  for (double x : grid) require(x > 0.0 && x <= 1.0, "profile grid values must lie in (0, 1]");
  if (op.size() == 1) return profile_points(SizeProfile{{2.0, 0.0}, {}, mode}, 1, grid);
  return profile_points(profile_by_size(op, mode, options), op.size(), grid);
}

}  // namespace thorp
