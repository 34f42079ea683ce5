#pragma once

// Property suites used by `thorplab verify`. Each check returns a named
// pass/fail line; nothing here throws on a failed property.

#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thorp/chameleon.hpp"
#include "thorp/evolving_sets.hpp"
#include "thorp/exact_kernel.hpp"
#include "thorp/l2_analysis.hpp"
#include "thorp/mixbound.hpp"
#include "thorp/shuffle.hpp"

namespace thorp {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NamedKernel {
  std::string name;
  TransitionOperator op;
};

/// Every chain/schedule pair with at most `max_states` states and d <= 3.
inline std::vector<NamedKernel> small_kernel_matrix(std::size_t max_states = 12) {
  std::vector<NamedKernel> out;
  for (int d = 1; d <= 3; ++d) {
    std::vector<StateSpaceSpec> specs;
    if (factorial(deck_size(d)) <= max_states) specs.push_back(StateSpaceSpec::full(d));
    specs.push_back(StateSpaceSpec::card(d));
    for (int k = 2; k < static_cast<int>(deck_size(d)); ++k)
      if (binomial(deck_size(d), k) <= max_states) specs.push_back(StateSpaceSpec::subset(d, k));
    std::vector<Schedule> schedules{Schedule::thorp(), Schedule::zigzag(), Schedule::classic()};
    for (int j = 1; j <= d; ++j) schedules.push_back(Schedule::single_step(j - 1));
    for (int ds = 1; ds < d; ++ds) schedules.push_back(Schedule::truncated(ds));
    for (const auto& spec : specs) {
      if (spec.size() > max_states) continue;
      for (const auto& sch : schedules)
        out.push_back({spec.name() + "/" + sch.name(), build_operator(spec, sch)});
    }
  }
  return out;
}

namespace detail {

inline CheckResult make_check(std::string name, bool pass, std::string detail = {}) {
  return {std::move(name), pass, std::move(detail)};
}

template <class T>
std::string fmt(const T& v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::vector<CheckResult> shuffle_suite(int d, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const DeckState id = DeckState::identity(d);

  bool bij = true, involution = true;
  CoinStream coins(seed);
  DeckState deck = id;
  for (int r = 0; r < 50; ++r) {
    deck = run_schedule(deck, Schedule::thorp(), 1, coins).deck;
    bij = bij && deck.is_bijection();
  }
  for (int j = 1; j <= d; ++j) {
    ConstantCoins heads{true};
    DeckState twice = apply_kj(apply_kj(deck, j, heads), j, heads);
    involution = involution && twice == deck;
  }
  out.push_back(detail::make_check("shuffle/bijection", bij));
  out.push_back(detail::make_check("shuffle/all-heads-involution", involution));

  CoinStream a(seed), b(seed);
  const auto ra = run_schedule(id, Schedule::zigzag(), 5, a);
  const auto rb = run_schedule(id, Schedule::zigzag(), 5, b);
  out.push_back(detail::make_check("shuffle/replay-determinism",
                                   ra.deck == rb.deck && ra.trace.coins() == rb.trace.coins()));

  bool consistent = true;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < 200; ++t) {
    std::vector<CardId> occ(deck_size(d));
    for (CardId c = 0; c < occ.size(); ++c) occ[c] = c;
    std::shuffle(occ.begin(), occ.end(), rng);
    const DeckState start = DeckState::from_occupants(d, occ);
    std::vector<CardId> cards;
    for (CardId c = 0; c < occ.size(); ++c)
      if (rng() & 1ULL) cards.push_back(c);
    if (cards.empty()) cards.push_back(0);
    const int j = static_cast<int>(rng() % d) + 1;
    CoinStream c1(rng()), c2 = c1;
    const auto moved = apply_kj(start, j, c1);
    const auto via_set = set_step(project_set(start, cards), d, j, c2);
    consistent = consistent && via_set == project_set(moved, cards);
  }
  out.push_back(detail::make_check("shuffle/set-step-consistency", consistent));

  if (d <= 3) {
    const auto spec = StateSpaceSpec::full(d);
    const auto round = exact_distribution(spec, 0, Schedule::thorp(), 1);
    const auto classic = exact_distribution(spec, 0, Schedule::classic(), d);
    out.push_back(detail::make_check("shuffle/classic-equivalence", round == classic,
                                     std::to_string(round.size()) + " states"));
  }
  return out;
}

inline std::vector<CheckResult> exact_suite(int d) {
  std::vector<CheckResult> out;
  std::vector<StateSpaceSpec> specs{StateSpaceSpec::card(d)};
  if (d <= 2) specs.push_back(StateSpaceSpec::full(d));
  if (d >= 2 && d <= 3) specs.push_back(StateSpaceSpec::subset(d, static_cast<int>(deck_size(d) / 2)));
  for (const auto& spec : specs) {
    const auto op = build_operator(spec, Schedule::thorp());
    out.push_back(detail::make_check("exact/" + spec.name() + "/doubly-stochastic", op.is_doubly_stochastic()));
    const auto uni = step_dist(DistVector::uniform(spec), op);
    out.push_back(detail::make_check("exact/" + spec.name() + "/uniform-fixed",
                                     uniform_distance_of(uni) <= 1e-12));
    const auto tau = mixing_time(op);
    const auto dense = op.to_dense();
    // Dense power oracle for the same criterion.
    DenseKernel power = DenseKernel::identity(dense.size());
    std::uint64_t dense_tau = 0;
    for (;; ++dense_tau) {
      double worst = 0.0;
      for (std::size_t x = 0; x < dense.size(); ++x)
        for (std::size_t y = 0; y < dense.size(); ++y)
          worst = std::max(worst, std::abs(power(x, y) * static_cast<double>(dense.size()) - 1.0));
      if (worst <= 0.25 || dense_tau > 10'000) break;
      power = power * dense;
    }
    out.push_back(detail::make_check("exact/" + spec.name() + "/mixing-time-oracle", tau == dense_tau,
                                     "tau=" + std::to_string(tau)));
  }
  return out;
}

inline std::vector<CheckResult> evolving_sets_suite(std::size_t max_states) {
  std::vector<CheckResult> out;
  bool martingale = true, lemma = true, duality = true, complement_ok = true;
  std::size_t kernels = 0;
  for (const auto& [name, op] : small_kernel_matrix(max_states)) {
    ++kernels;
    const std::size_t n = op.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      StateSet s(n, false);
      for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1ULL;
      martingale = martingale && es_exact_expectations(s, op).expected_size == Dyadic::integer(set_size(s));
      lemma = lemma && root_ratio_check(s, op).pass;
      if (mask + 1 < (std::uint64_t{1} << n)) complement_ok = complement_ok && complement_law_matches(s, op);
    }
    if (n <= 10)
      for (std::size_t x = 0; x < n; ++x)
        for (const auto& r : verify_duality(op, x, 3, CheckMode::exact)) duality = duality && r.pass;
  }
  const std::string k = std::to_string(kernels) + " kernels";
  out.push_back(detail::make_check("evolving-sets/martingale", martingale, k));
  out.push_back(detail::make_check("evolving-sets/root-ratio-bound", lemma, k));
  out.push_back(detail::make_check("evolving-sets/duality", duality, k));
  out.push_back(detail::make_check("evolving-sets/complement-law", complement_ok, k));
  return out;
}

inline std::vector<CheckResult> chameleon_suite(int d, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const auto b = static_cast<std::uint32_t>(deck_size(d) / 2 + 1);
  if (d <= 2) {
    const auto rep = verify_chameleon_identity(d, b, d == 1 ? 4 : 2, 1, CheckMode::exact);
    out.push_back(detail::make_check("chameleon/identity-exact", rep.pass,
                                     "max group gap " + detail::fmt(rep.max_group_gap)));
  }
  IdentityOptions mc;
  mc.trials = 20'000;
  mc.seed = seed;
  const auto rep = verify_chameleon_identity(d, b, 4, 1, CheckMode::monte_carlo, mc);
  out.push_back(detail::make_check("chameleon/identity-monte-carlo", rep.pass));
  const auto mass = red_mass_check(d, b, 1, 4, 20'000, seed);
  out.push_back(detail::make_check("chameleon/red-mass", mass.pass));
  if (d >= 2) {
    const CardSet a{0}, bset{1};
    const std::vector<double> thetas{0.0, 0.25, 0.5, 1.0, std::log(2.0)};
    bool ok = true;
    if (d <= 3) {
      for (const auto& row : moment_bound_exact(d, a, bset, thetas)) ok = ok && row.pass;
    } else {
      for (const auto& row : moment_bound_mc(d, a, bset, thetas, 20'000, seed)) ok = ok && row.pass;
    }
    out.push_back(detail::make_check("chameleon/moment-bound", ok));
  }
  return out;
}

inline std::vector<CheckResult> l2_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const auto peres = peres_sweep(200, seed);
  out.push_back(detail::make_check("l2/peres", peres.pass, "min margin " + detail::fmt(peres.min_margin)));
  const auto ball = ball_sweep(10'000, seed);
  out.push_back(detail::make_check("l2/ball", ball.pass, "min margin " + detail::fmt(ball.min_margin)));
  out.push_back(detail::make_check("l2/root-average-grid", root_average_grid(10'000).pass));
  out.push_back(detail::make_check("l2/quartic-root-grid", quartic_root_grid(10'000).pass));
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto k = random_birkhoff_kernel(2 + rng() % 7, rng);
    worst = std::max(worst, std::abs(complement_identity_gap(k, random_function(k.size(), rng))));
  }
  out.push_back(detail::make_check("l2/complement-identity", worst <= 1e-12, "max gap " + detail::fmt(worst)));
  return out;
}

inline std::vector<CheckResult> bound_suite(int d, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const auto consts = constants_solver();
  out.push_back(detail::make_check("bound/constants", consts.pass && consts.alpha_min == 64,
                                   "alpha=" + std::to_string(consts.alpha_min) +
                                       " c=" + std::to_string(consts.c_min)));
  const auto tc = trunccor_arithmetic_check();
  out.push_back(detail::make_check("bound/trunccor", tc.pass, std::to_string(tc.points) + " points"));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 0.5);
  bool monotone = true;
  for (int t = 0; t < 200; ++t) {
    const ProfileBoundSpec s{u(rng), u(rng), 1.0 + 20.0 * u(rng)};
    const auto base = mixing_bound_from_profile(s).tau_bound;
    monotone = monotone && mixing_bound_from_profile({s.a * 1.1, s.b, s.log_v}).tau_bound <= base;
    monotone = monotone && mixing_bound_from_profile({s.a, std::min(0.99, s.b * 1.1), s.log_v}).tau_bound <= base;
    monotone = monotone && mixing_bound_from_profile({s.a, s.b, s.log_v * 1.1}).tau_bound >= base;
  }
  out.push_back(detail::make_check("bound/monotone", monotone));

  const auto op = build_operator(StateSpaceSpec::card(d), Schedule::thorp());
  if (op.size() >= 2 && op.size() <= 24) {
    const auto prof = profile_by_size(op, ProfileMode::exhaustive);
    const auto spec = fit_profile_bound(prof, op.size());
    const auto tau = mixing_time(op);
    bool ok = false;
    std::string det;
    try {
      const auto bound = mixing_bound_from_profile(spec);
      ok = bound.tau_bound >= tau;
      det = "tau=" + std::to_string(tau) + " bound=" + std::to_string(bound.tau_bound);
    } catch (const std::exception& e) {
      det = e.what();
    }
    out.push_back(detail::make_check("bound/consistency", ok, det));
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"shuffle", "exact", "evolving-sets", "chameleon", "l2", "bound", "all"};
  return names;
}

inline std::vector<CheckResult> run_suite(const std::string& suite, int d, std::uint64_t seed) {
  require(std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end(),
          "unknown suite '" + suite + "'");
  std::vector<CheckResult> out;
  auto add = [&](std::vector<CheckResult> part) { out.insert(out.end(), part.begin(), part.end()); };
  const bool all = suite == "all";
  if (all || suite == "shuffle") add(shuffle_suite(d, seed));
  if (all || suite == "exact") add(exact_suite(d));
  if (all || suite == "evolving-sets") add(evolving_sets_suite(12));
  if (all || suite == "chameleon") add(chameleon_suite(d, seed));
  if (all || suite == "l2") add(l2_suite(seed));
  if (all || suite == "bound") add(bound_suite(d, seed));
  return out;
}

}  // namespace thorp
