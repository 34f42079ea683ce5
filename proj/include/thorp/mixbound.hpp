#pragma once

// From a root-profile lower bound to a mixing-time bound, and the implicit
// constants of the chameleon argument.
//
// With psi(x) >= max(1 - x^a, b) the dominating map is
//   f(z) = min(z^(1-2a), z(1-b)),  Z_0 = sqrt|V|,
// and tau <= 2 min{n : f^n(Z_0) <= 1/2}. Everything is iterated on ln z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "thorp/errors.hpp"
#include "thorp/evolving_sets.hpp"

namespace thorp {

struct ProfileBoundSpec {
  double a = 0.0;     // psi(x) >= 1 - x^a
  double b = 0.0;     // psi(x) >= b
  double log_v = 0.0; // ln |V|

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) throw convergence_error("profile bound needs a > 0 and b > 0");
    require(b < 1.0, "profile floor b must be below 1");
    require(log_v > 0.0 && std::isfinite(log_v), "logV must be positive");
    require(std::isfinite(a), "exponent a must be finite");
  }
};

struct MixingBound {
  std::uint64_t n_exact = 0;   // iterations of f = min(f1, f2)
  std::uint64_t n1 = 0;        // f1 alone until z <= 4
  std::uint64_t n2 = 0;        // then f2 alone until z <= threshold
  std::uint64_t tau_bound = 0; // 2 n_exact
  std::uint64_t tau_phase = 0; // 2 (n1 + n2)
  bool iterated = false;       // false if the iteration cap was hit
  double n1_closed = 0.0;      // ceil(ln(ln Z_0 / ln 4) / (2a))
  double n2_closed = 0.0;      // ceil(ln 8 / b)
};

inline constexpr std::uint64_t kIterationCap = 1'000'000'000;

/// ln z after n applications of z -> z^(1-2a).
inline double f1_iterate_log(double a, double log_z, std::uint64_t n) {
  return log_z * std::pow(1.0 - 2.0 * a, static_cast<double>(n));
}

inline MixingBound mixing_bound_from_profile(const ProfileBoundSpec& spec, double threshold = 0.5,
                                             std::uint64_t cap = kIterationCap) {
  spec.validate();
  require(threshold > 0.0 && threshold < 4.0, "threshold must lie in (0, 4)");
  const double l0 = spec.log_v / 2.0;
  const double target = std::log(threshold);
  const double shrink = 1.0 - 2.0 * spec.a;
  const double drop = std::log1p(-spec.b);
  MixingBound r;

  double l = l0;
  std::uint64_t n = 0;
  while (l > target && n < cap) {
    l = std::min(shrink * l, l + drop);
    ++n;
  }
  const bool exact_done = l <= target;

  double lp = l0;
  std::uint64_t n1 = 0;
  const double ln4 = std::log(4.0);
  while (lp > ln4 && n1 < cap) {
    const double next = shrink * lp;
    if (next >= lp) break;
    lp = next;
    ++n1;
  }
  std::uint64_t n2 = 0;
  bool phase_done = lp <= ln4;
  if (phase_done) {
    while (lp > target && n2 < cap) {
      lp += drop;
      ++n2;
    }
    phase_done = lp <= target;
  }

  r.iterated = exact_done && phase_done;
  r.n_exact = n;
  r.n1 = n1;
  r.n2 = n2;
  r.tau_bound = 2 * n;
  r.tau_phase = 2 * (n1 + n2);
  r.n1_closed = l0 > ln4 ? std::ceil(std::log(l0 / ln4) / (2.0 * spec.a)) : 0.0;
  r.n2_closed = std::ceil(std::log(4.0 / threshold) / spec.b);
  return r;
}

/// ln n!, summing logs up to 2^22 and using lgamma beyond.
inline double log_factorial(std::uint64_t n) {
  if (n > (std::uint64_t{1} << 22)) return std::lgamma(static_cast<double>(n) + 1.0);
  double s = 0.0;
  for (std::uint64_t i = 2; i <= n; ++i) s += std::log(static_cast<double>(i));
  return s;
}

/// Largest (a, b) certified by a measured per-size profile on |V| states.
/// psi is piecewise constant: on [j/|V|, (j+1)/|V|) it equals the minimum
/// over sizes <= j, so each piece needs x^a >= 1 - psi at its right end.
inline ProfileBoundSpec fit_profile_bound(const SizeProfile& prof, std::size_t states) {
  require(states >= 2, "profile fit needs at least two states");
  const std::size_t half = states / 2;
  require(prof.psi.size() >= half + 1, "profile does not cover sizes up to |V|/2");
  const double v = static_cast<double>(states);
  ProfileBoundSpec spec;
  spec.log_v = std::log(v);
  spec.a = std::numeric_limits<double>::infinity();
  double running = 1.0;
  for (std::size_t j = 1; j <= half; ++j) {
    running = std::min(running, prof.psi[j]);
    const double right = std::min(static_cast<double>(j + 1) / v, 0.5);
    if (running >= 1.0) continue;
    require(running > 0.0, "profile has psi = 0; no exponent certifies it");
    spec.a = std::min(spec.a, std::log1p(-running) / std::log(right));
  }
  spec.b = running;
  if (!std::isfinite(spec.a)) spec.a = 1.0;
  return spec;
}

// ---------------------------------------------------------------------------
// Implicit constants.

struct ConstantsRow {
  int d = 0;
  double alpha_slack = 0.0;  // ln rhs - ln lhs of the alpha constraint
  double c_slack = 0.0;      // same for the c constraint
};

struct ConstantsResult {
  std::uint64_t alpha_min = 0;
  std::uint64_t beta = 0;
  std::uint64_t c_min = 0;
  int checked_up_to = 0;
  bool tail_monotone = false;  // both slacks increase beyond checked_up_to
  std::vector<ConstantsRow> table;
  bool pass = false;
};

inline constexpr std::uint64_t kBeta = 2056ULL * 64ULL * 5ULL;

// alpha = 64 makes the d = 1 constraint an exact equality; rounding in the
// log form must not reject it.
inline constexpr double kSlackTol = 1e-12;

// 4 alpha^-d <= 2^(-d-1) 4^-d, in logs.
inline double alpha_slack(double alpha, int d) {
  return (-(d + 1) * std::log(2.0) - d * std::log(4.0)) - (std::log(4.0) - d * std::log(alpha));
}

// [4 e^-c]^d beta ln(alpha) c d^5 <= alpha^-d, in logs.
inline double c_slack(double c, double alpha, double beta, int d) {
  const double lhs = d * (std::log(4.0) - c) + std::log(beta) + std::log(std::log(alpha)) +
                     std::log(c) + 5.0 * std::log(static_cast<double>(d));
  return -d * std::log(alpha) - lhs;
}

inline ConstantsResult constants_solver(int d_max = 1000, std::uint64_t beta = kBeta) {
  require(d_max >= 1, "need at least d = 1");
  ConstantsResult r;
  r.beta = beta;
  r.checked_up_to = d_max;
  auto alpha_ok = [&](double alpha) {
    for (int d = 1; d <= d_max; ++d)
      if (alpha_slack(alpha, d) < -kSlackTol) return false;
    return true;
  };
  for (std::uint64_t alpha = 2;; ++alpha) {
    if (alpha_ok(static_cast<double>(alpha))) {
      r.alpha_min = alpha;
      break;
    }
    require(alpha < 1'000'000, "alpha scan did not terminate");
  }
  const double alpha = static_cast<double>(r.alpha_min);
  const double b = static_cast<double>(beta);
  auto c_ok = [&](double c) {
    for (int d = 1; d <= d_max; ++d)
      if (c_slack(c, alpha, b, d) < -kSlackTol) return false;
    return true;
  };
  for (std::uint64_t c = 1;; ++c) {
    if (c_ok(static_cast<double>(c))) {
      r.c_min = c;
      break;
    }
    require(c < 1'000'000, "c scan did not terminate");
  }
  const double c = static_cast<double>(r.c_min);
  for (int d = 1; d <= d_max; ++d)
    r.table.push_back({d, alpha_slack(alpha, d), c_slack(c, alpha, b, d)});
  // d-derivatives of the slacks: ln(alpha) - ln 8 and (c - ln 4 - ln alpha) - 5/d.
  r.tail_monotone = std::log(alpha) > std::log(8.0) &&
                    c - std::log(4.0) - std::log(alpha) - 5.0 / d_max > 0.0;
  r.pass = r.tail_monotone;
  for (const auto& row : r.table) r.pass = r.pass && row.alpha_slack >= -kSlackTol && row.c_slack >= -kSlackTol;
  return r;
}

// ---------------------------------------------------------------------------
// (1 + e^{-2kd})^{2^{d-d*}} <= exp(2^d e^{-2dk}) <= exp(exp(-k)).

struct TruncCorRow {
  int k = 0, d = 0, d_star = 0;
  double log_lhs = 0.0, log_mid = 0.0, log_rhs = 0.0;
  bool pass = false;
};

inline TruncCorRow trunccor_point(int k, int d, int d_star) {
  require(k >= 1 && d >= 1 && d_star >= 1 && d_star <= d, "need k >= 1 and 1 <= d* <= d");
  TruncCorRow row{k, d, d_star};
  const double kd = static_cast<double>(k) * d;
  row.log_lhs = std::ldexp(std::log1p(std::exp(-2.0 * kd)), d - d_star);
  row.log_mid = std::exp(d * std::log(2.0) - 2.0 * kd);
  row.log_rhs = std::exp(-static_cast<double>(k));
  row.pass = row.log_lhs <= row.log_mid * (1.0 + 1e-12) && row.log_mid <= row.log_rhs * (1.0 + 1e-12);
  return row;
}

struct TruncCorResult {
  std::vector<TruncCorRow> failures;
  std::size_t points = 0;
  bool pass = true;
};

inline TruncCorResult trunccor_arithmetic_check(int k_max = 20, int d_max = 20, int d_star_min = 2) {
  TruncCorResult r;
  for (int k = 1; k <= k_max; ++k)
    for (int d = 1; d <= d_max; ++d)
      for (int ds = d_star_min; ds <= d; ++ds) {
        const auto row = trunccor_point(k, d, ds);
        ++r.points;
        if (!row.pass) {
          r.failures.push_back(row);
          r.pass = false;
        }
      }
  return r;
}

}  // namespace thorp
