#pragma once

// Normalized l1/l2 calculus on functions V -> [0,1], and numerical checks of
// the inequalities used to bound the root profile.
//
// All norms carry the 1/|V| factor:
//   ||f||_1 = mean f,  ||f||_2^2 = <f, f> = mean f^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "thorp/dense.hpp"
#include "thorp/errors.hpp"
#include "thorp/evolving_sets.hpp"

namespace thorp {

class FuncVector {
 public:
  FuncVector() = default;
  explicit FuncVector(std::vector<double> values) : v_(std::move(values)) {
    for (double x : v_) require(x >= 0.0 && x <= 1.0, "function values must lie in [0, 1]");
  }

  static FuncVector constant(std::size_t n, double c) { return FuncVector(std::vector<double>(n, c)); }
  static FuncVector indicator(const StateSet& s) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i] ? 1.0 : 0.0;
    return FuncVector(std::move(v));
  }

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> v_;
};

inline double l1(const FuncVector& f) {
  require(f.size() > 0, "empty function");
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s / static_cast<double>(f.size());
}

inline double inner(const FuncVector& f, const FuncVector& g) {
  require(f.size() == g.size() && f.size() > 0, "function size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s / static_cast<double>(f.size());
}

inline double l2_squared(const FuncVector& f) { return inner(f, f); }

struct Norms {
  double l1 = 0.0;
  double l2_squared = 0.0;
  double inner_self = 0.0;
};

inline Norms norms(const FuncVector& f) {
  double s1 = 0.0, s2 = 0.0;
  for (double x : f.values()) {
    s1 += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(f.size());
  return {s1 / n, s2 / n, inner(f, f)};
}

// Rounding can push a stochastic average a hair outside [0,1].
inline double unit_clamp(double x) { return std::clamp(x, 0.0, 1.0); }

/// (K f)(x) = sum_y K(x, y) f(y).
template <class Kernel>
FuncVector apply(const Kernel& op, const FuncVector& f) {
  require(op.size() == f.size(), "kernel and function sizes differ");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < op.size(); ++x)
    op.for_each_entry(x, [&](std::size_t y, const auto& p) { out[x] += to_double(p) * f[y]; });
  for (double& v : out) v = unit_clamp(v);
  return FuncVector(std::move(out));
}

/// (K^t f)(y) = sum_x K(x, y) f(x); K^t 1_S = p(S, .).
template <class Kernel>
FuncVector apply_transpose(const Kernel& op, const FuncVector& f) {
  require(op.size() == f.size(), "kernel and function sizes differ");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < op.size(); ++x) {
    if (f[x] == 0.0) continue;
    op.for_each_entry(x, [&](std::size_t y, const auto& p) { out[y] += to_double(p) * f[x]; });
  }
  for (double& v : out) v = unit_clamp(v);
  return FuncVector(std::move(out));
}

/// K-hat^n g with K-hat = K K^t, by repeated application.
template <class Kernel>
FuncVector apply_khat_power(const Kernel& op, FuncVector g, int n) {
  for (int i = 0; i < n; ++i) g = apply(op, apply_transpose(op, g));
  return g;
}

// ---------------------------------------------------------------------------

struct InequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

inline constexpr double kInequalityTol = 1e-10;
inline constexpr double kEqualityTol = 1e-12;

/// ||K^t g||_2^2 <= <g,g>^(1-1/n) <K-hat^n g, g>^(1/n).
template <class Kernel>
InequalityResult peres_lemma_check(const Kernel& op, const FuncVector& g, int n) {
  require(n >= 1, "Peres check needs n >= 1");
  InequalityResult r;
  r.lhs = l2_squared(apply_transpose(op, g));
  const double gg = inner(g, g);
  const double khat = std::max(0.0, inner(apply_khat_power(op, g, n), g));
  const double inv = 1.0 / static_cast<double>(n);
  r.rhs = std::pow(gg, 1.0 - inv) * std::pow(khat, inv);
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs + kInequalityTol;
  return r;
}

/// For X on [0,1] with mean mu <= 1/2 and p > 1:
/// E(X^p)/mu^p - 1 <= (mu^(1-p) - 1) E|X - mu| / mu.
inline InequalityResult ball_lemma_check(const std::vector<double>& values,
                                         const std::vector<double>& probs, double p) {
  require(!values.empty() && values.size() == probs.size(), "support and weights must match");
  require(p > 1.0, "Ball check needs p > 1");
  double total = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 0.0 && values[i] <= 1.0, "support must lie in [0, 1]");
    require(probs[i] >= 0.0, "weights must be nonnegative");
    total += probs[i];
    mu += probs[i] * values[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "weights must sum to 1");
  require(mu > 0.0 && mu <= 0.5 + 1e-15, "Ball check needs 0 < E X <= 1/2");
  double moment = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    moment += probs[i] * std::pow(values[i], p);
    dev += probs[i] * std::abs(values[i] - mu);
  }
  InequalityResult r;
  r.lhs = moment / std::pow(mu, p) - 1.0;
  r.rhs = (std::pow(mu, 1.0 - p) - 1.0) * dev / mu;
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs + kInequalityTol;
  return r;
}

// ---------------------------------------------------------------------------

struct ContractionReport {
  StateSet set;
  double x = 0.0;          // ||1_S||_1
  double alpha = 0.0;      // ||p(S,.)||_2^2 / ||1_S||_1
  double delta = 0.0;      // 1 - alpha
  double l2_squared = 0.0; // ||K^t 1_S||_2^2
  double epsilon = 0.0;    // log(l2_squared) / log(x) - 1
  bool pass = false;       // alpha <= 1 and delta >= 0
};

template <class Kernel>
ContractionReport contraction_report(const Kernel& op, const StateSet& s) {
  const std::size_t size = set_size(s);
  require(s.size() == op.size(), "set and kernel sizes differ");
  require(size > 0 && size < s.size(), "contraction report needs a proper nonempty set");
  const FuncVector ind = FuncVector::indicator(s);
  ContractionReport r;
  r.set = s;
  r.x = l1(ind);
  r.l2_squared = l2_squared(apply_transpose(op, ind));
  r.alpha = r.l2_squared / r.x;
  r.delta = 1.0 - r.alpha;
  r.epsilon = std::log(r.l2_squared) / std::log(r.x) - 1.0;
  r.pass = r.alpha <= 1.0 + kEqualityTol && r.delta >= -kEqualityTol;
  return r;
}

/// (||h||_1 - ||K^t h||_2^2) - (||f||_1 - ||K^t f||_2^2) for h = 1 - f; zero.
template <class Kernel>
double complement_identity_gap(const Kernel& op, const FuncVector& f) {
  std::vector<double> hv(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) hv[i] = 1.0 - f[i];
  const FuncVector h(std::move(hv));
  const double lhs = l1(h) - l2_squared(apply_transpose(op, h));
  const double rhs = l1(f) - l2_squared(apply_transpose(op, f));
  return lhs - rhs;
}

// ---------------------------------------------------------------------------
// Random doubly stochastic kernels and sweeps.

/// Convex combination of 3..10 random permutation matrices, Dirichlet(1) weights.
template <class Rng>
DenseKernel random_birkhoff_kernel(std::size_t n, Rng& rng) {
  require(n >= 1, "kernel needs at least one state");
  std::uniform_int_distribution<int> count_pick(3, 10);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  const int count = count_pick(rng);
  std::vector<double> w(count);
  double total = 0.0;
  for (double& x : w) total += (x = gamma(rng));
  std::vector<std::size_t> perm(n);
  DenseKernel k(n);
  for (int c = 0; c < count; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t x = 0; x < n; ++x) k(x, perm[x]) += w[c] / total;
  }
  return k;
}

template <class Rng>
FuncVector random_function(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return FuncVector(std::move(v));
}

inline DenseKernel permutation_kernel(const std::vector<std::size_t>& perm) {
  DenseKernel k(perm.size());
  for (std::size_t x = 0; x < perm.size(); ++x) k(x, perm.at(x)) = 1.0;
  return k;
}

struct SweepRow {
  std::uint64_t instance = 0;
  std::size_t size = 0;
  double param = 0.0;  // n for Peres, p for Ball
  InequalityResult result;
};

struct Sweep {
  std::vector<SweepRow> rows;
  bool pass = true;
  double min_margin = 0.0;
};

inline void add_row(Sweep& s, SweepRow row) {
  s.min_margin = s.rows.empty() ? row.result.margin : std::min(s.min_margin, row.result.margin);
  s.pass = s.pass && row.result.pass;
  s.rows.push_back(row);
}

/// Random Birkhoff kernels of sizes 2..8, random g, n in 1..5.
inline Sweep peres_sweep(std::uint64_t instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size_pick(2, 8);
  std::uniform_int_distribution<int> n_pick(1, 5);
  Sweep sweep;
  for (std::uint64_t i = 0; i < instances; ++i) {
    const std::size_t size = size_pick(rng);
    const DenseKernel k = random_birkhoff_kernel(size, rng);
    const FuncVector g = random_function(size, rng);
    const int n = n_pick(rng);
    add_row(sweep, {i, size, static_cast<double>(n), peres_lemma_check(k, g, n)});
  }
  return sweep;
}

/// Random finite-support X (1..8 atoms) scaled to mean <= 1/2, p in (1, 3].
inline Sweep ball_sweep(std::uint64_t instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> atoms_pick(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Sweep sweep;
  for (std::uint64_t i = 0; i < instances; ++i) {
    const std::size_t atoms = atoms_pick(rng);
    std::vector<double> values(atoms), probs(atoms);
    double total = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) {
      values[a] = u(rng);
      total += (probs[a] = gamma(rng));
    }
    double mu = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) {
      probs[a] /= total;
      mu += probs[a] * values[a];
    }
    if (mu > 0.5) {
      const double scale = 0.5 / mu * (1.0 - u(rng));
      for (double& v : values) v *= scale;
    }
    if (mu == 0.0) values[0] = 0.5;  // keep mu positive
    double fix = 0.0;
    for (double p : probs) fix += p;
    probs.back() += 1.0 - fix;
    const double p = 3.0 - 2.0 * u(rng);
    add_row(sweep, {i, atoms, p, ball_lemma_check(values, probs, p)});
  }
  return sweep;
}

/// 1/2 sqrt(1+u) + 1/2 sqrt(1-u) <= exp(-u^2/8) on an even grid of [0,1].
inline InequalityResult root_average_grid(std::size_t points) {
  InequalityResult worst{0, 0, 1e300, true};
  for (std::size_t i = 0; i < points; ++i) {
    const double u = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const double lhs = 0.5 * std::sqrt(1.0 + u) + 0.5 * std::sqrt(1.0 - u);
    const double rhs = std::exp(-u * u / 8.0);
    if (rhs - lhs < worst.margin) worst = {lhs, rhs, rhs - lhs, lhs <= rhs + kEqualityTol};
  }
  worst.pass = worst.margin >= -kEqualityTol;
  return worst;
}

/// (1 - D^2)^(1/4) <= 1 - D^2/4 on an even grid of [0,1].
inline InequalityResult quartic_root_grid(std::size_t points) {
  InequalityResult worst{0, 0, 1e300, true};
  for (std::size_t i = 0; i < points; ++i) {
    const double dlt = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const double lhs = std::pow(1.0 - dlt * dlt, 0.25);
    const double rhs = 1.0 - dlt * dlt / 4.0;
    if (rhs - lhs < worst.margin) worst = {lhs, rhs, rhs - lhs, true};
  }
  worst.pass = worst.margin >= -kEqualityTol;
  return worst;
}

}  // namespace thorp
