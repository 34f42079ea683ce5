#pragma once

// Enumerated state spaces for exact kernels.
//
// States are stored as a vector of 32-bit values whose meaning depends on the
// chain: for the full chain it is the occupant array (position -> card); for
// the single-card and k-subset chains it is the sorted list of occupied
// positions. Indices use the Lehmer code for permutations and colex
// combinatorial ranking for subsets, so a single card at position x has
// index x.

#include <cstdint>
#include <string>
#include <vector>

#include "thorp/errors.hpp"
#include "thorp/shuffle.hpp"

namespace thorp {

enum class ChainKind { full, card, subset };

using ChainState = std::vector<std::uint32_t>;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r >> 64) throw size_error("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t factorial(std::uint64_t n) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (r > UINT64_MAX / i) throw size_error("factorial overflows 64 bits");
    r *= i;
  }
  return r;
}

struct StateSpaceSpec {
  ChainKind kind = ChainKind::full;
  int d = 1;
  int k = 1;  // subset size; 1 for the single-card chain

  static StateSpaceSpec full(int d) { return checked({ChainKind::full, d, 0}); }
  static StateSpaceSpec card(int d) { return checked({ChainKind::card, d, 1}); }
  static StateSpaceSpec subset(int d, int k) { return checked({ChainKind::subset, d, k}); }

  static StateSpaceSpec checked(StateSpaceSpec s) {
    check_dimension(s.d);
    if (s.kind == ChainKind::full) {
      require(s.d <= 3, "full permutation chains are limited to d <= 3");
    } else {
      require(s.d <= 6, "subset chains are limited to d <= 6");
      require(s.k >= 1 && s.k <= static_cast<int>(deck_size(s.d)), "subset size k must be in [1, 2^d]");
    }
    return s;
  }

  std::uint64_t size() const {
    if (kind == ChainKind::full) return factorial(deck_size(d));
    return binomial(deck_size(d), static_cast<std::uint64_t>(k));
  }

  std::string name() const {
    switch (kind) {
      case ChainKind::full: return "full(d=" + std::to_string(d) + ")";
      case ChainKind::card: return "card(d=" + std::to_string(d) + ")";
      case ChainKind::subset:
        return "subset(d=" + std::to_string(d) + ",k=" + std::to_string(k) + ")";
    }
    return "?";
  }

  /// Parses full | card | subset:k.
  static StateSpaceSpec parse(const std::string& text, int d) {
    if (text == "full") return full(d);
    if (text == "card") return card(d);
    if (text.rfind("subset:", 0) == 0) {
      try {
        return subset(d, std::stoi(text.substr(7)));
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const contract_error*>(&e)) throw;
      }
    }
    throw contract_error("unknown chain '" + text + "'");
  }

  friend bool operator==(const StateSpaceSpec& a, const StateSpaceSpec& b) {
    return a.kind == b.kind && a.d == b.d && (a.kind == ChainKind::full || a.k == b.k);
  }

  /// Starting state used where one is needed: identity deck or {0..k-1}.
  ChainState initial_state() const {
    ChainState s(kind == ChainKind::full ? deck_size(d) : static_cast<std::size_t>(k));
    for (std::uint32_t i = 0; i < s.size(); ++i) s[i] = i;
    return s;
  }

  std::uint64_t encode(const ChainState& state) const {
    if (kind == ChainKind::full) return lehmer_rank(state);
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < state.size(); ++i) r += binomial(state[i], i + 1);
    return r;
  }

  ChainState decode(std::uint64_t index) const {
    require(index < size(), "state index out of range");
    if (kind == ChainKind::full) return lehmer_unrank(index);
    ChainState s(static_cast<std::size_t>(k));
    std::uint64_t rest = index;
    std::uint32_t upper = deck_size(d);
    for (int i = k; i >= 1; --i) {
      std::uint32_t c = upper - 1;
      while (binomial(c, static_cast<std::uint64_t>(i)) > rest) --c;
      s[static_cast<std::size_t>(i - 1)] = c;
      rest -= binomial(c, static_cast<std::uint64_t>(i));
      upper = c;
    }
    return s;
  }

 private:
  std::uint64_t lehmer_rank(const ChainState& perm) const {
    const std::size_t n = perm.size();
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t smaller = 0;
      for (std::size_t j = i + 1; j < n; ++j) smaller += perm[j] < perm[i];
      r = r * (n - i) + smaller;
    }
    return r;
  }

  ChainState lehmer_unrank(std::uint64_t index) const {
    const std::size_t n = deck_size(d);
    std::vector<std::uint64_t> digits(n);
    for (std::size_t i = n; i-- > 0;) {
      const std::uint64_t base = n - i;
      digits[i] = index % base;
      index /= base;
    }
    std::vector<std::uint32_t> pool(n);
    for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    ChainState perm(n);
    for (std::size_t i = 0; i < n; ++i) {
      perm[i] = pool[digits[i]];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digits[i]));
    }
    return perm;
  }
};

}  // namespace thorp
