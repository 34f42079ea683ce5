#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

#include "thorp/errors.hpp"

namespace thorp {

/// Exact non-negative rational with a power-of-two denominator, num / 2^exp.
///
/// Every single-step probability of a ringing-edge kernel has this form, so
/// one-round operators and the evolving-set threshold integrals can be carried
/// out with no rounding at all. Values are kept in lowest terms (num odd or
/// exp == 0) so that equality is structural.
class Dyadic {
 public:
  static constexpr int kMaxExponent = 62;

  constexpr Dyadic() = default;
  constexpr Dyadic(std::uint64_t num, int exp) : num_(num), exp_(exp) { normalize(); }

  static constexpr Dyadic zero() { return {}; }
  static constexpr Dyadic one() { return {1, 0}; }
  static constexpr Dyadic integer(std::uint64_t n) { return {n, 0}; }
  /// 2^-k.
  static Dyadic pow2_inverse(int k) {
    check_exponent(k);
    return {1, k};
  }

  constexpr std::uint64_t numerator() const { return num_; }
  constexpr int exponent() const { return exp_; }
  constexpr bool is_zero() const { return num_ == 0; }

  double to_double() const {
    double v = static_cast<double>(num_);
    for (int i = 0; i < exp_; ++i) v *= 0.5;
    return v;
  }

  /// Multiply by 2^-k.
  Dyadic halved(int k) const {
    if (num_ == 0) return {};
    check_exponent(exp_ + k);
    return {num_, exp_ + k};
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
    const unsigned __int128 sum = a.scaled(e) + b.scaled(e);
    return from_wide(sum, e);
  }

  /// Requires a >= b.
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) {
    const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
    const unsigned __int128 x = a.scaled(e);
    const unsigned __int128 y = b.scaled(e);
    if (y > x) throw contract_error("Dyadic subtraction would go negative");
    return from_wide(x - y, e);
  }

  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a.num_) * b.num_;
    return from_wide(prod, a.exp_ + b.exp_);
  }

  Dyadic& operator+=(const Dyadic& other) { return *this = *this + other; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num_ == b.num_ && a.exp_ == b.exp_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
    const unsigned __int128 x = a.scaled(e);
    const unsigned __int128 y = b.scaled(e);
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    if (exp_ == 0) return std::to_string(num_);
    return std::to_string(num_) + "/2^" + std::to_string(exp_);
  }

 private:
  static void check_exponent(int e) {
    if (e > kMaxExponent) throw size_error("Dyadic denominator exceeds 2^62");
  }

  unsigned __int128 scaled(int e) const {
    return static_cast<unsigned __int128>(num_) << (e - exp_);
  }

  static Dyadic from_wide(unsigned __int128 v, int e) {
    if (v == 0) return {};
    while (e > 0 && (v & 1) == 0) {
      v >>= 1;
      --e;
    }
    if (v >> 64) throw size_error("Dyadic numerator overflow");
    check_exponent(e);
    Dyadic out;
    out.num_ = static_cast<std::uint64_t>(v);
    out.exp_ = e;
    return out;
  }

  constexpr void normalize() {
    if (num_ == 0) {
      exp_ = 0;
      return;
    }
    while (exp_ > 0 && (num_ & 1) == 0) {
      num_ >>= 1;
      --exp_;
    }
  }

  std::uint64_t num_ = 0;
  int exp_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Dyadic& v) { return os << v.str(); }

inline double to_double(const Dyadic& v) { return v.to_double(); }
inline double to_double(double v) { return v; }

}  // namespace thorp
