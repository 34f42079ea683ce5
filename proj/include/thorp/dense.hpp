#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "thorp/errors.hpp"

namespace thorp {

// Row-major square matrix of transition probabilities K(x, y).
class DenseKernel {
 public:
  using value_type = double;

  DenseKernel() = default;
  explicit DenseKernel(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  static DenseKernel identity(std::size_t n) {
    DenseKernel k(n);
    for (std::size_t i = 0; i < n; ++i) k(i, i) = 1.0;
    return k;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t x, std::size_t y) { return a_[x * n_ + y]; }
  double operator()(std::size_t x, std::size_t y) const { return a_[x * n_ + y]; }

  template <class Fn>
  void for_each_entry(std::size_t x, Fn&& fn) const {
    for (std::size_t y = 0; y < n_; ++y) {
      if (a_[x * n_ + y] != 0.0) fn(y, a_[x * n_ + y]);
    }
  }

  DenseKernel transpose() const {
    DenseKernel t(n_);
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y) t(y, x) = (*this)(x, y);
    return t;
  }

  friend DenseKernel operator*(const DenseKernel& a, const DenseKernel& b) {
    require(a.n_ == b.n_, "kernel size mismatch");
    DenseKernel c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  bool is_doubly_stochastic(double tol = 1e-12) const {
    for (std::size_t x = 0; x < n_; ++x) {
      double row = 0.0, col = 0.0;
      for (std::size_t y = 0; y < n_; ++y) {
        if ((*this)(x, y) < 0.0) return false;
        row += (*this)(x, y);
        col += (*this)(y, x);
      }
      if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol) return false;
    }
    return true;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = x + 1; y < n_; ++y)
        if (std::abs((*this)(x, y) - (*this)(y, x)) > tol) return false;
    return true;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

}  // namespace thorp
