#pragma once

#include <stdexcept>
#include <string>

namespace thorp {

// Precondition violated by the caller (bad direction, unknown card, ...).
class contract_error : public std::invalid_argument {
 public:
  explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

// An exact computation would exceed its configured size cap.
class size_error : public std::runtime_error {
 public:
  explicit size_error(const std::string& what) : std::runtime_error(what) {}
};

// An iteration did not converge within its cap.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw contract_error(message);
}

}  // namespace thorp
