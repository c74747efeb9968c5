#pragma once

#include <stdexcept>
#include <string>

namespace besim {

// Violated precondition or internal wiring bug.
struct contract_error : std::logic_error {
  explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed or inconsistent input data (files, labels, configs).
struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or diverged optimization.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw contract_error(msg);
}

inline void require_data(bool cond, const std::string& msg) {
  if (!cond) throw data_error(msg);
}

}  // namespace besim
