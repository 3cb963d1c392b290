#pragma once

#include <stdexcept>
#include <string>

namespace chainbound {

// Thrown when a problem, graph, embedding or configuration breaks a
// structural invariant (bad indices, disconnected chain, length mismatch).
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an exhaustive routine would exceed its enumeration cap.
struct size_cap_error : std::runtime_error {
  explicit size_cap_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a numeric constraint on inputs is violated (sum constraint,
// sign of a chain strength, parameter out of range).
struct constraint_error : std::runtime_error {
  explicit constraint_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File or format level failure.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace chainbound
