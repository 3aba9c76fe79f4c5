#pragma once

#include <stdexcept>
#include <string>

namespace wproj {

// Invalid user input: malformed measures, dimension mismatches, bad parameters.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// An instance exceeds a configured size cap (support explosion, LP too large).
class SizeError : public std::runtime_error {
 public:
  explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver (singularity, iteration cap).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate experiment setup (e.g. all sampled distances are zero).
class ExperimentError : public std::runtime_error {
 public:
  explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wproj
