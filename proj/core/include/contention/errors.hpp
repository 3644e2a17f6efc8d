#pragma once

#include <stdexcept>
#include <string>

namespace contention {

/// Thrown when an argument lies outside the domain of an operation
/// (invalid region, threshold outside its region, N < 2, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A pair falls into probability mass that the codebook did not enumerate.
class UnresolvedAtCutoff : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A deterministic strategy kept probing past the replay depth bound.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace contention
