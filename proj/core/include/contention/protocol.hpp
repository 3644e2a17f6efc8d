#pragma once

// What travels between the base station and a strategy: probe sets out,
// ternary feedback in.

#include <array>
#include <cstddef>
#include <memory>
#include <functional>
#include <span>
#include <string>
#include <variant>

namespace contention {

enum class Feedback : char { idle = '0', success = '1', collision = 'e' };

char symbol(Feedback f);
Feedback feedback_from_count(std::size_t transmitters);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  bool lower_closed = false;
  bool upper_closed = true;

  bool contains(double x) const {
    const bool above = lower_closed ? x >= lower : x > lower;
    const bool below = upper_closed ? x <= upper : x < upper;
    return above && below;
  }
};

/// A union of at most two disjoint intervals.
class Probe {
 public:
  /// (lower, upper]
  static Probe upper_open(double lower, double upper);
  /// [lower, upper)
  static Probe lower_closed(double lower, double upper);
  static Probe union_of(const Interval& first, const Interval& second);

  std::span<const Interval> parts() const { return {parts_.data(), count_}; }
  bool contains(double x) const;
  std::string to_string() const;

 private:
  std::array<Interval, 2> parts_{};
  std::size_t count_ = 0;
};

/// Announce a winner without probing.
struct Declare {
  std::size_t user = 0;
};

using Action = std::variant<Probe, Declare>;

/// Number of values inside the probe mapped to 0 / 1 / e.
Feedback feedback_for(const Probe& probe, std::span<const double> values);

/// A single-slot contention policy. It sees only feedback, never the
/// sample; a fresh instance is used for every slot.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual Action begin() = 0;
  /// Called after every non-success feedback.
  virtual Action next(Feedback feedback) = 0;
};

using StrategyFactory = std::function<std::unique_ptr<Strategy>()>;

struct NamedStrategy {
  std::string name;
  StrategyFactory make;
};

}  // namespace contention
