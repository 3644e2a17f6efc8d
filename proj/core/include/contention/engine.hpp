#pragma once

// Slotted ternary-feedback contention engine.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "contention/channel.hpp"
#include "contention/protocol.hpp"

namespace contention {

inline constexpr int kDefaultMaxMinislots = 64;

struct ProbeRecord {
  Probe probe;
  Feedback feedback = Feedback::idle;
};

struct SlotTrace {
  std::vector<ProbeRecord> probes;
  std::optional<std::size_t> winner;
  int minislots_used = 0;
  bool declared_without_probe = false;

  bool resolved() const { return winner.has_value(); }
  /// Feedback symbols in order, e.g. "e01".
  std::string transcript() const;
};

/// Runs one slot on a fixed sample: probe, feedback, strategy update,
/// until success, a declaration, or max_minislots probes.
SlotTrace run_slot(const SlotSample& sample, Strategy& strategy, int max_minislots);

SlotTrace run_slot(const ChannelModel& channel, Strategy& strategy, int max_minislots,
                   RandomStream& rng);

struct BatchConfig {
  std::uint64_t slots = 1'000'000;
  int max_minislots = kDefaultMaxMinislots;
  std::uint64_t seed = 42;
  /// 0 = one per hardware thread.
  unsigned workers = 0;
};

struct BatchStats {
  int n_users = 0;
  std::string channel;
  std::string strategy;
  std::uint64_t slots = 0;
  int max_minislots = 0;
  std::uint64_t seed = 0;
  std::uint64_t resolved = 0;
  /// Mean minislots over resolved slots.
  double mean_delay_conditional = 0.0;
  /// Mean minislots with unresolved slots charged max_minislots.
  double mean_delay_charged = 0.0;
  /// Standard error of mean_delay_conditional.
  double delay_stderr = 0.0;
  double success_rate = 0.0;
  /// Plug-in entropy of the per-slot transcript distribution, bits.
  double empirical_codeword_entropy = 0.0;

  friend bool operator==(const BatchStats&, const BatchStats&) = default;
};

/// Called once per slot in slot order. Setting an observer forces a single
/// worker.
using SlotObserver =
    std::function<void(std::uint64_t slot, const SlotSample& sample, const SlotTrace& trace)>;

BatchStats run_batch(const ChannelModel& channel, const NamedStrategy& strategy,
                     const BatchConfig& config, const SlotObserver& observer = {});

std::string batch_csv_header();
/// n_users,channel,strategy,slots,K,seed,mean_delay_conditional,
/// mean_delay_charged,success_rate,empirical_entropy_bits
std::string batch_csv_row(const BatchStats& stats);

/// One JSON-lines record for the trace export.
nlohmann::json trace_to_json(std::uint64_t slot, const SlotSample& sample, const SlotTrace& trace);

/// Locale-independent shortest round-trip formatting.
std::string format_double(double value);

}  // namespace contention
