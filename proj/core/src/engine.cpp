#include "contention/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "contention/errors.hpp"

namespace contention {

char symbol(Feedback f) { return static_cast<char>(f); }

Feedback feedback_from_count(std::size_t transmitters) {
  if (transmitters == 0) return Feedback::idle;
  if (transmitters == 1) return Feedback::success;
  return Feedback::collision;
}

Probe Probe::upper_open(double lower, double upper) {
  Probe p;
  p.parts_[0] = Interval{lower, upper, false, true};
  p.count_ = 1;
  return p;
}

Probe Probe::lower_closed(double lower, double upper) {
  Probe p;
  p.parts_[0] = Interval{lower, upper, true, false};
  p.count_ = 1;
  return p;
}

Probe Probe::union_of(const Interval& first, const Interval& second) {
  const bool disjoint = first.upper < second.lower || second.upper < first.lower ||
                        (first.upper == second.lower && !(first.upper_closed && second.lower_closed)) ||
                        (second.upper == first.lower && !(second.upper_closed && first.lower_closed));
  if (!disjoint) throw DomainError("probe intervals must be disjoint");
  Probe p;
  p.parts_[0] = first;
  p.parts_[1] = second;
  p.count_ = 2;
  return p;
}

bool Probe::contains(double x) const {
  for (const auto& part : parts()) {
    if (part.contains(x)) return true;
  }
  return false;
}

std::string Probe::to_string() const {
  std::string out;
  for (const auto& part : parts()) {
    if (!out.empty()) out += " U ";
    out += part.lower_closed ? '[' : '(';
    out += format_double(part.lower);
    out += ", ";
    out += format_double(part.upper);
    out += part.upper_closed ? ']' : ')';
  }
  return out;
}

Feedback feedback_for(const Probe& probe, std::span<const double> values) {
  std::size_t count = 0;
  for (double v : values) {
    if (probe.contains(v) && ++count >= 2) break;
  }
  return feedback_from_count(count);
}

std::string SlotTrace::transcript() const {
  std::string s;
  s.reserve(probes.size());
  for (const auto& p : probes) s += symbol(p.feedback);
  return s;
}

SlotTrace run_slot(const SlotSample& sample, Strategy& strategy, int max_minislots) {
  if (max_minislots < 1) throw DomainError("max_minislots must be >= 1");
  const auto values = sample.contention_values();
  SlotTrace trace;
  Action action = strategy.begin();
  while (true) {
    if (const auto* declare = std::get_if<Declare>(&action)) {
      trace.winner = declare->user;
      trace.declared_without_probe = true;
      break;
    }
    if (trace.minislots_used >= max_minislots) break;
    const Probe& probe = std::get<Probe>(action);
    const Feedback f = feedback_for(probe, values);
    trace.probes.push_back({probe, f});
    ++trace.minislots_used;
    if (f == Feedback::success) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (probe.contains(values[i])) {
          trace.winner = i;
          break;
        }
      }
      break;
    }
    action = strategy.next(f);
  }
  return trace;
}

SlotTrace run_slot(const ChannelModel& channel, Strategy& strategy, int max_minislots,
                   RandomStream& rng) {
  return run_slot(sample_slot(channel, rng), strategy, max_minislots);
}

namespace {

struct BlockTally {
  std::uint64_t slots = 0;
  std::uint64_t resolved = 0;
  std::uint64_t delay_sum = 0;
  std::uint64_t delay_sq_sum = 0;
  std::uint64_t charged_sum = 0;
  std::unordered_map<std::string, std::uint64_t> transcripts;
};

std::string transcript_key(const SlotTrace& trace) {
  std::string key = trace.transcript();
  if (trace.declared_without_probe) key += '*';
  if (!trace.resolved()) key += '!';
  return key;
}

void tally(BlockTally& t, const SlotTrace& trace, int max_minislots) {
  ++t.slots;
  const auto used = static_cast<std::uint64_t>(trace.minislots_used);
  if (trace.resolved()) {
    ++t.resolved;
    t.delay_sum += used;
    t.delay_sq_sum += used * used;
    t.charged_sum += used;
  } else {
    t.charged_sum += static_cast<std::uint64_t>(max_minislots);
  }
  ++t.transcripts[transcript_key(trace)];
}

BlockTally run_block(const ChannelModel& channel, const StrategyFactory& make, std::uint64_t block,
                     std::uint64_t slots, const BatchConfig& config, const SlotObserver& observer) {
  BlockTally t;
  RandomStream rng = block_stream(config.seed, block);
  const std::uint64_t first = block * kSlotsPerStream;
  const std::uint64_t last = std::min(slots, first + kSlotsPerStream);
  for (std::uint64_t slot = first; slot < last; ++slot) {
    const SlotSample sample = sample_slot(channel, rng);
    auto strategy = make();
    const SlotTrace trace = run_slot(sample, *strategy, config.max_minislots);
    tally(t, trace, config.max_minislots);
    if (observer) observer(slot, sample, trace);
  }
  return t;
}

}  // namespace

BatchStats run_batch(const ChannelModel& channel, const NamedStrategy& strategy,
                     const BatchConfig& config, const SlotObserver& observer) {
  if (config.slots < 1) throw DomainError("run_batch needs slots >= 1");
  if (config.max_minislots < 1) throw DomainError("max_minislots must be >= 1");
  if (!strategy.make) throw DomainError("strategy factory is empty");

  const std::uint64_t blocks = (config.slots + kSlotsPerStream - 1) / kSlotsPerStream;
  std::vector<BlockTally> tallies(blocks);

  unsigned workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : config.workers;
  if (observer) workers = 1;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));

  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) {
      tallies[b] = run_block(channel, strategy.make, b, config.slots, config, observer);
    }
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t b = next++; b < blocks; b = next++) {
            tallies[b] = run_block(channel, strategy.make, b, config.slots, config, {});
          }
        } catch (...) {
          errors[w] = std::current_exception();
          next = blocks;
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BatchStats stats;
  stats.n_users = channel.users();
  stats.channel = channel.name();
  stats.strategy = strategy.name;
  stats.slots = config.slots;
  stats.max_minislots = config.max_minislots;
  stats.seed = config.seed;

  std::uint64_t delay_sum = 0;
  std::uint64_t delay_sq_sum = 0;
  std::uint64_t charged_sum = 0;
  std::map<std::string, std::uint64_t> transcripts;
  for (const auto& t : tallies) {
    stats.resolved += t.resolved;
    delay_sum += t.delay_sum;
    delay_sq_sum += t.delay_sq_sum;
    charged_sum += t.charged_sum;
    for (const auto& [key, count] : t.transcripts) transcripts[key] += count;
  }
  const double n = static_cast<double>(config.slots);
  stats.success_rate = static_cast<double>(stats.resolved) / n;
  stats.mean_delay_charged = static_cast<double>(charged_sum) / n;
  if (stats.resolved > 0) {
    const double r = static_cast<double>(stats.resolved);
    const double mean = static_cast<double>(delay_sum) / r;
    stats.mean_delay_conditional = mean;
    if (stats.resolved > 1) {
      const double var = (static_cast<double>(delay_sq_sum) - r * mean * mean) / (r - 1.0);
      stats.delay_stderr = std::sqrt(std::max(0.0, var) / r);
    }
  }
  double h = 0.0;
  for (const auto& [key, count] : transcripts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  stats.empirical_codeword_entropy = h;
  return stats;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string batch_csv_header() {
  return "n_users,channel,strategy,slots,K,seed,mean_delay_conditional,mean_delay_charged,"
         "success_rate,empirical_entropy_bits";
}

std::string batch_csv_row(const BatchStats& s) {
  std::ostringstream os;
  os << s.n_users << ',' << s.channel << ',' << s.strategy << ',' << s.slots << ','
     << s.max_minislots << ',' << s.seed << ',' << format_double(s.mean_delay_conditional) << ','
     << format_double(s.mean_delay_charged) << ',' << format_double(s.success_rate) << ','
     << format_double(s.empirical_codeword_entropy);
  return os.str();
}

nlohmann::json trace_to_json(std::uint64_t slot, const SlotSample& sample, const SlotTrace& trace) {
  nlohmann::json j;
  j["slot"] = slot;
  j["gains"] = sample.gains;
  if (!sample.auxiliary.empty()) j["auxiliary"] = sample.auxiliary;
  if (sample.state) j["state"] = *sample.state;
  auto& probes = j["probes"] = nlohmann::json::array();
  for (const auto& p : trace.probes) {
    probes.push_back({{"set", p.probe.to_string()}, {"feedback", std::string(1, symbol(p.feedback))}});
  }
  j["winner"] = trace.winner ? nlohmann::json(*trace.winner) : nlohmann::json(nullptr);
  j["minislots_used"] = trace.minislots_used;
  j["declared_without_probe"] = trace.declared_without_probe;
  j["transcript"] = trace.transcript();
  return j;
}

}  // namespace contention
