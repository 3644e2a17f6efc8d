#include "contention/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "contention/errors.hpp"

namespace contention {
namespace {

void check_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream os;
    os << what << " needs 0 < x < 1, got " << x;
    throw DomainError(os.str());
  }
}

}  // namespace

double n2_delay(double x) {
  check_open_unit(x, "n2_delay");
  return 1.0 / (2.0 * x * (1.0 - x));
}

double n2_entropy(double x) {
  check_open_unit(x, "n2_entropy");
  const double s = 2.0 * x * (1.0 - x);
  const double hi = x * x;
  const double lo = (1.0 - x) * (1.0 - x);
  return (-s * std::log2(s) - hi * std::log2(hi) - lo * std::log2(lo)) / s;
}

MonteCarloEstimate mc_event_frequency(const SamplePredicate& event, const ChannelModel& channel,
                                      std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("mc_event_frequency needs trials >= 1");
  MonteCarloEstimate est;
  est.trials = trials;
  for (std::uint64_t block = 0; block * kSlotsPerStream < trials; ++block) {
    RandomStream rng = block_stream(seed, block);
    const std::uint64_t end = std::min(trials, (block + 1) * kSlotsPerStream);
    for (std::uint64_t i = block * kSlotsPerStream; i < end; ++i) {
      if (event(sample_slot(channel, rng))) ++est.hits;
    }
  }
  const double n = static_cast<double>(trials);
  est.frequency = static_cast<double>(est.hits) / n;
  est.standard_error = std::sqrt(est.frequency * (1.0 - est.frequency) / n);
  return est;
}

DiscreteDelayReport discrete_exact_delay(const ChannelModel& channel, const StrategyFactory& make,
                                         int depth_bound) {
  if (channel.kind() != ChannelModel::Kind::discrete_joint) {
    throw DomainError("discrete_exact_delay needs a discrete joint channel");
  }
  DiscreteDelayReport report;
  const auto& states = channel.states();
  const auto& probs = channel.probabilities();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& gains = states[s];
    auto strategy = make();
    Action action = strategy->begin();
    int probes = 0;
    bool declared = false;
    while (true) {
      if (const auto* d = std::get_if<Declare>(&action)) {
        if (d->user != argmax(gains)) {
          std::ostringstream os;
          os << "strategy declared user " << d->user << " for state " << s
             << " whose best user is " << argmax(gains);
          throw std::logic_error(os.str());
        }
        declared = true;
        break;
      }
      if (probes >= depth_bound) {
        std::ostringstream os;
        os << "strategy did not terminate on state " << s << " within " << depth_bound
           << " probes";
        throw DivergenceError(os.str());
      }
      const auto& probe = std::get<Probe>(action);
      std::size_t inside = 0;
      for (double g : gains) inside += probe.contains(g) ? 1 : 0;
      ++probes;
      if (inside == 1) break;
      action = strategy->next(inside == 0 ? Feedback::idle : Feedback::collision);
    }
    report.per_state_depth.push_back(probes);
    report.declared.push_back(declared);
    report.expected_delay += probs[s] * probes;
  }
  return report;
}

}  // namespace contention
