#include "contention/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "contention/errors.hpp"

namespace contention {

RandomStream block_stream(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return RandomStream(seq);
}

SlotSample make_sample(std::vector<double> gains) {
  SlotSample s;
  s.gains = std::move(gains);
  s.order_stats = s.gains;
  std::sort(s.order_stats.begin(), s.order_stats.end());
  return s;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

ChannelModel ChannelModel::iid_uniform(int users) {
  if (users < 2) throw DomainError("channel needs N >= 2");
  ChannelModel c;
  c.kind_ = Kind::iid_uniform;
  c.users_ = users;
  return c;
}

ChannelModel ChannelModel::constant(int users) {
  ChannelModel c = iid_uniform(users);
  c.kind_ = Kind::constant;
  return c;
}

ChannelModel ChannelModel::discrete_joint(std::vector<std::vector<double>> states,
                                          std::vector<double> probs) {
  if (states.empty()) throw DomainError("discrete channel needs at least one state");
  if (states.size() != probs.size()) {
    throw DomainError("discrete channel: states and probabilities differ in length");
  }
  const std::size_t n = states.front().size();
  if (n < 2) throw DomainError("channel needs N >= 2");
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (s.size() != n) throw DomainError("discrete channel: states differ in user count");
    if (!(probs[i] >= 0.0)) throw DomainError("discrete channel: negative probability");
    for (double g : s) {
      if (!std::isfinite(g)) throw DomainError("discrete channel: non-finite gain");
    }
    const double top = *std::max_element(s.begin(), s.end());
    if (std::count(s.begin(), s.end(), top) != 1) {
      std::ostringstream os;
      os << "discrete channel: state " << i << " has no unique maximiser";
      throw DomainError(os.str());
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "discrete channel: probabilities sum to " << total;
    throw DomainError(os.str());
  }
  ChannelModel c;
  c.kind_ = Kind::discrete_joint;
  c.users_ = static_cast<int>(n);
  c.states_ = std::move(states);
  c.probs_ = std::move(probs);
  return c;
}

std::string ChannelModel::name() const {
  switch (kind_) {
    case Kind::iid_uniform: return "iid";
    case Kind::constant: return "constant";
    case Kind::discrete_joint: return "discrete";
  }
  return "unknown";
}

ChannelModel chain_channel(std::size_t k, double epsilon) {
  if (k < 1) throw DomainError("chain channel needs k >= 1");
  std::vector<std::vector<double>> states;
  std::vector<double> probs;
  const double kd = static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double hi = 2.0 * j + 4.0;
    const double lo = 2.0 * j + 2.0;
    states.push_back(j % 2 == 0 ? std::vector<double>{hi, lo} : std::vector<double>{lo, hi});
    if (j + 1 < k) {
      probs.push_back(1.0 / kd - static_cast<double>(k - 1 - j) * epsilon);
    } else {
      probs.push_back(1.0 / kd + epsilon * kd * (kd - 1.0) / 2.0);
    }
  }
  return ChannelModel::discrete_joint(std::move(states), std::move(probs));
}

ChannelModel correlated_example_channel(double epsilon) { return chain_channel(7, epsilon); }

SlotSample sample_slot(const ChannelModel& channel, RandomStream& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto n = static_cast<std::size_t>(channel.users());
  switch (channel.kind()) {
    case ChannelModel::Kind::iid_uniform: {
      std::vector<double> g(n);
      for (auto& x : g) x = uniform(rng);
      return make_sample(std::move(g));
    }
    case ChannelModel::Kind::constant: {
      SlotSample s = make_sample(std::vector<double>(n, 1.0));
      s.auxiliary.resize(n);
      for (auto& x : s.auxiliary) x = uniform(rng);
      return s;
    }
    case ChannelModel::Kind::discrete_joint: {
      const auto& probs = channel.probabilities();
      const double u = uniform(rng);
      double acc = 0.0;
      std::size_t pick = probs.size() - 1;
      while (pick > 0 && probs[pick] == 0.0) --pick;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      SlotSample s = make_sample(channel.states()[pick]);
      s.state = pick;
      return s;
    }
  }
  throw DomainError("unknown channel kind");
}

}  // namespace contention
