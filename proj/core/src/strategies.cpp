#include "contention/strategies.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "contention/errors.hpp"

namespace contention {

// --- OSA -------------------------------------------------------------------

OsaState osa_initial(int users) {
  if (users < 2) throw DomainError("OSA needs N >= 2");
  return OsaState{users, 0.0, 1.0 - 1.0 / users, 1.0};
}

Probe osa_probe(const OsaState& s) { return Probe::upper_open(s.y_min, s.y_max); }

OsaState osa_step(OsaState s, Feedback f) {
  if (f == Feedback::collision) {
    s.y_low = s.y_min;
    s.y_min = (s.y_min + s.y_max) / 2;
  } else if (f == Feedback::idle) {
    s.y_max = s.y_min;
    if (s.y_low != 0.0) {
      s.y_min = (s.y_low + s.y_max) / 2;
    } else {
      s.y_min = s.y_max * (1.0 - 1.0 / s.users);
    }
  }
  return s;
}

Action OsaStrategy::next(Feedback f) {
  state_ = osa_step(state_, f);
  return osa_probe(state_);
}

// --- MPA -------------------------------------------------------------------

MpaState mpa_initial(int users) { return MpaState{make_region(0.0, 1.0, users), 0}; }

Probe mpa_probe(const MpaState& s) {
  return Probe::upper_open(optimal_threshold(s.region), s.region.upper);
}

MpaState mpa_step(MpaState s, Feedback f) {
  if (f == Feedback::success) return s;
  const double y = optimal_threshold(s.region);
  s.region = f == Feedback::collision ? collision_child(s.region, y) : idle_child(s.region, y);
  ++s.depth;
  return s;
}

MpaStrategy::MpaStrategy(int users, std::shared_ptr<const Codebook> tree)
    : tree_(std::move(tree)), state_(mpa_initial(users)) {
  if (tree_ && (tree_->users() != users || tree_->nodes().empty())) {
    throw DomainError("MPA tree does not match the number of users");
  }
  node_ = tree_ ? 0 : -1;
}

double MpaStrategy::current_threshold() const {
  if (node_ >= 0) return tree_->nodes()[node_].threshold;
  return optimal_threshold(state_.region);
}

Action MpaStrategy::begin() { return Probe::upper_open(current_threshold(), state_.region.upper); }

Action MpaStrategy::next(Feedback f) {
  if (f == Feedback::success) return begin();
  const double y = current_threshold();
  const bool collided = f == Feedback::collision;
  state_.region = collided ? collision_child(state_.region, y) : idle_child(state_.region, y);
  ++state_.depth;
  if (node_ >= 0) {
    const auto& node = tree_->nodes()[node_];
    node_ = collided ? node.collision : node.idle;
  }
  // Past ~50 halvings the region collapses to a point; probe the empty set.
  if (node_ < 0 && state_.region.empty()) {
    return Probe::upper_open(state_.region.upper, state_.region.upper);
  }
  return Probe::upper_open(current_threshold(), state_.region.upper);
}

// --- Two-sided -------------------------------------------------------------

namespace {

double restart_point(const TwoSidedState& s) {
  return s.y_low + (s.y_max - s.y_low) * (1.0 - 1.0 / s.users);
}

}  // namespace

TwoSidedState two_sided_initial(int users) {
  if (users < 2 || users > 3) {
    throw DomainError("two-sided strategy is defined for N = 2 or N = 3");
  }
  TwoSidedState s;
  s.users = users;
  s.y_min = 1.0 - 1.0 / users;
  return s;
}

Probe two_sided_probe(const TwoSidedState& s) {
  return s.phase == TwoSidedState::Phase::upper ? Probe::upper_open(s.y_min, s.y_max)
                                                : Probe::lower_closed(s.y_low, s.y_min);
}

TwoSidedState two_sided_step(TwoSidedState s, Feedback f) {
  using Phase = TwoSidedState::Phase;
  if (f == Feedback::success) return s;
  if (s.phase == Phase::upper) {
    if (f == Feedback::collision) {
      s.phase = Phase::lower;
    } else {
      s.y_max = s.y_min;
      s.y_min = restart_point(s);
    }
    return s;
  }
  if (f == Feedback::collision) {
    throw std::logic_error("two-sided: collision in the lower interval is unreachable for N <= 3");
  }
  s.y_low = s.y_min;
  s.y_min = restart_point(s);
  s.phase = Phase::upper;
  return s;
}

Action TwoSidedStrategy::next(Feedback f) {
  state_ = two_sided_step(state_, f);
  return two_sided_probe(state_);
}

// --- Discrete --------------------------------------------------------------

DiscreteModel::DiscreteModel(const ChannelModel& channel) : channel_(channel) {
  if (channel.kind() != ChannelModel::Kind::discrete_joint) {
    throw DomainError("discrete strategies need a discrete joint channel");
  }
  std::set<double> values;
  for (const auto& s : channel.states()) values.insert(s.begin(), s.end());
  for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
    ladder_.push_back((*it + *std::next(it)) / 2);
  }
  const auto& states = channel.states();
  feedback_.reserve(states.size() * ladder_.size());
  for (const auto& s : states) {
    winners_.push_back(argmax(s));
    for (double t : ladder_) {
      const auto above = std::count_if(s.begin(), s.end(), [t](double g) { return g > t; });
      feedback_.push_back(feedback_from_count(static_cast<std::size_t>(above)));
    }
  }
}

Posterior::Posterior(std::shared_ptr<const DiscreteModel> model)
    : model_(std::move(model)), alive_(model_->state_count(), true) {}

void Posterior::observe(std::size_t threshold, Feedback f) {
  for (std::size_t s = 0; s < alive_.size(); ++s) {
    if (alive_[s] && model_->feedback(s, threshold) != f) alive_[s] = false;
  }
}

std::size_t Posterior::alive_count() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true));
}

double Posterior::probability(std::size_t state) const {
  if (!alive_[state]) return 0.0;
  const auto& probs = model_->channel().probabilities();
  double total = 0.0;
  for (std::size_t s = 0; s < alive_.size(); ++s) {
    if (alive_[s]) total += probs[s];
  }
  return total > 0.0 ? probs[state] / total : 1.0 / static_cast<double>(alive_count());
}

std::optional<std::size_t> Posterior::single_state() const {
  if (alive_count() != 1) return std::nullopt;
  return static_cast<std::size_t>(std::find(alive_.begin(), alive_.end(), true) - alive_.begin());
}

DiscreteMpaStrategy::DiscreteMpaStrategy(std::shared_ptr<const DiscreteModel> model)
    : posterior_(std::move(model)) {}

Action DiscreteMpaStrategy::decide() {
  if (const auto s = posterior_.single_state()) return Declare{posterior_.model().winner(*s)};
  if (posterior_.alive_count() == 0) {
    throw std::logic_error("discrete-mpa: feedback is inconsistent with every state");
  }
  const auto& model = posterior_.model();
  const auto& probs = model.channel().probabilities();
  double best = -1.0;
  std::size_t pick = 0;
  for (std::size_t t = 0; t < model.ladder().size(); ++t) {
    double mass = 0.0;
    for (std::size_t s = 0; s < model.state_count(); ++s) {
      if (posterior_.alive(s) && model.feedback(s, t) == Feedback::success) mass += probs[s];
    }
    if (mass >= best) {
      best = mass;
      pick = t;
    }
  }
  last_ = pick;
  return Probe::upper_open(model.ladder()[pick], std::numeric_limits<double>::infinity());
}

Action DiscreteMpaStrategy::next(Feedback f) {
  if (!last_) throw std::logic_error("discrete-mpa: feedback before any probe");
  posterior_.observe(*last_, f);
  return decide();
}

DiscreteBisectStrategy::DiscreteBisectStrategy(std::shared_ptr<const DiscreteModel> model)
    : posterior_(std::move(model)) {
  hi_ = static_cast<std::ptrdiff_t>(posterior_.model().ladder().size()) - 1;
}

Action DiscreteBisectStrategy::decide() {
  const auto& model = posterior_.model();
  if (lo_ > hi_) {
    if (const auto s = posterior_.single_state()) return Declare{model.winner(*s)};
    std::ostringstream os;
    os << "discrete-bisect: ladder exhausted with " << posterior_.alive_count() << " states alive";
    throw std::logic_error(os.str());
  }
  const std::ptrdiff_t mid = lo_ + (hi_ - lo_) / 2;
  last_ = static_cast<std::size_t>(mid);
  return Probe::upper_open(model.ladder()[*last_], std::numeric_limits<double>::infinity());
}

Action DiscreteBisectStrategy::next(Feedback f) {
  if (!last_) throw std::logic_error("discrete-bisect: feedback before any probe");
  posterior_.observe(*last_, f);
  const auto mid = static_cast<std::ptrdiff_t>(*last_);
  if (f == Feedback::collision) {
    lo_ = mid + 1;
  } else if (f == Feedback::idle) {
    hi_ = mid - 1;
  }
  return decide();
}

// --- Registry --------------------------------------------------------------

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {"osa", "mpa", "two-sided", "discrete-mpa",
                                                 "discrete-bisect"};
  return names;
}

NamedStrategy make_strategy(std::string_view name, const ChannelModel& channel,
                            std::shared_ptr<const Codebook> tree) {
  const bool discrete = channel.kind() == ChannelModel::Kind::discrete_joint;
  const int users = channel.users();
  const std::string label(name);
  const auto need_continuous = [&] {
    if (discrete) throw DomainError("strategy '" + label + "' needs an iid or constant channel");
  };
  if (name == "osa") {
    need_continuous();
    return {label, [users] { return std::make_unique<OsaStrategy>(users); }};
  }
  if (name == "mpa") {
    need_continuous();
    if (!tree) {
      CodebookOptions opts;
      opts.max_entries = std::size_t{1} << 14;
      tree = std::make_shared<const Codebook>(build_codebook(users, opts));
    }
    return {label, [users, tree] { return std::make_unique<MpaStrategy>(users, tree); }};
  }
  if (name == "two-sided") {
    need_continuous();
    two_sided_initial(users);  // validates N
    return {label, [users] { return std::make_unique<TwoSidedStrategy>(users); }};
  }
  if (name == "discrete-mpa" || name == "discrete-bisect") {
    auto model = std::make_shared<const DiscreteModel>(channel);
    if (name == "discrete-mpa") {
      return {label, [model] { return std::make_unique<DiscreteMpaStrategy>(model); }};
    }
    return {label, [model] { return std::make_unique<DiscreteBisectStrategy>(model); }};
  }
  std::ostringstream os;
  os << "unknown strategy '" << name << "' (expected one of:";
  for (const auto& n : strategy_names()) os << ' ' << n;
  os << ')';
  throw DomainError(os.str());
}

}  // namespace contention
