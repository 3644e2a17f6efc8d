#include "contention/mpa_codebook.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "contention/errors.hpp"

namespace contention {
namespace {

int symbol_rank(char c) {
  switch (c) {
    case 'e': return 0;
    case '0': return 1;
    default: return 2;
  }
}

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// Delay and entropy of the (self-similar) N = 2 MPA tree, used to complete
// subtrees that are not copies of the tree being built.
const Codebook& reference_tree() {
  static const Codebook tree = [] {
    CodebookOptions opts;
    opts.max_entries = 1024;
    return build_codebook(2, opts);
  }();
  return tree;
}

enum class TailKind { self, reference };

}  // namespace

bool codeword_less(std::string_view lhs, std::string_view rhs) {
  return std::lexicographical_compare(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                                      [](char x, char y) { return symbol_rank(x) < symbol_rank(y); });
}

double Codebook::approximated_mass() const {
  return tail_.reference_exact ? 0.0 : tail_.reference_mass;
}

Codebook Codebook::from_entries(int users, std::vector<CodeEntry> entries,
                                double residual_mass) {
  if (users < 2) throw DomainError("codebook needs N >= 2");
  if (!(residual_mass >= 0.0 && residual_mass <= 1.0)) {
    throw DomainError("residual mass must lie in [0, 1]");
  }
  Codebook cb;
  cb.users_ = users;
  cb.residual_mass_ = residual_mass;
  cb.entries_ = std::move(entries);
  int max_depth = 0;
  for (const auto& e : cb.entries_) max_depth = std::max(max_depth, e.depth);
  cb.tail_.frontier_mass = residual_mass;
  cb.tail_.frontier_depth_mass = residual_mass * max_depth;
  return cb;
}

Codebook build_codebook(int n_users, double epsilon) {
  CodebookOptions opts;
  opts.epsilon = epsilon;
  return build_codebook(n_users, opts);
}

Codebook build_codebook(int n_users, const CodebookOptions& opts) {
  if (n_users < 2) throw DomainError("build_codebook needs N >= 2");
  if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1)");
  }
  if (opts.max_entries < 1) throw DomainError("max_entries must be >= 1");
  if (opts.root_threshold && opts.split_fraction) {
    throw DomainError("root_threshold and split_fraction are mutually exclusive");
  }
  if ((opts.root_threshold || opts.split_fraction) && n_users != 2) {
    throw DomainError("threshold perturbations are defined for N = 2 only");
  }
  for (const auto& x : {opts.root_threshold, opts.split_fraction}) {
    if (x && !(*x > 0.0 && *x < 1.0)) throw DomainError("perturbed threshold must lie in (0, 1)");
  }

  const auto choose = [&](const Region& r, bool is_root) -> double {
    if (is_root && opts.root_threshold) return *opts.root_threshold;
    if (opts.split_fraction) return r.lower + *opts.split_fraction * (r.upper - r.lower);
    if (opts.threshold_rule) return opts.threshold_rule(r);
    return optimal_threshold(r);
  };

  Codebook cb;
  cb.users_ = n_users;
  cb.epsilon_ = opts.epsilon;
  auto& nodes = cb.nodes_;

  const auto add_node = [&](const Region& region, std::string prefix, double mass, bool is_root) {
    Codebook::Node node;
    node.region = region;
    node.threshold = choose(region, is_root);
    node.probability = success_probability(region, node.threshold);
    node.mass = mass;
    node.prefix = std::move(prefix);
    nodes.push_back(std::move(node));
    return static_cast<std::int32_t>(nodes.size() - 1);
  };

  const auto higher_priority = [&](std::int32_t lhs, std::int32_t rhs) {
    const auto& a = nodes[lhs];
    const auto& b = nodes[rhs];
    if (a.probability != b.probability) return a.probability > b.probability;
    return codeword_less(a.prefix, b.prefix);
  };
  // priority_queue pops the "largest"; invert so the highest priority pops first.
  const auto cmp = [&](std::int32_t lhs, std::int32_t rhs) { return higher_priority(rhs, lhs); };
  std::priority_queue<std::int32_t, std::vector<std::int32_t>, decltype(cmp)> queue(cmp);

  const Region root{0.0, 1.0, n_users};
  queue.push(add_node(root, "", 1.0, true));
  double frontier = 1.0;

  while (!queue.empty() && cb.entries_.size() < opts.max_entries && frontier >= opts.epsilon) {
    const std::int32_t id = queue.top();
    queue.pop();
    {
      auto& node = nodes[id];
      node.entry = static_cast<std::int32_t>(cb.entries_.size());
      CodeEntry entry;
      entry.threshold = node.threshold;
      entry.codeword = node.prefix + '1';
      entry.probability = node.probability;
      entry.depth = node.depth() + 1;
      entry.region = node.region;
      entry.order = cb.entries_.size();
      cb.entries_.push_back(std::move(entry));
      frontier -= node.probability;
    }
    // nodes may reallocate inside add_node; copy what the children need.
    const Region region = nodes[id].region;
    const double y = nodes[id].threshold;
    const std::string prefix = nodes[id].prefix;
    const Region kids[2] = {collision_child(region, y), idle_child(region, y)};
    const char symbols[2] = {'e', '0'};
    for (int k = 0; k < 2; ++k) {
      const double m = region_mass(kids[k]);
      if (!(m > 0.0)) continue;
      const std::int32_t child = add_node(kids[k], prefix + symbols[k], m, false);
      (k == 0 ? nodes[id].collision : nodes[id].idle) = child;
      queue.push(child);
    }
  }

  // Tail completion over the frontier.
  const bool custom_rule = static_cast<bool>(opts.threshold_rule) && !opts.split_fraction;
  const bool root_override = static_cast<bool>(opts.root_threshold);
  auto& tail = cb.tail_;
  tail.reference_exact = root_override;
  double residual = 0.0;
  for (const auto& node : nodes) {
    if (node.enumerated()) continue;
    const double m = node.mass;
    const double d = node.depth();
    residual += m;
    tail.frontier_mass += m;
    tail.frontier_depth_mass += m * d;
    TailKind kind = TailKind::reference;
    if (opts.split_fraction) {
      kind = TailKind::self;
    } else if (!custom_rule && !root_override && (n_users == 2 || node.region.anchored())) {
      kind = TailKind::self;
    }
    if (kind == TailKind::self) {
      tail.self_mass += m;
      tail.self_depth_mass += m * d;
      tail.self_entropy += plogp(m);
    } else {
      tail.reference_mass += m;
      tail.reference_depth_mass += m * d;
      tail.reference_entropy += plogp(m);
      if (!root_override) {
        tail.min_conditional_success = std::min(tail.min_conditional_success, node.probability / m);
      }
    }
  }
  cb.residual_mass_ = residual;
  if (tail.reference_mass > 0.0) {
    const auto& ref = reference_tree();
    tail.reference_delay = expected_delay(ref).value;
    tail.reference_bits = entropy(ref).bits;
  }

  std::sort(cb.entries_.begin(), cb.entries_.end(), [](const CodeEntry& a, const CodeEntry& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return codeword_less(a.codeword, b.codeword);
  });
  {
    // re-point nodes at the sorted positions
    std::vector<std::int32_t> by_order(cb.entries_.size());
    for (std::size_t i = 0; i < cb.entries_.size(); ++i) {
      by_order[cb.entries_[i].order] = static_cast<std::int32_t>(i);
    }
    for (auto& node : nodes) {
      if (node.enumerated()) node.entry = by_order[node.entry];
    }
  }
  return cb;
}

EntropyReport entropy(const Codebook& cb) {
  EntropyReport report;
  for (const auto& e : cb.entries()) report.enumerated_bits += plogp(e.probability);
  report.residual_mass = cb.residual_mass();
  report.approximated_mass = cb.approximated_mass();
  const auto& t = cb.tail();
  if (cb.nodes().empty()) {
    report.bits = report.enumerated_bits;
    return report;
  }
  const double folded = report.enumerated_bits + t.self_entropy + t.reference_entropy +
                        t.reference_mass * t.reference_bits;
  report.bits = folded / (1.0 - t.self_mass);
  return report;
}

DelayReport expected_delay(const Codebook& cb) {
  DelayReport report;
  int max_depth = 0;
  for (const auto& e : cb.entries()) {
    report.enumerated += e.probability * e.depth;
    max_depth = std::max(max_depth, e.depth);
  }
  const auto& t = cb.tail();
  report.lower = report.enumerated + t.frontier_depth_mass + t.frontier_mass;
  if (cb.nodes().empty()) {
    report.value = report.enumerated;
    report.upper = report.enumerated + t.frontier_mass * (max_depth + 2);
    return report;
  }
  const double denom = 1.0 - t.self_mass;
  const double exact_part = report.enumerated + t.self_depth_mass + t.reference_depth_mass;
  report.value = (exact_part + t.reference_mass * t.reference_delay) / denom;
  double per_node = t.reference_delay;
  if (!t.reference_exact && t.min_conditional_success > 0.0) {
    per_node = std::max(per_node, 1.0 / t.min_conditional_success);
  }
  report.upper = (exact_part + t.reference_mass * per_node) / denom;
  return report;
}

const CodeEntry& resolve(const Codebook& cb, double y_second, double y_max) {
  if (!(y_second >= 0.0 && y_second < y_max && y_max <= 1.0)) {
    std::ostringstream os;
    os << "resolve needs 0 <= y_second < y_max <= 1, got (" << y_second << ", " << y_max << ")";
    throw DomainError(os.str());
  }
  const auto& nodes = cb.nodes();
  if (nodes.empty()) throw UnresolvedAtCutoff("codebook carries no region tree");
  std::int32_t id = 0;
  while (true) {
    const auto& node = nodes[id];
    const double y = node.threshold;
    if (y_second <= y && y < y_max) {
      if (!node.enumerated()) break;
      return cb.entries()[node.entry];
    }
    const std::int32_t next = (y_second > y) ? node.collision : node.idle;
    if (next < 0) break;
    id = next;
  }
  std::ostringstream os;
  os << "pair (" << y_second << ", " << y_max << ") is resolved below the enumeration cutoff";
  throw UnresolvedAtCutoff(os.str());
}

nlohmann::json to_json(const Codebook& cb) {
  const auto h = entropy(cb);
  const auto d = expected_delay(cb);
  nlohmann::json j;
  j["n_users"] = cb.users();
  j["epsilon"] = cb.epsilon();
  j["residual_mass"] = cb.residual_mass();
  j["approximated_mass"] = h.approximated_mass;
  j["entropy_bits"] = h.bits;
  j["enumerated_entropy_bits"] = h.enumerated_bits;
  j["expected_delay"] = d.value;
  j["expected_delay_bounds"] = {d.lower, d.upper};
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : cb.entries()) {
    entries.push_back({{"threshold", e.threshold},
                       {"codeword", e.codeword},
                       {"probability", e.probability},
                       {"depth", e.depth}});
  }
  return j;
}

}  // namespace contention
