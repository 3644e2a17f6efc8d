#pragma once

// Maximal-probability-allocation (MPA) threshold code for N i.i.d. users.
//
// The code is grown as a binary region tree. Every node is a Region with
// its success-maximising threshold y; the node's entry resolves the pairs
// with Y_{N-1} <= y < Y_N, a collision moves to (y, b] and an idle probe to
// (a, y]. Nodes are expanded greedily by entry probability, which is the
// same as picking, among all still unresolved pairs, the threshold with
// the largest success probability.
//
// Enumeration stops at the mass cutoff or at the entry budget, whichever
// comes first. Entropy and expected delay are then completed over the
// unexpanded subtrees: an anchored subtree (0, b] is the whole tree scaled
// by b^N, and for N = 2 every subtree is an affine copy of the whole tree,
// so both are folded back exactly by solving the resulting linear
// equation. For N > 2 the remaining (a, b] subtrees are completed with the
// N = 2 tree, which they approach as the two leaders close in; that mass
// is reported as approximated_mass.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "contention/prob_core.hpp"

namespace contention {

struct CodeEntry {
  double threshold = 0.0;
  /// Feedback transcript: 'e' (collision) and '0' (idle) symbols, then '1'.
  std::string codeword;
  double probability = 0.0;
  int depth = 0;
  Region region;
  /// Position in greedy construction order.
  std::size_t order = 0;
};

struct CodebookOptions {
  /// Stop once the unenumerated mass drops below this.
  double epsilon = 1e-10;
  /// Hard cap on materialised entries.
  std::size_t max_entries = std::size_t{1} << 17;
  /// N = 2 only: use this root threshold, MPA everywhere below it.
  std::optional<double> root_threshold;
  /// N = 2 only: split every region at a + x (b - a) instead of MPA.
  std::optional<double> split_fraction;
  /// Replaces optimal_threshold for every node (fault injection, studies).
  ThresholdRule threshold_rule;
};

/// Unexpanded subtrees, summarised for tail completion. Masses are
/// unconditional; depth sums use the node depth (codeword prefix length).
struct TailSummary {
  double self_mass = 0.0;
  double self_depth_mass = 0.0;
  double self_entropy = 0.0;  // sum of -m log2 m
  double reference_mass = 0.0;
  double reference_depth_mass = 0.0;
  double reference_entropy = 0.0;
  bool reference_exact = true;
  /// Normalised delay and entropy of the subtree type used for reference
  /// completion (the N = 2 MPA tree).
  double reference_delay = 0.0;
  double reference_bits = 0.0;
  /// Smallest conditional success probability among approximated nodes.
  double min_conditional_success = 1.0;
  double frontier_mass = 0.0;
  double frontier_depth_mass = 0.0;
};

class Codebook {
 public:
  struct Node {
    Region region;
    double threshold = 0.0;
    double probability = 0.0;
    double mass = 0.0;
    std::string prefix;
    std::int32_t collision = -1;
    std::int32_t idle = -1;
    std::int32_t entry = -1;  // index into entries(); -1 on the frontier

    int depth() const { return static_cast<int>(prefix.size()); }
    bool enumerated() const { return entry >= 0; }
  };

  /// A codebook without a region tree; resolve() is unavailable and the
  /// residual is left uncompleted.
  static Codebook from_entries(int users, std::vector<CodeEntry> entries,
                               double residual_mass = 0.0);

  int users() const { return users_; }
  double epsilon() const { return epsilon_; }
  double residual_mass() const { return residual_mass_; }
  const std::vector<CodeEntry>& entries() const { return entries_; }
  /// nodes()[0] is the root; empty for from_entries codebooks.
  const std::vector<Node>& nodes() const { return nodes_; }
  const TailSummary& tail() const { return tail_; }
  /// Mass whose completion relies on the N = 2 limit, not an exact fold.
  double approximated_mass() const;

 private:
  friend Codebook build_codebook(int, const CodebookOptions&);

  int users_ = 2;
  double epsilon_ = 0.0;
  double residual_mass_ = 0.0;
  std::vector<CodeEntry> entries_;
  std::vector<Node> nodes_;
  TailSummary tail_;
};

Codebook build_codebook(int n_users, const CodebookOptions& options = {});
Codebook build_codebook(int n_users, double epsilon);

struct EntropyReport {
  /// Tail-completed entropy in bits.
  double bits = 0.0;
  /// -sum p log2 p over the materialised entries only.
  double enumerated_bits = 0.0;
  double residual_mass = 0.0;
  double approximated_mass = 0.0;
};

/// Expected resolution delay in minislots.
///
/// `lower` charges every unenumerated pair exactly one more probe.
/// `upper` uses the exact value for folded subtrees and charges each
/// approximated subtree a geometric number of further probes with success
/// probability equal to the smallest conditional success probability seen
/// on the frontier (never less than the N = 2 limit). For codebooks built
/// with from_entries the residual is charged max_depth + 1 (lower) and
/// max_depth + 2 (upper), i.e. a geometric tail with success 1/2.
struct DelayReport {
  double value = 0.0;
  double enumerated = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

EntropyReport entropy(const Codebook& codebook);
DelayReport expected_delay(const Codebook& codebook);

/// The entry whose threshold separates y_second <= y < y_max, found by
/// walking the region tree. Throws UnresolvedAtCutoff when the walk leaves
/// the enumerated tree, DomainError unless 0 <= y_second < y_max <= 1.
const CodeEntry& resolve(const Codebook& codebook, double y_second, double y_max);

/// Orders codewords collision-first: 'e' < '0' < '1'.
bool codeword_less(std::string_view lhs, std::string_view rhs);

/// {n_users, epsilon, residual_mass, entropy_bits, expected_delay, ...,
///  entries: [{threshold, codeword, probability, depth}]}
nlohmann::json to_json(const Codebook& codebook);

}  // namespace contention
