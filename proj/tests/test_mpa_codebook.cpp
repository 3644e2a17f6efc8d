#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "contention/engine.hpp"
#include "contention/errors.hpp"
#include "contention/mpa_codebook.hpp"
#include "contention/oracles.hpp"
#include "contention/strategies.hpp"

using namespace contention;

namespace {

const Codebook& two_user_code() {
  static const Codebook cb = build_codebook(2);
  return cb;
}

}  // namespace

TEST(BuildCodebook, TwoUserRows) {
  const auto& e = two_user_code().entries();
  ASSERT_GE(e.size(), 7u);
  const double y[] = {0.5, 0.75, 0.25, 0.875, 0.625, 0.375, 0.125};
  const char* w[] = {"1", "e1", "01", "ee1", "e01", "0e1", "001"};
  const double p[] = {0.5, 0.125, 0.125, 0.03125, 0.03125, 0.03125, 0.03125};
  for (int i = 0; i < 7; ++i) {
    EXPECT_NEAR(e[i].threshold, y[i], 1e-12) << i;
    EXPECT_EQ(e[i].codeword, w[i]) << i;
    EXPECT_EQ(e[i].probability, p[i]) << i;
    EXPECT_EQ(e[i].depth, static_cast<int>(std::string(w[i]).size()));
  }
}

TEST(BuildCodebook, GreedyThresholdOrder) {
  std::vector<CodeEntry> by_order = two_user_code().entries();
  std::sort(by_order.begin(), by_order.end(),
            [](const CodeEntry& a, const CodeEntry& b) { return a.order < b.order; });
  EXPECT_EQ(by_order[0].threshold, 0.5);
  EXPECT_EQ(by_order[1].threshold, 0.75);
  EXPECT_EQ(by_order[2].threshold, 0.25);
  EXPECT_EQ(by_order[3].threshold, 0.875);
  for (std::size_t i = 1; i < by_order.size(); ++i) {
    ASSERT_LE(by_order[i].probability, by_order[i - 1].probability) << i;
  }
}

TEST(BuildCodebook, FirstThresholdAnyN) {
  for (int n : {2, 3, 5, 9, 17}) {
    CodebookOptions o;
    o.max_entries = 64;
    const Codebook cb = build_codebook(n, o);
    EXPECT_NEAR(cb.entries().front().threshold, 1.0 - 1.0 / n, 1e-12);
  }
}

TEST(BuildCodebook, EntryInvariants) {
  for (int n : {2, 3, 6}) {
    CodebookOptions o;
    o.max_entries = 4096;
    const Codebook cb = build_codebook(n, o);
    double total = cb.residual_mass();
    std::set<double> thresholds;
    std::set<std::string> prefixes;
    for (const auto& e : cb.entries()) {
      total += e.probability;
      ASSERT_EQ(e.depth, static_cast<int>(e.codeword.size()));
      ASSERT_EQ(e.codeword.back(), '1');
      ASSERT_EQ(e.codeword.find('1'), e.codeword.size() - 1);
      ASSERT_DOUBLE_EQ(e.probability, success_probability(e.region, e.threshold));
      ASSERT_TRUE(thresholds.insert(e.threshold).second) << "duplicate threshold " << e.threshold;
      prefixes.insert(e.codeword.substr(0, e.codeword.size() - 1));
    }
    EXPECT_NEAR(total, 1.0, 1e-10) << n;
    EXPECT_EQ(prefixes.size(), cb.entries().size());
  }
}

TEST(BuildCodebook, EntriesSortedByProbabilityThenCodeword) {
  const auto& e = two_user_code().entries();
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i].probability == e[i - 1].probability) {
      ASSERT_TRUE(codeword_less(e[i - 1].codeword, e[i].codeword)) << i;
    } else {
      ASSERT_LT(e[i].probability, e[i - 1].probability) << i;
    }
  }
}

TEST(BuildCodebook, ResidualShrinksWithBudget) {
  for (int n : {2, 4, 32}) {
    double previous = 1.0;
    for (std::size_t budget : {64u, 1024u, 16384u}) {
      CodebookOptions o;
      o.max_entries = budget;
      const double r = build_codebook(n, o).residual_mass();
      EXPECT_LT(r, previous) << n << ' ' << budget;
      previous = r;
    }
  }
}

TEST(BuildCodebook, StopsAtEpsilon) {
  const Codebook coarse = build_codebook(2, 1e-3);
  const Codebook fine = build_codebook(2, 1e-5);
  EXPECT_LT(coarse.residual_mass(), 1e-3);
  EXPECT_LT(fine.residual_mass(), 1e-5);
  EXPECT_LT(coarse.entries().size(), fine.entries().size());
}

TEST(BuildCodebook, RejectsBadArguments) {
  EXPECT_THROW(build_codebook(1), DomainError);
  EXPECT_THROW(build_codebook(2, 0.0), DomainError);
  CodebookOptions o;
  o.split_fraction = 0.4;
  EXPECT_THROW(build_codebook(3, o), DomainError);
}

TEST(Entropy, TwoUsersIsThree) {
  const auto h = entropy(two_user_code());
  EXPECT_NEAR(h.bits, 3.0, 1e-6);
  EXPECT_NEAR(h.bits, n2_entropy(0.5), 1e-6);
  EXPECT_LT(h.enumerated_bits, h.bits);
  EXPECT_EQ(h.approximated_mass, 0.0);
}

TEST(Entropy, SingleEntryIsZero) {
  CodeEntry e;
  e.threshold = 0.5;
  e.codeword = "1";
  e.probability = 1.0;
  e.depth = 1;
  const Codebook cb = Codebook::from_entries(2, {e});
  EXPECT_EQ(entropy(cb).bits, 0.0);
  EXPECT_EQ(expected_delay(cb).value, 1.0);
}

TEST(ExpectedDelay, TwoUsersIsTwo) {
  const auto d = expected_delay(two_user_code());
  EXPECT_NEAR(d.value, 2.0, 1e-6);
  EXPECT_LE(d.lower, d.value + 1e-12);
  EXPECT_GE(d.upper, d.value - 1e-12);
}

TEST(ExpectedDelay, BoundsBracketValueForLargerN) {
  for (int n : {3, 8, 32}) {
    const Codebook cb = build_codebook(n);
    const auto d = expected_delay(cb);
    EXPECT_LE(d.lower, d.value) << n;
    EXPECT_GE(d.upper, d.value) << n;
    EXPECT_LT(d.upper - d.lower, 1e-3) << n;
  }
}

TEST(ExpectedDelay, FromEntriesChargesGeometricTail) {
  CodeEntry a;
  a.threshold = 0.5;
  a.codeword = "1";
  a.probability = 0.5;
  a.depth = 1;
  const Codebook cb = Codebook::from_entries(2, {a}, 0.5);
  const auto d = expected_delay(cb);
  EXPECT_EQ(d.value, 0.5);
  EXPECT_EQ(d.lower, 1.5);
  EXPECT_EQ(d.upper, 2.0);
}

TEST(Codebook, CompletedValuesConvergeWithBudget) {
  // Tail completion should make the reported numbers insensitive to where
  // enumeration stops.
  for (int n : {3, 8}) {
    CodebookOptions small;
    small.max_entries = 2048;
    const Codebook a = build_codebook(n, small);
    const Codebook b = build_codebook(n);
    EXPECT_NEAR(entropy(a).bits, entropy(b).bits, 1e-5) << n;
    EXPECT_NEAR(expected_delay(a).value, expected_delay(b).value, 1e-5) << n;
  }
}

TEST(Codebook, FrozenValues) {
  // Tail-completed values at the default budget; cross-checked by
  // simulation in the acceptance suite.
  const struct {
    int n;
    double bits, delay;
  } cases[] = {{3, 3.33292, 2.17424}, {4, 3.47342, 2.25272}, {8, 3.66066, 2.36233}, {32, 3.78626, 2.43928}};
  for (const auto& c : cases) {
    const Codebook cb = build_codebook(c.n);
    EXPECT_NEAR(entropy(cb).bits, c.bits, 1e-4) << c.n;
    EXPECT_NEAR(expected_delay(cb).value, c.delay, 1e-4) << c.n;
  }
}

TEST(BinaryExpansion, EveryTwoUserEntry) {
  for (const auto& e : two_user_code().entries()) {
    double v = 0.0, w = 0.5;
    for (char c : e.codeword) {
      if (c != '0') v += w;
      w *= 0.5;
    }
    ASSERT_NEAR(v, e.threshold, 1e-12) << e.codeword;
  }
}

TEST(Resolve, TwoUserExamples) {
  const auto& cb = two_user_code();
  EXPECT_EQ(resolve(cb, 0.3, 0.8).threshold, 0.5);
  EXPECT_EQ(resolve(cb, 0.55, 0.9).threshold, 0.75);
  const auto& e = resolve(cb, 0.26, 0.49);
  EXPECT_EQ(e.threshold, 0.375);
  EXPECT_EQ(e.codeword, "0e1");
}

TEST(Resolve, RejectsBadPairs) {
  EXPECT_THROW(resolve(two_user_code(), 0.6, 0.4), DomainError);
  EXPECT_THROW(resolve(two_user_code(), -0.1, 0.4), DomainError);
}

TEST(Resolve, UnresolvedBelowCutoff) {
  CodebookOptions o;
  o.max_entries = 3;
  const Codebook cb = build_codebook(2, o);
  EXPECT_THROW(resolve(cb, 0.8, 0.9), UnresolvedAtCutoff);
  EXPECT_NO_THROW(resolve(cb, 0.4, 0.6));
}

TEST(Resolve, AgreesWithSimulatedMpa) {
  for (int n : {2, 3, 5}) {
    auto cb = std::make_shared<const Codebook>(build_codebook(n, [] {
      CodebookOptions o;
      o.max_entries = 1 << 15;
      return o;
    }()));
    std::mt19937_64 rng(17 + n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 100000; ++i) {
      double lo = u(rng), hi = u(rng);
      if (lo > hi) std::swap(lo, hi);
      if (!(lo < hi)) continue;
      std::vector<double> gains{hi, lo};
      for (int k = 2; k < n; ++k) gains.push_back(lo * u(rng));
      const CodeEntry* entry = nullptr;
      try {
        entry = &resolve(*cb, lo, hi);
      } catch (const UnresolvedAtCutoff&) {
        continue;
      }
      MpaStrategy strategy(n, cb);
      const SlotTrace t = run_slot(make_sample(gains), strategy, 256);
      ASSERT_TRUE(t.resolved());
      ASSERT_EQ(t.transcript(), entry->codeword) << lo << ' ' << hi;
      ASSERT_EQ(t.probes.back().probe.parts()[0].lower, entry->threshold);
      ++checked;
    }
    EXPECT_GT(checked, 99000) << n;
  }
}

TEST(LocalMinimum, PerturbedCodesCostMore) {
  const double h0 = entropy(two_user_code()).bits;
  const double d0 = expected_delay(two_user_code()).value;
  for (double delta : {-0.05, -0.01, 0.01, 0.05}) {
    const double x = 0.5 + delta;
    CodebookOptions every;
    every.split_fraction = x;
    const Codebook a = build_codebook(2, every);
    EXPECT_NEAR(entropy(a).bits, n2_entropy(x), 1e-6) << x;
    EXPECT_NEAR(expected_delay(a).value, n2_delay(x), 1e-6) << x;
    EXPECT_GT(entropy(a).bits, h0);
    EXPECT_GT(expected_delay(a).value, d0);

    CodebookOptions root;
    root.root_threshold = x;
    const Codebook b = build_codebook(2, root);
    EXPECT_GT(entropy(b).bits, h0) << x;
    EXPECT_GT(expected_delay(b).value, d0) << x;
    // Only the first split moves: D = 1 + (1 - 2x(1-x)) * 2.
    EXPECT_NEAR(expected_delay(b).value, 3.0 - 4.0 * x * (1.0 - x), 1e-6) << x;
  }
}

TEST(Json, HeaderAndEntries) {
  CodebookOptions o;
  o.max_entries = 16;
  const auto j = to_json(build_codebook(2, o));
  for (const char* key : {"n_users", "epsilon", "residual_mass", "entropy_bits", "expected_delay"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  ASSERT_EQ(j["entries"].size(), 16u);
  const auto& first = j["entries"][1];
  EXPECT_EQ(first["codeword"], "e1");
  EXPECT_EQ(first["threshold"], 0.75);
  EXPECT_EQ(first["probability"], 0.125);
  EXPECT_EQ(first["depth"], 2);
}

TEST(CodewordOrder, CollisionBeforeIdleBeforeSuccess) {
  EXPECT_TRUE(codeword_less("e1", "01"));
  EXPECT_TRUE(codeword_less("0e1", "001"));
  EXPECT_TRUE(codeword_less("ee1", "e01"));
  EXPECT_FALSE(codeword_less("01", "01"));
}

TEST(SimulationOracle, TenUserEntropy) {
  auto cb = std::make_shared<const Codebook>(build_codebook(10));
  const auto ch = ChannelModel::iid_uniform(10);
  BatchConfig c;
  c.slots = 1'000'000;
  const BatchStats s = run_batch(ch, make_strategy("mpa", ch, cb), c);
  EXPECT_NEAR(s.empirical_codeword_entropy, entropy(*cb).bits, 0.02);
}

TEST(SimulationOracle, SixteenUserDelay) {
  auto cb = std::make_shared<const Codebook>(build_codebook(16));
  const auto ch = ChannelModel::iid_uniform(16);
  BatchConfig c;
  c.slots = 1'000'000;
  c.max_minislots = 1024;
  const BatchStats s = run_batch(ch, make_strategy("mpa", ch, cb), c);
  EXPECT_EQ(s.resolved, s.slots);
  EXPECT_NEAR(s.mean_delay_conditional, expected_delay(*cb).value, 0.01);
}
