#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>

#include "contention/channel.hpp"
#include "contention/engine.hpp"
#include "contention/errors.hpp"
#include "contention/oracles.hpp"
#include "contention/strategies.hpp"

using namespace contention;

namespace {

const Interval& only_part(const Action& a) {
  const auto& p = std::get<Probe>(a);
  EXPECT_EQ(p.parts().size(), 1u);
  return p.parts()[0];
}

double grid_argmax(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best = lo, value = -INFINITY;
  for (double y = lo + step; y < hi; y += step) {
    if (const double v = f(y); v > value) value = v, best = y;
  }
  return best;
}

std::vector<double> probe_sequence(Strategy& s, const std::vector<double>& gains) {
  std::vector<double> out;
  const SlotTrace t = run_slot(make_sample(gains), s, 64);
  for (const auto& p : t.probes) out.push_back(p.probe.parts()[0].lower);
  return out;
}

}  // namespace

TEST(Osa, InitialProbe) {
  OsaStrategy osa(2);
  const auto& p = only_part(osa.begin());
  EXPECT_EQ(p.lower, 0.5);
  EXPECT_EQ(p.upper, 1.0);
}

TEST(Osa, AfterCollision) {
  OsaStrategy osa(2);
  osa.begin();
  const auto& p = only_part(osa.next(Feedback::collision));
  EXPECT_EQ(p.lower, 0.75);
  EXPECT_EQ(p.upper, 1.0);
  EXPECT_EQ(osa.state().y_low, 0.5);
}

TEST(Osa, FourUsersAfterIdle) {
  OsaStrategy osa(4);
  osa.begin();
  const auto& p = only_part(osa.next(Feedback::idle));
  EXPECT_DOUBLE_EQ(p.lower, 0.5625);
  EXPECT_EQ(p.upper, 0.75);
}

TEST(Osa, StateOrderingUnderRandomHistories) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> users(2, 64), len(1, 40), coin(0, 1);
  for (int h = 0; h < 1'000'000; ++h) {
    OsaState s = osa_initial(users(rng));
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      s = osa_step(s, coin(rng) ? Feedback::collision : Feedback::idle);
      ASSERT_TRUE(0.0 <= s.y_low && s.y_low <= s.y_min && s.y_min <= s.y_max && s.y_max <= 1.0)
          << s.y_low << ' ' << s.y_min << ' ' << s.y_max;
    }
  }
}

TEST(Osa, MatchesMpaForTwoUsersToDepthTwenty) {
  // Every feedback history reachable within 20 probes.
  std::size_t paths = 0;
  std::function<void(OsaState, MpaState, int)> walk = [&](OsaState o, MpaState m, int depth) {
    const auto po = osa_probe(o).parts()[0];
    const auto pm = mpa_probe(m).parts()[0];
    ASSERT_EQ(po.lower, pm.lower);
    ASSERT_EQ(po.upper, pm.upper);
    ++paths;
    if (depth == 20) return;
    for (Feedback f : {Feedback::collision, Feedback::idle}) {
      walk(osa_step(o, f), mpa_step(m, f), depth + 1);
    }
  };
  walk(osa_initial(2), mpa_initial(2), 0);
  EXPECT_EQ(paths, (std::size_t{1} << 21) - 1);
}

TEST(Mpa, ThreeUsersInitial) {
  MpaStrategy mpa(3);
  const auto& p = only_part(mpa.begin());
  EXPECT_NEAR(p.lower, 2.0 / 3.0, 1e-15);
}

TEST(Mpa, ThreeUsersAfterCollision) {
  MpaStrategy mpa(3);
  mpa.begin();
  const double y = only_part(mpa.next(Feedback::collision)).lower;
  const double a = 2.0 / 3.0;
  const double grid = grid_argmax([a](double t) { return (1 - t) * (t * t - a * a); }, a, 1.0, 1e-6);
  EXPECT_NEAR(y, grid, 1e-5);
  // Root of -3y^2 + 2y + 4/9.
  EXPECT_NEAR(y, 0.84250841, 1e-8);
}

TEST(Mpa, TreeAndOnTheFlyAgree) {
  auto tree = std::make_shared<const Codebook>(build_codebook(4, [] {
    CodebookOptions o;
    o.max_entries = 64;
    return o;
  }()));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> g{u(rng), u(rng), u(rng), u(rng)};
    MpaStrategy with_tree(4, tree), without(4);
    const auto a = probe_sequence(with_tree, g), b = probe_sequence(without, g);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-15);
  }
}

TEST(Mpa, RejectsMismatchedTree) {
  auto tree = std::make_shared<const Codebook>(build_codebook(3, 1e-2));
  EXPECT_THROW(MpaStrategy(2, tree), DomainError);
}

TEST(TwoSided, InitialProbe) {
  TwoSidedStrategy s(3);
  const auto& p = only_part(s.begin());
  EXPECT_NEAR(p.lower, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(p.upper, 1.0);
}

TEST(TwoSided, LowerSuccessAtSecondMinislot) {
  SlotSample sample = make_sample({0.5, 0.5, 0.5});
  sample.auxiliary = {0.9, 0.8, 0.4};
  TwoSidedStrategy s(3);
  const SlotTrace t = run_slot(sample, s, 64);
  EXPECT_EQ(t.transcript(), "e1");
  EXPECT_EQ(t.minislots_used, 2);
  EXPECT_EQ(*t.winner, 2u);
  const auto& lower = t.probes[1].probe.parts()[0];
  EXPECT_TRUE(lower.lower_closed);
  EXPECT_FALSE(lower.upper_closed);
}

TEST(TwoSided, RestartStaysInsideInterval) {
  TwoSidedState s = two_sided_initial(3);
  s = two_sided_step(s, Feedback::idle);
  EXPECT_NEAR(s.y_max, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.y_min, 4.0 / 9.0, 1e-15);
  s = two_sided_step(s, Feedback::collision);
  EXPECT_EQ(s.phase, TwoSidedState::Phase::lower);
  s = two_sided_step(s, Feedback::idle);
  EXPECT_NEAR(s.y_low, 4.0 / 9.0, 1e-15);
  EXPECT_GT(s.y_min, s.y_low);
  EXPECT_LT(s.y_min, s.y_max);
}

TEST(TwoSided, LowerCollisionIsUnreachable) {
  TwoSidedState s = two_sided_initial(3);
  s = two_sided_step(s, Feedback::collision);
  EXPECT_THROW(two_sided_step(s, Feedback::collision), std::logic_error);
  EXPECT_THROW(two_sided_initial(4), DomainError);
}

TEST(DiscreteMpa, ThresholdSequenceAndDeclaration) {
  const auto ch = correlated_example_channel(1e-6);
  auto make = make_strategy("discrete-mpa", ch).make;
  auto s = make();
  const SlotTrace t = run_slot(make_sample({4, 2}), *s, 64);
  std::vector<double> probes;
  for (const auto& p : t.probes) probes.push_back(p.probe.parts()[0].lower);
  EXPECT_EQ(probes, (std::vector<double>{15, 13, 11, 9, 7, 5}));
  EXPECT_TRUE(t.declared_without_probe);
  EXPECT_EQ(*t.winner, 0u);
}

TEST(DiscreteMpa, ProbedStateProbabilitiesStrictlyDecrease) {
  const auto ch = correlated_example_channel(1e-4);
  auto model = std::make_shared<const DiscreteModel>(ch);
  DiscreteMpaStrategy s(model);
  Action a = s.begin();
  std::vector<double> masses;
  while (const auto* probe = std::get_if<Probe>(&a)) {
    const double t = probe->parts()[0].lower;
    for (std::size_t k = 0; k < ch.states().size(); ++k) {
      const auto& g = ch.states()[k];
      if ((g[0] > t) != (g[1] > t) && s.posterior().alive(k)) masses.push_back(ch.probabilities()[k]);
    }
    a = s.next(feedback_for(*probe, ch.states()[0]));
  }
  ASSERT_EQ(masses.size(), 6u);
  for (std::size_t i = 1; i < masses.size(); ++i) EXPECT_LT(masses[i], masses[i - 1]);
}

TEST(DiscreteMpa, TwoStateChannel) {
  const auto ch = ChannelModel::discrete_joint({{1, 3}, {5, 3}}, {0.5, 0.5});
  const auto r = discrete_exact_delay(ch, make_strategy("discrete-mpa", ch).make);
  EXPECT_EQ(r.expected_delay, 1.0);
}

TEST(DiscreteBisect, CollisionPath) {
  const auto ch = correlated_example_channel(1e-6);
  auto s = make_strategy("discrete-bisect", ch).make();
  const SlotTrace t = run_slot(make_sample({16, 14}), *s, 64);
  std::vector<double> probes;
  for (const auto& p : t.probes) probes.push_back(p.probe.parts()[0].lower);
  EXPECT_EQ(probes, (std::vector<double>{9, 13, 15}));
  EXPECT_EQ(t.transcript(), "ee1");
}

TEST(DiscreteBisect, IdleGoesToLowerHalf) {
  const auto ch = correlated_example_channel(1e-6);
  auto s = make_strategy("discrete-bisect", ch).make();
  const SlotTrace t = run_slot(make_sample({4, 6}), *s, 64);
  ASSERT_GE(t.probes.size(), 2u);
  EXPECT_EQ(t.probes[0].probe.parts()[0].lower, 9);
  EXPECT_EQ(t.probes[1].probe.parts()[0].lower, 5);
}

TEST(DiscreteBisect, CorrelatedExactDelay) {
  const auto ch = correlated_example_channel(1e-6);
  const auto r = discrete_exact_delay(ch, make_strategy("discrete-bisect", ch).make);
  EXPECT_NEAR(r.expected_delay, 17.0 / 7.0, 1e-4);
  EXPECT_LT(r.expected_delay, 27.0 / 7.0);
}

TEST(DiscreteBisect, ChainsScaleLikeLogK) {
  for (std::size_t k : {7u, 15u, 31u}) {
    const auto ch = chain_channel(k, 0.0);
    const auto r = discrete_exact_delay(ch, make_strategy("discrete-bisect", ch).make);
    EXPECT_NEAR(r.expected_delay, std::log2(static_cast<double>(k)), 1.0) << k;
  }
}

TEST(Posterior, ConsistentWithObservedFeedback) {
  const auto ch = chain_channel(15, 1e-4);
  auto model = std::make_shared<const DiscreteModel>(ch);
  for (const char* name : {"discrete-mpa", "discrete-bisect"}) {
    for (std::size_t truth = 0; truth < ch.states().size(); ++truth) {
      std::unique_ptr<Strategy> s;
      const Posterior* post = nullptr;
      if (std::string(name) == "discrete-mpa") {
        auto p = std::make_unique<DiscreteMpaStrategy>(model);
        post = &p->posterior();
        s = std::move(p);
      } else {
        auto p = std::make_unique<DiscreteBisectStrategy>(model);
        post = &p->posterior();
        s = std::move(p);
      }
      std::vector<std::pair<double, Feedback>> seen;
      Action a = s->begin();
      while (const auto* probe = std::get_if<Probe>(&a)) {
        const Feedback f = feedback_for(*probe, ch.states()[truth]);
        seen.push_back({probe->parts()[0].lower, f});
        if (f == Feedback::success) break;
        a = s->next(f);
        double total = 0.0;
        for (std::size_t k = 0; k < ch.states().size(); ++k) {
          const auto& g = ch.states()[k];
          bool consistent = true;
          for (const auto& [t, fb] : seen) {
            const auto above = static_cast<std::size_t>((g[0] > t) + (g[1] > t));
            consistent = consistent && feedback_from_count(above) == fb;
          }
          ASSERT_EQ(post->alive(k), consistent) << name << ' ' << truth << ' ' << k;
          if (!consistent) ASSERT_EQ(post->probability(k), 0.0);
          total += post->probability(k);
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
        ASSERT_TRUE(post->alive(truth));
      }
      if (const auto* d = std::get_if<Declare>(&a)) ASSERT_EQ(d->user, argmax(ch.states()[truth]));
    }
  }
}

TEST(Registry, NamesAndErrors) {
  EXPECT_EQ(strategy_names(),
            (std::vector<std::string>{"osa", "mpa", "two-sided", "discrete-mpa", "discrete-bisect"}));
  const auto iid = ChannelModel::iid_uniform(3);
  const auto disc = correlated_example_channel(1e-6);
  EXPECT_THROW(make_strategy("bogus", iid), DomainError);
  EXPECT_THROW(make_strategy("osa", disc), DomainError);
  EXPECT_THROW(make_strategy("discrete-mpa", iid), DomainError);
  EXPECT_THROW(make_strategy("two-sided", ChannelModel::constant(5)), DomainError);
  EXPECT_EQ(make_strategy("mpa", iid).name, "mpa");
}
