#include "contention/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "contention/channel.hpp"
#include "contention/engine.hpp"
#include "contention/errors.hpp"
#include "contention/mpa_codebook.hpp"
#include "contention/oracles.hpp"
#include "contention/prob_core.hpp"
#include "contention/strategies.hpp"

namespace contention::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return format_double(v); }

struct Recorder {
  CriterionResult& out;

  void near(std::string label, double expected, double actual, double tol) {
    const bool ok = std::isfinite(actual) && std::abs(actual - expected) <= tol;
    out.checks.push_back({std::move(label), num(expected), num(actual), num(tol), ok});
  }
  void below(std::string label, double bound, double actual) {
    const bool ok = actual < bound;
    out.checks.push_back({std::move(label), "< " + num(bound), num(actual), "strict", ok});
  }
  void above(std::string label, double bound, double actual) {
    const bool ok = actual > bound;
    out.checks.push_back({std::move(label), "> " + num(bound), num(actual), "strict", ok});
  }
  void equal(std::string label, const std::string& expected, const std::string& actual) {
    out.checks.push_back({std::move(label), expected, actual, "exact", expected == actual});
  }
  void exact(std::string label, double expected, double actual) {
    out.checks.push_back({std::move(label), num(expected), num(actual), "exact", expected == actual});
  }
};

CodebookOptions faulty(const VerifyOptions& opt, CodebookOptions base = {}) {
  if (opt.threshold_fault) base.threshold_rule = opt.threshold_fault;
  return base;
}

double threshold_of(const VerifyOptions& opt, const Region& r) {
  return opt.threshold_fault ? opt.threshold_fault(r) : optimal_threshold(r);
}

BatchConfig batch(const VerifyOptions& opt) {
  BatchConfig c;
  c.slots = opt.slots;
  c.seed = opt.seed;
  c.workers = opt.workers;
  c.max_minislots = kDefaultMaxMinislots;
  return c;
}

void two_user_table(const VerifyOptions& opt, Recorder& rec) {
  const auto t0 = Clock::now();
  const Codebook cb = build_codebook(2, faulty(opt));
  const double elapsed = seconds_since(t0);

  const double thresholds[] = {0.5, 0.75, 0.25, 0.875, 0.625, 0.375, 0.125};
  const char* codewords[] = {"1", "e1", "01", "ee1", "e01", "0e1", "001"};
  const double probs[] = {0.5, 0.125, 0.125, 0.03125, 0.03125, 0.03125, 0.03125};
  const auto& entries = cb.entries();
  for (std::size_t i = 0; i < 7; ++i) {
    const std::string row = "entry " + std::to_string(i + 1);
    if (i >= entries.size()) {
      rec.equal(row, "present", "missing");
      continue;
    }
    rec.near(row + " threshold", thresholds[i], entries[i].threshold, 1e-12);
    rec.equal(row + " codeword", codewords[i], entries[i].codeword);
    rec.exact(row + " probability", probs[i], entries[i].probability);
  }
  rec.below("build seconds", 1.0, elapsed);
}

void theorem_values(const VerifyOptions& opt, Recorder& rec) {
  CodebookOptions o = faulty(opt);
  o.epsilon = 1e-10;
  const Codebook cb = build_codebook(2, o);
  rec.near("entropy(N=2) bits", 3.0, entropy(cb).bits, 1e-6);
  rec.near("expected_delay(N=2)", 2.0, expected_delay(cb).value, 1e-6);
  rec.exact("n2_delay(0.5)", 2.0, n2_delay(0.5));
  rec.exact("n2_entropy(0.5)", 3.0, n2_entropy(0.5));

  double best_d = 0.0, best_h = 0.0;
  double min_d = INFINITY, min_h = INFINITY;
  for (int i = 1; i < 10000; ++i) {
    const double x = i * 1e-4;
    if (const double d = n2_delay(x); d < min_d) min_d = d, best_d = x;
    if (const double h = n2_entropy(x); h < min_h) min_h = h, best_h = x;
  }
  rec.near("argmin n2_delay", 0.5, best_d, 1e-3);
  rec.near("argmin n2_entropy", 0.5, best_h, 1e-3);
}

void osa_bound(const VerifyOptions& opt, Recorder& rec) {
  const auto t0 = Clock::now();
  for (int n : {2, 4, 8, 16, 32, 64}) {
    const auto ch = ChannelModel::iid_uniform(n);
    const BatchStats s = run_batch(ch, make_strategy("osa", ch), batch(opt));
    rec.below("osa delay N=" + std::to_string(n), 2.5070, s.mean_delay_charged);
  }
  rec.below("total seconds", 120.0, seconds_since(t0));
}

void first_threshold(const VerifyOptions& opt, Recorder& rec) {
  double worst = 0.0;
  int worst_n = 2;
  double worst_value = 0.5;
  for (int n = 2; n <= 64; ++n) {
    const double y = threshold_of(opt, make_region(0.0, 1.0, n));
    const double err = std::abs(y - (1.0 - 1.0 / n));
    if (!(err <= worst)) worst = err, worst_n = n, worst_value = y;
  }
  rec.near("worst N=" + std::to_string(worst_n), 1.0 - 1.0 / worst_n, worst_value, 1e-12);
}

void constant_three(const VerifyOptions& opt, Recorder& rec) {
  const auto ch = ChannelModel::constant(3);
  const BatchStats osa = run_batch(ch, make_strategy("osa", ch), batch(opt));
  const BatchStats two = run_batch(ch, make_strategy("two-sided", ch), batch(opt));
  rec.near("osa mean delay", 2.12, osa.mean_delay_conditional, 0.03);
  rec.near("two-sided mean delay", 1.89, two.mean_delay_conditional, 0.03);
  rec.below("two-sided entropy vs osa entropy", osa.empirical_codeword_entropy,
            two.empirical_codeword_entropy);
}

void correlated(const VerifyOptions&, Recorder& rec) {
  const auto ch = correlated_example_channel(1e-6);
  const auto mpa = discrete_exact_delay(ch, make_strategy("discrete-mpa", ch).make);
  const auto bis = discrete_exact_delay(ch, make_strategy("discrete-bisect", ch).make);
  rec.near("discrete-mpa delay", 27.0 / 7.0, mpa.expected_delay, 1e-3);

  // Depths listed from the strongest state down.
  std::string depths;
  for (auto it = mpa.per_state_depth.rbegin(); it != mpa.per_state_depth.rend(); ++it) {
    if (!depths.empty()) depths += ',';
    depths += std::to_string(*it);
  }
  rec.equal("discrete-mpa per-state depths", "1,2,3,4,5,6,6", depths);
  rec.below("discrete-bisect delay", 27.0 / 7.0, bis.expected_delay);
  rec.near("discrete-bisect delay vs log2(7)", std::log2(7.0), bis.expected_delay, 0.5);
}

void conservation(const VerifyOptions& opt, Recorder& rec) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> users(2, 10);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int n = users(rng);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (i % 4 == 0) a = 0.0;
    if (!(a < b)) continue;
    const Region r = make_region(a, b, n);
    const double y = a + (b - a) * u(rng);
    if (!(y > a && y < b)) continue;
    const double total = success_probability(r, y) + region_mass(collision_child(r, y)) +
                         region_mass(idle_child(r, y));
    worst = std::max(worst, std::abs(total - region_mass(r)));
  }
  rec.near("max |mass - children| over 1e4 splits", 0.0, worst, 1e-12);
}

void oracle_equivalence(const VerifyOptions& opt, Recorder& rec) {
  for (int n : {2, 4, 8}) {
    auto cb = std::make_shared<const Codebook>(build_codebook(n, faulty(opt)));
    const auto ch = ChannelModel::iid_uniform(n);
    const BatchStats s = run_batch(ch, make_strategy("mpa", ch, cb), batch(opt));
    const std::string tag = " N=" + std::to_string(n);
    rec.near("simulated vs exact delay" + tag, expected_delay(*cb).value, s.mean_delay_conditional,
             0.01);
    rec.near("empirical vs code entropy" + tag, entropy(*cb).bits, s.empirical_codeword_entropy,
             0.02);
  }
}

void binary_expansion(const VerifyOptions& opt, Recorder& rec) {
  const Codebook cb = build_codebook(2, faulty(opt));
  double worst = 0.0;
  std::string worst_word = "1";
  double worst_threshold = 0.5, worst_value = 0.5;
  for (const auto& e : cb.entries()) {
    double value = 0.0, weight = 0.5;
    for (char c : e.codeword) {
      if (c != '0') value += weight;
      weight *= 0.5;
    }
    const double err = std::abs(value - e.threshold);
    if (err > worst) {
      worst = err;
      worst_word = e.codeword;
      worst_threshold = e.threshold;
      worst_value = value;
    }
  }
  rec.near("worst codeword " + worst_word, worst_value, worst_threshold, 1e-12);
}

void local_minimum(const VerifyOptions& opt, Recorder& rec) {
  for (double x : {0.45, 0.49, 0.51, 0.55}) {
    const std::string tag = " x=" + num(x);
    const double h = n2_entropy(x), d = n2_delay(x);
    rec.above("n2_entropy" + tag, 3.0, h);
    rec.above("n2_delay" + tag, 2.0, d);
    CodebookOptions o = faulty(opt);
    o.split_fraction = x;
    const Codebook cb = build_codebook(2, o);
    rec.near("code entropy" + tag, h, entropy(cb).bits, 1e-4);
    rec.near("code delay" + tag, d, expected_delay(cb).value, 1e-4);
  }
}

struct Criterion {
  const char* name;
  void (*run)(const VerifyOptions&, Recorder&);
};

const Criterion kCriteria[kCriterionCount] = {
    {"two-user codebook table", two_user_table},
    {"two-user entropy and delay", theorem_values},
    {"osa universal bound", osa_bound},
    {"first-threshold law", first_threshold},
    {"constant channel example", constant_three},
    {"correlated channel example", correlated},
    {"tree-mass conservation", conservation},
    {"codebook vs simulation", oracle_equivalence},
    {"binary-expansion property", binary_expansion},
    {"local minimum at one half", local_minimum},
};

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  if (id < 1 || id > kCriterionCount) {
    throw DomainError("no acceptance criterion " + std::to_string(id));
  }
  const Criterion& c = kCriteria[id - 1];
  CriterionResult result;
  result.id = id;
  result.name = c.name;
  Recorder rec{result};
  const auto t0 = Clock::now();
  try {
    c.run(options, rec);
  } catch (const std::exception& ex) {
    result.checks.push_back({"exception", "none", ex.what(), "exact", false});
  }
  result.seconds = seconds_since(t0);
  result.passed = !result.checks.empty() &&
                  std::all_of(result.checks.begin(), result.checks.end(),
                              [](const Check& ch) { return ch.passed; });
  return result;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& options) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    out.push_back(run_criterion(id, options));
  }
  return out;
}

std::string format_result(const CriterionResult& r, bool all_checks) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ");
  os << (r.id < 10 ? " " : "") << r.id << ' ' << r.name;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << " (" << r.seconds << " s)";
  for (const auto& c : r.checks) {
    if (c.passed && !all_checks) continue;
    os << "\n    " << (c.passed ? "ok   " : "FAIL ") << c.label << ": expected " << c.expected
       << ", actual " << c.actual << ", tolerance " << c.tolerance;
  }
  return os.str();
}

nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json j{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}};
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"label", c.label},
                      {"expected", c.expected},
                      {"actual", c.actual},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  }
  return j;
}

}  // namespace contention::cli
