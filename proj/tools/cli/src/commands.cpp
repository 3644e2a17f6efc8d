#include "contention/cli/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "contention/engine.hpp"
#include "contention/errors.hpp"
#include "contention/mpa_codebook.hpp"
#include "contention/oracles.hpp"
#include "contention/strategies.hpp"
#include "contention/version.hpp"

namespace contention::cli {
namespace {

using nlohmann::json;

BatchConfig batch_config(const ExperimentConfig& c) {
  BatchConfig b;
  b.slots = c.slots;
  b.max_minislots = c.max_minislots;
  b.seed = c.seed;
  b.workers = c.workers;
  return b;
}

CodebookOptions codebook_options(const ExperimentConfig& c) {
  CodebookOptions o;
  o.epsilon = c.epsilon;
  o.max_entries = c.max_entries;
  return o;
}

json stats_json(const BatchStats& s) {
  return {{"n_users", s.n_users},
          {"channel", s.channel},
          {"strategy", s.strategy},
          {"slots", s.slots},
          {"K", s.max_minislots},
          {"seed", s.seed},
          {"resolved", s.resolved},
          {"mean_delay_conditional", s.mean_delay_conditional},
          {"mean_delay_charged", s.mean_delay_charged},
          {"delay_stderr", s.delay_stderr},
          {"success_rate", s.success_rate},
          {"empirical_entropy_bits", s.empirical_codeword_entropy}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string join(const std::vector<int>& v, char sep) {
  std::string out;
  for (int x : v) {
    if (!out.empty()) out += sep;
    out += std::to_string(x);
  }
  return out;
}

std::string gains_label(const std::vector<double>& g) {
  std::string out = "(";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ' ';
    out += format_double(g[i]);
  }
  return out + ")";
}

struct SweepRow {
  int n = 0;
  BatchStats osa;
  BatchStats mpa;
  double exact_delay = 0.0;
  double entropy_bits = 0.0;
};

std::string sweep_svg(const std::vector<SweepRow>& rows) {
  const double w = 640, h = 400, left = 60, right = 20, top = 20, bottom = 50;
  double lo = 1e9, hi = -1e9;
  for (const auto& r : rows) {
    for (double v : {r.osa.mean_delay_conditional, r.mpa.mean_delay_conditional, r.exact_delay}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  lo = std::floor(lo * 10.0) / 10.0;
  hi = std::ceil(hi * 10.0) / 10.0;
  if (hi <= lo) hi = lo + 0.1;
  const int n0 = rows.front().n, n1 = rows.back().n;
  const auto px = [&](int n) {
    return n1 == n0 ? left + (w - left - right) / 2
                    : left + (w - left - right) * (n - n0) / static_cast<double>(n1 - n0);
  };
  const auto py = [&](double v) { return top + (h - top - bottom) * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\""
     << h - bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
       << format_double(std::round(v * 1000.0) / 1000.0) << "</text>\n";
  }
  for (const auto& r : rows) {
    os << "<text x=\"" << px(r.n) << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\">"
       << r.n << "</text>\n";
  }
  os << "<text x=\"" << (w + left) / 2 << "\" y=\"" << h - 10
     << "\" text-anchor=\"middle\">number of users</text>\n";
  os << "<text x=\"14\" y=\"" << (h - bottom + top) / 2 << "\" transform=\"rotate(-90 14 "
     << (h - bottom + top) / 2 << ")\" text-anchor=\"middle\">mean delay (minislots)</text>\n";

  const auto curve = [&](const char* colour, const char* dash, const char* label, int slot,
                         auto value) {
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-dasharray=\"" << dash
       << "\" points=\"";
    for (const auto& r : rows) os << px(r.n) << ',' << py(value(r)) << ' ';
    os << "\"/>\n";
    const double ly = top + 14 + 16 * slot;
    os << "<line x1=\"" << w - 170 << "\" y1=\"" << ly - 4 << "\" x2=\"" << w - 145 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << colour << "\" stroke-dasharray=\"" << dash << "\"/>\n";
    os << "<text x=\"" << w - 140 << "\" y=\"" << ly << "\">" << label << "</text>\n";
  };
  curve("#c0392b", "none", "OSA (simulated)", 0,
        [](const SweepRow& r) { return r.osa.mean_delay_conditional; });
  curve("#2471a3", "none", "MPA (simulated)", 1,
        [](const SweepRow& r) { return r.mpa.mean_delay_conditional; });
  curve("#2471a3", "4 3", "MPA (exact)", 2, [](const SweepRow& r) { return r.exact_delay; });
  os << "</svg>\n";
  return os.str();
}

}  // namespace

json config_json(const ExperimentConfig& c) {
  json j{{"command", c.command}};
  const auto& cmd = c.command;
  if (cmd == "codebook") {
    j["n_users"] = c.n_users;
    j["epsilon"] = c.epsilon;
    j["max_entries"] = c.max_entries;
    j["format"] = c.format;
  } else if (cmd == "simulate") {
    j["n_users"] = c.n_users;
    j["channel"] = c.channel;
    if (c.channel == "correlated" || c.channel.rfind("chain-", 0) == 0) {
      j["channel_epsilon"] = c.channel_epsilon;
    }
    j["strategy"] = c.strategy;
    j["slots"] = c.slots;
    j["max_minislots"] = c.max_minislots;
    j["seed"] = c.seed;
    j["format"] = c.format;
    if (c.strategy == "mpa") {
      j["epsilon"] = c.epsilon;
      j["max_entries"] = c.max_entries;
    }
  } else if (cmd == "sweep") {
    j["n_min"] = c.n_min;
    j["n_max"] = c.n_max;
    j["slots"] = c.slots;
    j["max_minislots"] = c.max_minislots;
    j["seed"] = c.seed;
    j["epsilon"] = c.epsilon;
    j["max_entries"] = c.max_entries;
    j["format"] = c.format;
  } else if (cmd == "example") {
    j["example"] = c.example;
    if (c.example == "correlated") {
      j["channel_epsilon"] = c.channel_epsilon;
    } else {
      j["slots"] = c.slots;
      j["max_minislots"] = c.max_minislots;
      j["seed"] = c.seed;
    }
    j["format"] = c.format;
  } else {
    j["slots"] = c.slots;
    j["seed"] = c.seed;
  }
  return j;
}

json provenance(const ExperimentConfig& c) {
  return {{"tool", "contention"},
          {"tool_version", kVersion},
          {"seed", c.seed},
          {"config", config_json(c)}};
}

std::string csv_preamble(const ExperimentConfig& c) {
  return std::string("# contention ") + kVersion + " " + provenance(c).dump() + "\n";
}

ChannelModel parse_channel(const std::string& name, int n_users, double channel_epsilon) {
  if (name == "iid") return ChannelModel::iid_uniform(n_users);
  if (name == "constant") return ChannelModel::constant(n_users);
  if (name == "correlated") return correlated_example_channel(channel_epsilon);
  if (name.rfind("chain-", 0) == 0) {
    const std::string tail = name.substr(6);
    std::size_t used = 0;
    unsigned long k = 0;
    try {
      k = std::stoul(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size() || k < 2) {
      throw DomainError("bad chain channel '" + name + "' (expected chain-<k>, k >= 2)");
    }
    return chain_channel(k, channel_epsilon);
  }
  throw DomainError("unknown channel '" + name + "' (expected iid, constant, correlated or chain-<k>)");
}

std::string codebook_report(const ExperimentConfig& c) {
  const Codebook cb = build_codebook(c.n_users, codebook_options(c));
  if (c.format == "json") {
    json j = provenance(c);
    j.update(to_json(cb));
    return dump(j);
  }
  const auto h = entropy(cb);
  const auto d = expected_delay(cb);
  std::ostringstream os;
  os << csv_preamble(c);
  os << "# n_users=" << cb.users() << " epsilon=" << format_double(cb.epsilon())
     << " residual_mass=" << format_double(cb.residual_mass())
     << " entropy_bits=" << format_double(h.bits) << " expected_delay=" << format_double(d.value)
     << "\n";
  os << "threshold,codeword,probability,depth\n";
  for (const auto& e : cb.entries()) {
    os << format_double(e.threshold) << ',' << e.codeword << ',' << format_double(e.probability)
       << ',' << e.depth << '\n';
  }
  return os.str();
}

std::string simulate_report(const ExperimentConfig& c) {
  const ChannelModel channel = parse_channel(c.channel, c.n_users, c.channel_epsilon);
  std::shared_ptr<const Codebook> tree;
  if (c.strategy == "mpa" && channel.kind() != ChannelModel::Kind::discrete_joint) {
    tree = std::make_shared<const Codebook>(build_codebook(channel.users(), codebook_options(c)));
  }
  const NamedStrategy strategy = make_strategy(c.strategy, channel, tree);

  std::ofstream trace_file;
  SlotObserver observer;
  if (!c.trace.empty()) {
    trace_file.open(c.trace);
    if (!trace_file) {
      throw std::runtime_error("cannot open trace file '" + c.trace + "': " +
                               std::strerror(errno) + " (config " + config_json(c).dump() + ")");
    }
    trace_file << provenance(c).dump() << '\n';
    observer = [&](std::uint64_t slot, const SlotSample& sample, const SlotTrace& trace) {
      if (c.trace_limit != 0 && slot >= c.trace_limit) return;
      trace_file << trace_to_json(slot, sample, trace).dump() << '\n';
    };
  }

  BatchStats stats = run_batch(channel, strategy, batch_config(c), observer);
  stats.channel = c.channel;
  if (trace_file.is_open()) {
    trace_file.flush();
    if (!trace_file) {
      throw std::runtime_error("failed writing trace file '" + c.trace + "' (config " +
                               config_json(c).dump() + ")");
    }
  }

  if (c.format == "json") {
    json j = provenance(c);
    j["stats"] = stats_json(stats);
    return dump(j);
  }
  return csv_preamble(c) + batch_csv_header() + "\n" + batch_csv_row(stats) + "\n";
}

SweepOutput sweep_report(const ExperimentConfig& c) {
  if (c.n_min < 2 || c.n_max < c.n_min) {
    throw DomainError("sweep needs 2 <= n_min <= n_max");
  }
  std::vector<SweepRow> rows;
  for (int n = c.n_min; n <= c.n_max; ++n) {
    SweepRow row;
    row.n = n;
    const auto channel = ChannelModel::iid_uniform(n);
    auto tree = std::make_shared<const Codebook>(build_codebook(n, codebook_options(c)));
    row.osa = run_batch(channel, make_strategy("osa", channel), batch_config(c));
    row.mpa = run_batch(channel, make_strategy("mpa", channel, tree), batch_config(c));
    row.exact_delay = expected_delay(*tree).value;
    row.entropy_bits = entropy(*tree).bits;
    rows.push_back(row);
  }

  SweepOutput out;
  if (c.format == "json") {
    json j = provenance(c);
    auto& arr = j["rows"] = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"n_users", r.n},
                     {"osa_delay", r.osa.mean_delay_conditional},
                     {"osa_stderr", r.osa.delay_stderr},
                     {"mpa_delay", r.mpa.mean_delay_conditional},
                     {"mpa_stderr", r.mpa.delay_stderr},
                     {"mpa_exact_delay", r.exact_delay},
                     {"mpa_entropy_bits", r.entropy_bits}});
    }
    out.table = dump(j);
  } else {
    std::ostringstream os;
    os << csv_preamble(c);
    os << "n_users,osa_delay,osa_stderr,mpa_delay,mpa_stderr,mpa_exact_delay,mpa_entropy_bits\n";
    for (const auto& r : rows) {
      os << r.n << ',' << format_double(r.osa.mean_delay_conditional) << ','
         << format_double(r.osa.delay_stderr) << ',' << format_double(r.mpa.mean_delay_conditional)
         << ',' << format_double(r.mpa.delay_stderr) << ',' << format_double(r.exact_delay) << ','
         << format_double(r.entropy_bits) << '\n';
    }
    out.table = os.str();
  }
  if (!c.svg.empty()) {
    out.svg = "<!-- contention " + std::string(kVersion) + " " + provenance(c).dump() + " -->\n" +
              sweep_svg(rows);
  }
  return out;
}

ExampleOutput example_report(const ExperimentConfig& c) {
  ExampleOutput out;
  if (c.example == "constant3") {
    const auto channel = ChannelModel::constant(3);
    BatchStats osa = run_batch(channel, make_strategy("osa", channel), batch_config(c));
    BatchStats two = run_batch(channel, make_strategy("two-sided", channel), batch_config(c));
    osa.channel = two.channel = "constant";
    out.assertion_holds = two.empirical_codeword_entropy < osa.empirical_codeword_entropy;
    out.assertion = "two-sided empirical entropy < osa empirical entropy";
    if (c.format == "json") {
      json j = provenance(c);
      j["results"] = json::array({stats_json(osa), stats_json(two)});
      j["assertion"] = {{"statement", out.assertion}, {"holds", out.assertion_holds}};
      out.text = dump(j);
    } else {
      std::ostringstream os;
      os << csv_preamble(c);
      os << "# " << out.assertion << ": " << (out.assertion_holds ? "holds" : "VIOLATED") << "\n";
      os << "strategy,mean_delay_conditional,delay_stderr,success_rate,empirical_entropy_bits\n";
      for (const auto* s : {&osa, &two}) {
        os << s->strategy << ',' << format_double(s->mean_delay_conditional) << ','
           << format_double(s->delay_stderr) << ',' << format_double(s->success_rate) << ','
           << format_double(s->empirical_codeword_entropy) << '\n';
      }
      out.text = os.str();
    }
    return out;
  }
  if (c.example == "correlated") {
    const auto channel = correlated_example_channel(c.channel_epsilon);
    const auto mpa = discrete_exact_delay(channel, make_strategy("discrete-mpa", channel).make);
    const auto bis = discrete_exact_delay(channel, make_strategy("discrete-bisect", channel).make);
    out.assertion_holds = bis.expected_delay < mpa.expected_delay;
    out.assertion = "discrete-bisect expected delay < discrete-mpa expected delay";
    const auto& states = channel.states();
    const auto& probs = channel.probabilities();
    if (c.format == "json") {
      json j = provenance(c);
      auto& rows = j["states"] = json::array();
      for (std::size_t s = 0; s < states.size(); ++s) {
        rows.push_back({{"gains", states[s]},
                        {"probability", probs[s]},
                        {"discrete_mpa_depth", mpa.per_state_depth[s]},
                        {"discrete_mpa_declared", static_cast<bool>(mpa.declared[s])},
                        {"discrete_bisect_depth", bis.per_state_depth[s]},
                        {"discrete_bisect_declared", static_cast<bool>(bis.declared[s])}});
      }
      j["expected_delay"] = {{"discrete-mpa", mpa.expected_delay},
                             {"discrete-bisect", bis.expected_delay}};
      j["assertion"] = {{"statement", out.assertion}, {"holds", out.assertion_holds}};
      out.text = dump(j);
    } else {
      std::ostringstream os;
      os << csv_preamble(c);
      os << "# expected_delay discrete-mpa=" << format_double(mpa.expected_delay)
         << " discrete-bisect=" << format_double(bis.expected_delay) << "\n";
      os << "# discrete-mpa depths (last state first)=";
      std::vector<int> rev(mpa.per_state_depth.rbegin(), mpa.per_state_depth.rend());
      os << join(rev, ';') << "\n";
      os << "# " << out.assertion << ": " << (out.assertion_holds ? "holds" : "VIOLATED") << "\n";
      os << "state,gains,probability,discrete_mpa_depth,discrete_mpa_declared,"
            "discrete_bisect_depth,discrete_bisect_declared\n";
      for (std::size_t s = 0; s < states.size(); ++s) {
        os << s << ',' << gains_label(states[s]) << ',' << format_double(probs[s]) << ','
           << mpa.per_state_depth[s] << ',' << (mpa.declared[s] ? 1 : 0) << ','
           << bis.per_state_depth[s] << ',' << (bis.declared[s] ? 1 : 0) << '\n';
      }
      out.text = os.str();
    }
    return out;
  }
  throw DomainError("unknown example '" + c.example + "' (expected constant3 or correlated)");
}

void write_output(const ExperimentConfig& c, const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno) +
                             " (config " + config_json(c).dump() + ")");
  }
  f << content;
  f.flush();
  if (!f) {
    throw std::runtime_error("failed writing '" + path + "' (config " + config_json(c).dump() + ")");
  }
}

}  // namespace contention::cli
