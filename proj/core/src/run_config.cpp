#include "mfsr/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace mfsr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

struct Key {
  std::string name;
  std::function<void(ReconstructionConfig&, std::string_view)> set;
  std::function<std::string(const ReconstructionConfig&)> get;
};

template <class Member>
Key double_key(std::string name, Member m) {
  return {name,
          [m, name](ReconstructionConfig& c, std::string_view v) { m(c) = parse_double(name, v); },
          [m](const ReconstructionConfig& c) { return fmt_double(m(const_cast<ReconstructionConfig&>(c))); }};
}

template <class Member>
Key int_key(std::string name, Member m) {
  return {name,
          [m, name](ReconstructionConfig& c, std::string_view v) { m(c) = parse_int(name, v); },
          [m](const ReconstructionConfig& c) {
            return std::to_string(m(const_cast<ReconstructionConfig&>(c)));
          }};
}

const std::vector<Key>& key_table() {
  using C = ReconstructionConfig;
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    t.push_back(double_key("solver.alpha", [](C& c) -> double& { return c.solver.alpha; }));
    t.push_back(double_key("solver.beta", [](C& c) -> double& { return c.solver.beta; }));
    t.push_back({"solver.tau",
                 [](C& c, std::string_view v) {
                   c.solver.tau = (v == "auto") ? -1.0 : parse_double("solver.tau", v);
                   if (v != "auto" && c.solver.tau < 0)
                     throw ConfigError("solver.tau: must be >= 0 or 'auto'");
                 },
                 [](const C& c) { return c.solver.tau < 0 ? std::string("auto") : fmt_double(c.solver.tau); }});
    t.push_back(int_key("solver.max_outer", [](C& c) -> int& { return c.solver.max_outer; }));
    t.push_back(int_key("solver.pcg_max_iters", [](C& c) -> int& { return c.solver.pcg_max_iters; }));
    t.push_back(double_key("solver.pcg_tol", [](C& c) -> double& { return c.solver.pcg_tol; }));
    t.push_back(double_key("solver.early_stop_tol", [](C& c) -> double& { return c.solver.early_stop_tol; }));
    t.push_back(int_key("solver.probe_count", [](C& c) -> int& { return c.solver.probe_count; }));
    t.push_back(int_key("solver.bregman_iters", [](C& c) -> int& { return c.solver.bregman_iters; }));
    t.push_back(int_key("solver.bregman_cg_iters", [](C& c) -> int& { return c.solver.bregman_cg_iters; }));
    t.push_back(int_key("solver.admm_max_steps", [](C& c) -> int& { return c.solver.admm_max_steps; }));

    t.push_back(double_key("gpt.lambda", [](C& c) -> double& { return c.gpt.lambda; }));
    t.push_back(double_key("gpt.mu", [](C& c) -> double& { return c.gpt.mu; }));
    t.push_back(double_key("gpt.edge_percentile", [](C& c) -> double& { return c.gpt.edge_percentile; }));
    t.push_back(double_key("gpt.max_trace_len", [](C& c) -> double& { return c.gpt.max_trace_len; }));
    t.push_back(double_key("gpt.ratio_clamp_lo", [](C& c) -> double& { return c.gpt.ratio_clamp_lo; }));
    t.push_back(double_key("gpt.ratio_clamp_hi", [](C& c) -> double& { return c.gpt.ratio_clamp_hi; }));
    t.push_back(double_key("gpt.trace_step", [](C& c) -> double& { return c.gpt.trace_step; }));
    t.push_back(double_key("gpt.stop_fraction", [](C& c) -> double& { return c.gpt.stop_fraction; }));

    t.push_back(int_key("nltv.patch_radius", [](C& c) -> int& { return c.nltv.patch_radius; }));
    t.push_back(int_key("nltv.window_radius", [](C& c) -> int& { return c.nltv.window_radius; }));
    t.push_back(int_key("nltv.num_neighbors", [](C& c) -> int& { return c.nltv.num_neighbors; }));
    t.push_back({"nltv.eta",
                 [](C& c, std::string_view v) {
                   c.nltv.eta = (v == "auto") ? 0.0 : parse_double("nltv.eta", v);
                   if (v != "auto" && c.nltv.eta <= 0) throw ConfigError("nltv.eta: must be > 0 or 'auto'");
                 },
                 [](const C& c) { return c.nltv.eta <= 0 ? std::string("auto") : fmt_double(c.nltv.eta); }});
    t.push_back(double_key("nltv.eta_floor", [](C& c) -> double& { return c.nltv.eta_floor; }));
    t.push_back(int_key("nltv.rebuild_every", [](C& c) -> int& { return c.nltv.rebuild_every; }));

    t.push_back({"fidelity.p",
                 [](C& c, std::string_view v) {
                   if (v == "auto") {
                     c.fidelity.p.reset();
                     return;
                   }
                   const double p = parse_double("fidelity.p", v);
                   if (p < 1.0 || p > 2.0) throw ConfigError("fidelity.p: must lie in [1, 2] or be 'auto'");
                   c.fidelity.p = p;
                 },
                 [](const C& c) { return c.fidelity.p ? fmt_double(*c.fidelity.p) : std::string("auto"); }});
    t.push_back(double_key("fidelity.epsilon", [](C& c) -> double& { return c.fidelity.epsilon; }));
    t.push_back(double_key("fidelity.curve.a", [](C& c) -> double& { return c.fidelity.curve.a; }));
    t.push_back(double_key("fidelity.curve.b", [](C& c) -> double& { return c.fidelity.curve.b; }));
    t.push_back(double_key("fidelity.curve.c", [](C& c) -> double& { return c.fidelity.curve.c; }));
    t.push_back(double_key("fidelity.curve.d", [](C& c) -> double& { return c.fidelity.curve.d; }));
    t.push_back({"fidelity.reselect",
                 [](C& c, std::string_view v) { c.fidelity.reselect = parse_bool("fidelity.reselect", v); },
                 [](const C& c) { return std::string(c.fidelity.reselect ? "true" : "false"); }});
    return t;
  }();
  return table;
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

std::string RunConfig::suggest(std::string_view unknown) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : keys()) {
    const auto d = edit_distance(unknown, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best_d <= std::max<std::size_t>(3, unknown.size() / 3) ? best : std::string{};
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k = trim(key), v = trim(value);
  for (const auto& entry : key_table()) {
    if (entry.name == k) {
      if (v.empty()) throw ConfigError(k + ": missing value");
      entry.set(cfg_, v);
      return;
    }
  }
  std::string msg = "unknown config key '" + k + "'";
  if (const auto s = suggest(k); !s.empty()) msg += "; did you mean '" + s + "'?";
  throw ConfigError(msg);
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_string(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  load_string(ss.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : key_table()) out.emplace_back(k.name, k.get(cfg_));
  return out;
}

}  // namespace mfsr
