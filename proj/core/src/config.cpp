#include "tch/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tch {

std::string to_string(ThresholdRule r) {
  return r == ThresholdRule::compare ? "compare" : "absolute";
}

ConfigError::ConfigError(const std::string& message, std::size_t line_, std::size_t column_)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ", column " +
                                         std::to_string(column_) + ": " + message
                                   : message),
      line(line_),
      column(column_) {}

namespace {

struct Where {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string key;  // prefixed to value errors
};

[[noreturn]] void fail(const std::string& msg, const Where& w) {
  throw ConfigError(w.key.empty() ? msg : w.key + ": " + msg, w.line, w.column);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view s, Where w) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) fail("expected a real number, got '" + std::string(s) + "'", w);
  if (!std::isfinite(v)) fail("value must be finite", w);
  return v;
}

template <class Int>
Int to_int(std::string_view s, Where w) {
  Int v{};
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) fail("expected an integer, got '" + std::string(s) + "'", w);
  return v;
}

bool to_bool(std::string_view s, Where w) {
  std::string l(s);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  fail("expected a boolean, got '" + std::string(s) + "'", w);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::string fmt_doubles(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(fmt_double(x));
  return join(parts);
}

std::string fmt_mesh(const std::array<int, 3>& m) {
  std::string s = std::to_string(m[0]) + "x" + std::to_string(m[1]);
  if (m[2] > 0) s += "x" + std::to_string(m[2]);
  return s;
}

std::array<int, 3> to_mesh(std::string_view s, Where w) {
  std::array<int, 3> m{0, 0, 0};
  std::size_t k = 0;
  std::size_t start = 0;
  while (true) {
    const auto x = s.find('x', start);
    if (k == 3) fail("mesh entries have two or three sizes", w);
    m[k++] = to_int<int>(trim(s.substr(start, x - start)), w);
    if (x == std::string_view::npos) break;
    start = x + 1;
  }
  if (k < 2) fail("mesh entries look like 100x50 or 30x15x30", w);
  for (std::size_t i = 0; i < k; ++i) {
    if (m[i] < 2) fail("mesh sizes must be at least 2", w);
  }
  return m;
}

enum class Check { any, positive, nonneg };

void check(double v, Check c, Where w) {
  if (c == Check::positive && !(v > 0.0)) fail("value must be positive", w);
  if (c == Check::nonneg && !(v >= 0.0)) fail("value must be non-negative", w);
}

struct Field {
  std::function<void(RunConfig&, std::string_view, Where)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

template <class Member>
Field real(Member m, Check c = Check::any) {
  return {[m, c](RunConfig& cfg, std::string_view s, Where w) {
            const double v = to_double(s, w);
            check(v, c, w);
            std::invoke(m, cfg) = v;
          },
          [m](const RunConfig& cfg) { return fmt_double(std::invoke(m, cfg)); }};
}

template <class Member>
Field integer(Member m, long long lo) {
  return {[m, lo](RunConfig& cfg, std::string_view s, Where w) {
            using T = std::remove_reference_t<decltype(std::invoke(m, cfg))>;
            const T v = to_int<T>(s, w);
            if (static_cast<long long>(v) < lo) fail("value must be at least " + std::to_string(lo), w);
            std::invoke(m, cfg) = v;
          },
          [m](const RunConfig& cfg) { return std::to_string(std::invoke(m, cfg)); }};
}

template <class Member>
Field boolean(Member m) {
  return {[m](RunConfig& cfg, std::string_view s, Where w) { std::invoke(m, cfg) = to_bool(s, w); },
          [m](const RunConfig& cfg) { return std::string(std::invoke(m, cfg) ? "true" : "false"); }};
}

template <class Member>
Field reals(Member m, Check c) {
  return {[m, c](RunConfig& cfg, std::string_view s, Where w) {
            std::vector<double> v;
            for (auto item : split_list(s)) {
              v.push_back(to_double(item, w));
              check(v.back(), c, w);
            }
            std::invoke(m, cfg) = std::move(v);
          },
          [m](const RunConfig& cfg) { return fmt_doubles(std::invoke(m, cfg)); }};
}

// Member accessors as lambdas so nested structs read naturally below.
#define TCH_M(path) [](auto& c) -> auto& { return c.path; }

const Table& table() {
  static const Table t = [] {
    Table tab;
    tab.push_back({"mesh",
                   {{"dim", integer(TCH_M(mesh.dim), 2)},
                    {"extents",
                     {[](RunConfig& c, std::string_view s, Where w) {
                        const auto items = split_list(s);
                        if (items.size() < 2 || items.size() > 3) fail("extents take two or three values", w);
                        for (std::size_t i = 0; i < items.size(); ++i) {
                          c.mesh.extents[i] = to_double(items[i], w);
                          check(c.mesh.extents[i], Check::positive, w);
                        }
                      },
                      [](const RunConfig& c) {
                        return fmt_doubles({c.mesh.extents.begin(), c.mesh.extents.end()});
                      }}},
                    {"counts",
                     {[](RunConfig& c, std::string_view s, Where w) {
                        const auto items = split_list(s);
                        if (items.size() < 2 || items.size() > 3) fail("counts take two or three values", w);
                        for (std::size_t i = 0; i < items.size(); ++i) {
                          c.mesh.counts[i] = to_int<int>(items[i], w);
                          if (c.mesh.counts[i] < 2 && !(i == 2 && c.mesh.counts[i] == 1)) {
                            fail("counts must be at least 2", w);
                          }
                        }
                      },
                      [](const RunConfig& c) {
                        return join({std::to_string(c.mesh.counts[0]), std::to_string(c.mesh.counts[1]),
                                     std::to_string(c.mesh.counts[2])});
                      }}}}});
    tab.push_back(
        {"model",
         {{"eps_p", real(TCH_M(model.eps_p), Check::positive)},
          {"eps_nfa", real(TCH_M(model.eps_nfa), Check::positive)},
          {"mob_p", real(TCH_M(model.mob_p), Check::positive)},
          {"mob_nfa", real(TCH_M(model.mob_nfa), Check::positive)},
          {"tau", real(TCH_M(model.tau), Check::positive)},
          {"chi_p_nfa", real(TCH_M(model.chi_p_nfa))},
          {"chi_p_s", real(TCH_M(model.chi_p_s))},
          {"chi_nfa_s", real(TCH_M(model.chi_nfa_s))},
          {"N_p", real(TCH_M(model.N_p), Check::positive)},
          {"N_nfa", real(TCH_M(model.N_nfa), Check::positive)},
          {"N_s", real(TCH_M(model.N_s), Check::positive)},
          {"k_evap", real(TCH_M(model.k_evap), Check::nonneg)},
          {"g_p", real(TCH_M(model.g_p))},
          {"g_nfa", real(TCH_M(model.g_nfa))},
          {"h_p", real(TCH_M(model.h_p))},
          {"h_nfa", real(TCH_M(model.h_nfa))},
          {"patterning", boolean(TCH_M(model.patterning))},
          {"potential",
           {[](RunConfig& c, std::string_view s, Where w) {
              if (s == "polynomial") c.model.potential = Potential::polynomial;
              else if (s == "logarithmic") c.model.potential = Potential::logarithmic;
              else if (s == "none") c.model.potential = Potential::none;
              else fail("potential is one of polynomial, logarithmic, none", w);
            },
            [](const RunConfig& c) { return to_string(c.model.potential); }}},
          {"final_time", real(TCH_M(model.final_time), Check::positive)},
          {"seed",
           {[](RunConfig& c, std::string_view s, Where w) { c.model.seed = to_int<std::uint64_t>(s, w); },
            [](const RunConfig& c) { return std::to_string(c.model.seed); }}},
          {"init_mean", real(TCH_M(model.init_mean))},
          {"init_ampl", real(TCH_M(model.init_ampl), Check::nonneg)}}});
    tab.push_back({"solver",
                   {{"tol", real(TCH_M(solver.tol), Check::positive)},
                    {"max_iterations", integer(TCH_M(solver.max_iterations), 1)},
                    {"inner_tol", real(TCH_M(solver.inner.tol), Check::positive)},
                    {"inner_max_cycles", integer(TCH_M(solver.inner.max_cycles), 1)},
                    {"inner_fixed_cycles", integer(TCH_M(solver.inner.fixed_cycles), 0)},
                    {"amg_strength", real(TCH_M(solver.amg.strength_threshold), Check::positive)},
                    {"amg_max_coarse", integer(TCH_M(solver.amg.max_coarse), 1)},
                    {"amg_max_levels", integer(TCH_M(solver.amg.max_levels), 1)},
                    {"amg_presweeps", integer(TCH_M(solver.amg.presweeps), 0)},
                    {"amg_postsweeps", integer(TCH_M(solver.amg.postsweeps), 0)},
                    {"amg_second_pass", boolean(TCH_M(solver.amg.second_pass))},
                    {"deterministic", boolean(TCH_M(solver.deterministic))},
                    {"warm_start", boolean(TCH_M(solver.warm_start))},
                    {"divergence_bound", real(TCH_M(solver.divergence_bound), Check::positive)}}});
    tab.push_back({"output",
                   {{"dir",
                     {[](RunConfig& c, std::string_view s, Where w) {
                        if (s.empty()) fail("dir must not be empty", w);
                        c.output.dir = std::string(s);
                      },
                      [](const RunConfig& c) { return c.output.dir; }}},
                    {"snapshot_times", reals(TCH_M(output.snapshot_times), Check::nonneg)},
                    {"write_vtk", boolean(TCH_M(output.write_vtk))},
                    {"write_stats", boolean(TCH_M(output.write_stats))}}});
    tab.push_back(
        {"bench",
         {{"mode",
           {[](RunConfig& c, std::string_view s, Where w) {
              static const std::vector<std::string> modes{"run",         "bench-mesh", "bench-warm",
                                                          "bench-params", "eoc",        "eig-check",
                                                          "binarize"};
              if (std::find(modes.begin(), modes.end(), s) == modes.end()) fail("unknown bench mode '" + std::string(s) + "'", w);
              c.bench.mode = std::string(s);
            },
            [](const RunConfig& c) { return c.bench.mode; }}},
          {"steps", integer(TCH_M(bench.steps), 1)},
          {"stability_steps", integer(TCH_M(bench.stability_steps), 0)},
          {"warm_steps", integer(TCH_M(bench.warm_steps), 0)},
          {"meshes",
           {[](RunConfig& c, std::string_view s, Where w) {
              c.bench.meshes.clear();
              for (auto item : split_list(s)) c.bench.meshes.push_back(to_mesh(item, w));
            },
            [](const RunConfig& c) {
              std::vector<std::string> parts;
              for (const auto& m : c.bench.meshes) parts.push_back(fmt_mesh(m));
              return join(parts);
            }}},
          {"eps_list", reals(TCH_M(bench.eps_list), Check::positive)},
          {"tau_list", reals(TCH_M(bench.tau_list), Check::positive)},
          {"eoc_taus", reals(TCH_M(bench.eoc_taus), Check::positive)},
          {"eoc_tau_ref", real(TCH_M(bench.eoc_tau_ref), Check::positive)},
          {"eoc_final_time", real(TCH_M(bench.eoc_final_time), Check::positive)},
          {"eig_cap", integer(TCH_M(bench.eig_cap), 1)},
          {"threshold_rule",
           {[](RunConfig& c, std::string_view s, Where w) {
              if (s == "compare") c.bench.threshold_rule = ThresholdRule::compare;
              else if (s == "absolute") c.bench.threshold_rule = ThresholdRule::absolute;
              else fail("threshold_rule is compare or absolute", w);
            },
            [](const RunConfig& c) { return to_string(c.bench.threshold_rule); }}},
          {"threshold", real(TCH_M(bench.threshold))}}});
    return tab;
  }();
  return t;
}

#undef TCH_M

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& [name, fields] : table()) {
    if (name != section) continue;
    for (const auto& [k, f] : fields) {
      if (k == key) return &f;
    }
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(table().begin(), table().end(), [&](const auto& s) { return s.first == section; });
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::map<std::string, Where> seen;  // "section.key" -> location
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    const auto hash = raw.find_first_of("#;");
    std::string_view line = raw.substr(0, hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    const Where at{line_no, first + 1};
    line = trim(line);

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header", at);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) fail("unknown section [" + section + "]", at);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'", at);
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) fail("key '" + key + "' outside of a section", at);
    const Field* f = find_field(section, key);
    if (f == nullptr) fail("unknown key '" + key + "' in [" + section + "]", at);
    const std::string full = section + "." + key;
    if (seen.count(full) != 0) fail("duplicate key '" + key + "' in [" + section + "]", at);

    const std::string_view value = trim(line.substr(eq + 1));
    const std::size_t value_offset = raw.find('=', first) + 1;
    const auto vstart = raw.find_first_not_of(" \t", value_offset);
    Where vat{line_no, (vstart == std::string_view::npos ? value_offset : vstart) + 1, key};
    f->set(cfg, value, vat);
    vat.key.clear();
    seen[full] = vat;
    if (nl == text.size()) break;
  }

  const auto where_of = [&](const std::string& full) {
    const auto it = seen.find(full);
    return it == seen.end() ? Where{} : it->second;
  };
  if (cfg.mesh.dim != 2 && cfg.mesh.dim != 3) fail("dim must be 2 or 3", where_of("mesh.dim"));
  if (cfg.mesh.dim == 3 && cfg.mesh.counts[2] < 2) {
    fail("3D meshes need counts in all three directions", where_of("mesh.counts"));
  }
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const std::string name = msg.substr(0, msg.find(' '));
    fail(msg, where_of("model." + name));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& config) {
  std::string out;
  for (const auto& [section, fields] : table()) {
    if (!out.empty()) out += "\n";
    out += "[" + section + "]\n";
    for (const auto& [key, f] : fields) out += key + " = " + f.get(config) + "\n";
  }
  return out;
}

RunConfig default_bench_config() {
  RunConfig c;
  c.bench.meshes = {{100, 50, 0}, {200, 100, 0}, {400, 200, 0}};
  c.bench.eps_list = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  c.bench.tau_list = {1e-7, 1e-6, 1e-5, 1e-4};
  c.bench.eoc_taus = {2e-4, 4e-4, 8e-4, 1.6e-3, 3.2e-3};
  return c;
}

}  // namespace tch
