#include "polyrad/io.hpp"

#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "polyrad/error.hpp"

namespace polyrad::io {

using json = nlohmann::ordered_json;

#ifndef POLYRAD_VERSION
#define POLYRAD_VERSION "dev"
#endif

namespace {

// ---------------------------------------------------------------------------
// Numbers that survive a JSON round trip even when non-finite.

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double as_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::IoError, "expected a number, got " + j.dump());
}

json opt_num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

std::optional<double> as_opt_num(const json& j) {
  if (j.is_null()) return std::nullopt;
  return as_num(j);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Config parsing with field paths.

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_text(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << e.what();
    throw Error(ErrorCode::ConfigError, os.str());
  }
}

class Node {
 public:
  Node(const json& j, std::string path, std::string_view source) : j_(j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw Error(ErrorCode::ConfigError, std::string(source_) + ": field '" + join(field) + "': " + msg);
  }

  void require_object() const {
    if (!j_.is_object()) fail("", "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items())
      if (!ok.count(k)) fail(k, "unknown field");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  Node child(const std::string& k) const {
    if (!j_.contains(k)) fail(k, "missing");
    Node c(j_.at(k), join(k), source_);
    c.require_object();
    return c;
  }

  double number(const std::string& k) const {
    if (!j_.contains(k)) fail(k, "missing");
    const json& v = j_.at(k);
    if (!v.is_number()) fail(k, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(k, "must be finite");
    return x;
  }
  double number(const std::string& k, double def) const { return has(k) ? number(k) : def; }

  long long integer(const std::string& k) const {
    if (!j_.contains(k)) fail(k, "missing");
    const json& v = j_.at(k);
    if (!v.is_number_integer()) fail(k, "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& k, long long def) const { return has(k) ? integer(k) : def; }

  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) fail(k, "expected true or false");
    return j_.at(k).get<bool>();
  }

  std::string string(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) fail(k, "expected a string");
    return j_.at(k).get<std::string>();
  }

  std::pair<double, double> pair(const std::string& k) const {
    if (!has(k)) fail(k, "missing");
    const json& v = j_.at(k);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(k, "expected [lo, hi]");
    const double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (!(lo < hi)) fail(k, "lo must be below hi");
    return {lo, hi};
  }

  /// A number, an array of numbers, or {"lo","hi","count"[,"spacing"]}.
  std::vector<double> grid(const std::string& k) const {
    if (!has(k)) fail(k, "missing");
    const json& v = j_.at(k);
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(k + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
      }
      if (out.empty()) fail(k, "grid is empty");
    } else if (v.is_object()) {
      Node g(v, join(k), source_);
      g.allow_only({"lo", "hi", "count", "spacing"});
      const double lo = g.number("lo"), hi = g.number("hi");
      const long long count = g.integer("count");
      const std::string spacing = g.string("spacing", "linear");
      if (lo > hi) g.fail("", "lo > hi");
      if (count < 1) g.fail("count", "must be at least 1");
      if (spacing != "linear" && spacing != "log") g.fail("spacing", "expected \"linear\" or \"log\"");
      if (spacing == "log" && !(lo > 0.0)) g.fail("lo", "log spacing needs lo > 0");
      for (long long i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(spacing == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
      }
    } else {
      fail(k, "expected a number, an array or {lo, hi, count}");
    }
    for (double x : out)
      if (!std::isfinite(x)) fail(k, "non-finite grid value");
    return out;
  }

 private:
  std::string join(const std::string& k) const {
    if (k.empty()) return path_;
    return path_.empty() ? k : path_ + "." + k;
  }

  const json& j_;
  std::string path_;
  std::string_view source_;
};

Sign parse_sign(const Node& node, long long s) {
  if (s == 1) return Sign::Plus;
  if (s == -1) return Sign::Minus;
  node.fail("s", "must be +1 or -1");
}

ProblemSpec parse_problem(const Node& root) {
  const Node p = root.child("problem");
  p.allow_only({"n", "m", "s", "q"});
  const int n = static_cast<int>(p.integer("n"));
  const int m = static_cast<int>(p.integer("m"));
  if (n < 2) p.fail("n", "must be at least 2");
  if (m != 2 && m != 3) p.fail("m", "must be 2 or 3");
  const Sign s = parse_sign(p, p.integer("s", m == 3 ? 1 : -1));
  const double q = p.number("q", 1.0);
  if (!(q > 0.0)) p.fail("q", "must be positive");
  return ProblemSpec::make(n, m, s, q);
}

IntegrationConfig parse_integration(const Node& root) {
  IntegrationConfig cfg;
  if (!root.has("integration")) return cfg;
  const Node c = root.child("integration");
  c.allow_only({"rel_tol", "abs_tol", "r_max", "extinction_threshold", "max_steps", "dense_output_stride",
                "blowup_threshold"});
  cfg.rel_tol = c.number("rel_tol", cfg.rel_tol);
  cfg.abs_tol = c.number("abs_tol", cfg.abs_tol);
  cfg.r_max = c.number("r_max", cfg.r_max);
  cfg.extinction_threshold = c.number("extinction_threshold", cfg.extinction_threshold);
  const long long steps = c.integer("max_steps", static_cast<long long>(cfg.max_steps));
  if (steps < 1) c.fail("max_steps", "must be positive");
  cfg.max_steps = static_cast<std::size_t>(steps);
  cfg.dense_output_stride = c.number("dense_output_stride", cfg.dense_output_stride);
  cfg.blowup_threshold = c.number("blowup_threshold", cfg.blowup_threshold);
  try {
    cfg.validate(0.0);
  } catch (const Error& e) {
    c.fail("", e.what());
  }
  return cfg;
}

ClassifierConfig parse_classifier(const Node& root) {
  ClassifierConfig cc;
  if (!root.has("classifier")) return cc;
  const Node c = root.child("classifier");
  c.allow_only({"band", "tail_fraction", "tail_samples", "rho_min_scale", "plateau_decay", "plateau_tol",
                "quartic_settle_tol"});
  cc.band = c.number("band", cc.band);
  cc.tail_fraction = c.number("tail_fraction", cc.tail_fraction);
  const long long ts = c.integer("tail_samples", static_cast<long long>(cc.tail_samples));
  if (ts < 4) c.fail("tail_samples", "must be at least 4");
  cc.tail_samples = static_cast<std::size_t>(ts);
  cc.rho_min_scale = c.number("rho_min_scale", cc.rho_min_scale);
  cc.plateau_decay = c.number("plateau_decay", cc.plateau_decay);
  cc.plateau_tol = c.number("plateau_tol", cc.plateau_tol);
  cc.quartic_settle_tol = c.number("quartic_settle_tol", cc.quartic_settle_tol);
  if (!(cc.band > 0.0 && cc.band < 1.0)) c.fail("band", "must lie in (0, 1)");
  if (!(cc.tail_fraction > 0.0 && cc.tail_fraction < 1.0)) c.fail("tail_fraction", "must lie in (0, 1)");
  return cc;
}

json integration_json(const IntegrationConfig& c) {
  return json{{"rel_tol", c.rel_tol},
              {"abs_tol", c.abs_tol},
              {"r_max", c.r_max},
              {"extinction_threshold", c.extinction_threshold},
              {"max_steps", c.max_steps},
              {"dense_output_stride", c.dense_output_stride},
              {"blowup_threshold", c.blowup_threshold}};
}

json classifier_json(const ClassifierConfig& c) {
  return json{{"band", c.band},
              {"tail_fraction", c.tail_fraction},
              {"tail_samples", c.tail_samples},
              {"rho_min_scale", c.rho_min_scale},
              {"plateau_decay", c.plateau_decay},
              {"plateau_tol", c.plateau_tol},
              {"quartic_settle_tol", c.quartic_settle_tol}};
}

json problem_json(int n, int m, Sign s, std::optional<double> q) {
  json j{{"n", n}, {"m", m}, {"s", static_cast<int>(s)}};
  if (q) j["q"] = *q;
  return j;
}

}  // namespace

void RunConfig::apply(IntegrationConfig& cfg) const {
  if (rel_tol) cfg.rel_tol = *rel_tol;
  if (abs_tol) cfg.abs_tol = *abs_tol;
  if (r_max) cfg.r_max = *r_max;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepPlan parse_sweep_plan(std::string_view text, std::string_view source) {
  const json j = parse_text(text, source);
  const Node root(j, "", source);
  root.require_object();
  root.allow_only({"name", "problem", "grid", "integration", "classifier", "invariants", "forecast", "threads"});
  SweepPlan plan;
  plan.name = root.string("name", plan.name);
  const Node p = root.child("problem");
  p.allow_only({"n", "m", "s"});
  plan.n = static_cast<int>(p.integer("n"));
  plan.m = static_cast<int>(p.integer("m"));
  if (plan.n < 2) p.fail("n", "must be at least 2");
  if (plan.m != 2 && plan.m != 3) p.fail("m", "must be 2 or 3");
  plan.s = parse_sign(p, p.integer("s", plan.m == 3 ? 1 : -1));
  const Node g = root.child("grid");
  g.allow_only({"q", "a", "b", "c"});
  plan.q_values = g.grid("q");
  plan.a_values = g.grid("a");
  plan.b_values = g.grid("b");
  if (plan.m == 3) plan.c_values = g.grid("c");
  else if (g.has("c")) g.fail("c", "only meaningful for m = 3");
  for (double q : plan.q_values)
    if (!(q > 0.0)) g.fail("q", "values must be positive");
  for (double a : plan.a_values)
    if (!(a > 0.0)) g.fail("a", "values must be positive");
  plan.cfg = parse_integration(root);
  plan.classifier = parse_classifier(root);
  plan.invariants = root.boolean("invariants", plan.invariants);
  plan.forecast = root.boolean("forecast", plan.forecast);
  const long long th = root.integer("threads", 0);
  if (th < 0) root.fail("threads", "must be non-negative");
  plan.threads = static_cast<unsigned>(th);
  plan.validate();
  return plan;
}

std::string to_json(const SweepPlan& plan) {
  json grid{{"q", plan.q_values}, {"a", plan.a_values}, {"b", plan.b_values}};
  if (plan.m == 3) grid["c"] = plan.c_values;
  json j{{"name", plan.name},
         {"problem", problem_json(plan.n, plan.m, plan.s, std::nullopt)},
         {"grid", grid},
         {"integration", integration_json(plan.cfg)},
         {"classifier", classifier_json(plan.classifier)},
         {"invariants", plan.invariants},
         {"forecast", plan.forecast},
         {"threads", plan.threads}};
  return j.dump(2);
}

BisectConfig parse_bisect_config(std::string_view text, std::string_view source) {
  const json j = parse_text(text, source);
  const Node root(j, "", source);
  root.require_object();
  root.allow_only({"name", "problem", "origin", "free", "bracket", "integration", "classifier"});
  BisectConfig cfg;
  cfg.name = root.string("name", cfg.name);
  cfg.spec = parse_problem(root);
  const Node o = root.child("origin");
  o.allow_only({"a", "b", "c"});
  const double a = o.number("a");
  if (!(a > 0.0)) o.fail("a", "must be positive");
  const std::string free = root.string("free", "b");
  if (free == "b") cfg.free = FreeParam::B;
  else if (free == "c") cfg.free = FreeParam::C;
  else root.fail("free", "expected \"b\" or \"c\"");
  if (cfg.free == FreeParam::C && cfg.spec.m != 3) root.fail("free", "c is only free for m = 3");
  const double b = o.number("b", 0.0);
  std::optional<double> c;
  if (cfg.spec.m == 3) c = o.number("c", 0.0);
  else if (o.has("c")) o.fail("c", "only meaningful for m = 3");
  cfg.origin = OriginData::make(cfg.spec, a, b, c);
  std::tie(cfg.lo, cfg.hi) = root.pair("bracket");
  cfg.cfg = parse_integration(root);
  cfg.classifier = parse_classifier(root);
  return cfg;
}

std::string to_json(const BisectConfig& c) {
  json origin{{"a", c.origin.a}, {"b", c.origin.b}};
  if (c.origin.c) origin["c"] = *c.origin.c;
  json j{{"name", c.name},
         {"problem", problem_json(c.spec.n, c.spec.m, c.spec.s, c.spec.q)},
         {"origin", origin},
         {"free", c.free == FreeParam::B ? "b" : "c"},
         {"bracket", {c.lo, c.hi}},
         {"integration", integration_json(c.cfg)},
         {"classifier", classifier_json(c.classifier)}};
  return j.dump(2);
}

RepresentConfig parse_represent_config(std::string_view text, std::string_view source) {
  const json j = parse_text(text, source);
  const Node root(j, "", source);
  root.require_object();
  root.allow_only({"name", "n", "q", "a", "b_bracket", "c_bracket", "integration", "classifier"});
  RepresentConfig cfg;
  cfg.name = root.string("name", cfg.name);
  cfg.n = static_cast<int>(root.integer("n", 5));
  if (cfg.n != 5) root.fail("n", "the tri-harmonic representation is implemented for n = 5");
  cfg.q_values = root.grid("q");
  for (double q : cfg.q_values)
    if (!(q > 0.0)) root.fail("q", "values must be positive");
  cfg.a = root.number("a", cfg.a);
  if (!(cfg.a > 0.0)) root.fail("a", "must be positive");
  if (root.has("b_bracket")) cfg.b_bracket = root.pair("b_bracket");
  if (root.has("c_bracket")) cfg.c_bracket = root.pair("c_bracket");
  cfg.cfg = parse_integration(root);
  cfg.classifier = parse_classifier(root);
  return cfg;
}

std::string to_json(const RepresentConfig& c) {
  json j{{"name", c.name},
         {"n", c.n},
         {"q", c.q_values},
         {"a", c.a},
         {"b_bracket", {c.b_bracket.first, c.b_bracket.second}},
         {"c_bracket", {c.c_bracket.first, c.c_bracket.second}},
         {"integration", integration_json(c.cfg)},
         {"classifier", classifier_json(c.classifier)}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Sweep records

SweepRecord SweepRecord::from(const CellResult& cell) {
  SweepRecord r;
  r.index = cell.cell.index;
  r.n = cell.cell.spec.n;
  r.m = cell.cell.spec.m;
  r.s = static_cast<int>(cell.cell.spec.s);
  r.q = cell.cell.spec.q;
  r.a = cell.cell.origin.a;
  r.b = cell.cell.origin.b;
  r.c = cell.cell.origin.c;
  r.cls = std::string(to_string(cell.growth.cls));
  r.constant = cell.growth.constant;
  r.exponent = cell.growth.exponent;
  r.termination = std::string(to_string(cell.termination.cause));
  r.termination_radius = cell.termination.radius;
  r.steps = cell.steps;
  for (const auto& c : cell.invariants.checks)
    r.checks.push_back({c.name, std::string(to_string(c.status)), c.worst_margin, c.worst_radius});
  if (cell.forecast) {
    r.m_inf = cell.forecast->m_inf;
    r.log_r_w0 = cell.forecast->log_r_w0;
    r.log_r_death = cell.forecast->log_r_death;
    r.observed = cell.forecast->observed;
    r.mass_converged = cell.forecast->mass_converged;
  }
  r.error = cell.error;
  return r;
}

std::string schema_header(std::string_view kind) {
  return json{{"schema", "polyrad." + std::string(kind)}, {"version", kSchemaVersion}}.dump();
}

std::string to_jsonl(const SweepRecord& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"status", c.status}, {"worst_margin", num(c.worst_margin)}, {"radius", num(c.radius)}});
  json j{{"index", r.index},
         {"spec", {{"n", r.n}, {"m", r.m}, {"s", r.s}, {"q", num(r.q)}}},
         {"origin", {{"a", num(r.a)}, {"b", num(r.b)}, {"c", opt_num(r.c)}}},
         {"class", r.cls},
         {"constant", num(r.constant)},
         {"exponent", num(r.exponent)},
         {"termination", {{"cause", r.termination}, {"radius", num(r.termination_radius)}}},
         {"steps", r.steps},
         {"invariants", checks},
         {"forecast",
          r.m_inf ? json{{"m_inf", opt_num(r.m_inf)},
                         {"log_r_w0", opt_num(r.log_r_w0)},
                         {"log_r_death", opt_num(r.log_r_death)},
                         {"observed", opt_num(r.observed)},
                         {"mass_converged", r.mass_converged ? json(*r.mass_converged) : json(nullptr)}}
                  : json(nullptr)},
         {"error", r.error}};
  return j.dump();
}

SweepRecord sweep_record_from_jsonl(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::IoError, std::string("bad JSONL record: ") + e.what());
  }
  try {
    SweepRecord r;
    r.index = j.at("index").get<std::size_t>();
    const auto& s = j.at("spec");
    r.n = s.at("n").get<int>();
    r.m = s.at("m").get<int>();
    r.s = s.at("s").get<int>();
    r.q = as_num(s.at("q"));
    const auto& o = j.at("origin");
    r.a = as_num(o.at("a"));
    r.b = as_num(o.at("b"));
    r.c = as_opt_num(o.at("c"));
    r.cls = j.at("class").get<std::string>();
    r.constant = as_num(j.at("constant"));
    r.exponent = as_num(j.at("exponent"));
    r.termination = j.at("termination").at("cause").get<std::string>();
    r.termination_radius = as_num(j.at("termination").at("radius"));
    r.steps = j.at("steps").get<std::size_t>();
    for (const auto& c : j.at("invariants"))
      r.checks.push_back({c.at("name").get<std::string>(), c.at("status").get<std::string>(),
                          as_num(c.at("worst_margin")), as_num(c.at("radius"))});
    const auto& f = j.at("forecast");
    if (!f.is_null()) {
      r.m_inf = as_opt_num(f.at("m_inf"));
      r.log_r_w0 = as_opt_num(f.at("log_r_w0"));
      r.log_r_death = as_opt_num(f.at("log_r_death"));
      r.observed = as_opt_num(f.at("observed"));
      if (!f.at("mass_converged").is_null()) r.mass_converged = f.at("mass_converged").get<bool>();
    }
    r.error = j.at("error").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("bad JSONL record: ") + e.what());
  }
}

std::vector<SweepRecord> read_sweep_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, file.string() + ": empty file");
  const json head = json::parse(line, nullptr, false);
  if (head.is_discarded() || !head.contains("schema") || head["schema"] != "polyrad.sweep")
    throw Error(ErrorCode::IoError, file.string() + ":1: missing polyrad.sweep schema header");
  if (head.value("version", 0) != kSchemaVersion)
    throw Error(ErrorCode::IoError, file.string() + ":1: unsupported schema version");
  std::vector<SweepRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(sweep_record_from_jsonl(line));
  return out;
}

std::string class_summary(const std::vector<SweepRecord>& records) {
  const GrowthClass all[] = {GrowthClass::Extinct, GrowthClass::Power,     GrowthClass::LogCorrected,
                             GrowthClass::Linear,  GrowthClass::Quadratic, GrowthClass::Quartic,
                             GrowthClass::Undetermined};
  std::map<double, std::map<std::string, int>> counts;
  std::map<double, int> errors;
  for (const auto& r : records) {
    ++counts[r.q][r.cls];
    if (!r.error.empty()) ++errors[r.q];
  }
  std::ostringstream os;
  os << std::left << std::setw(8) << "q";
  for (auto c : all) os << std::setw(14) << to_string(c);
  os << "errors\n";
  for (const auto& [q, row] : counts) {
    os << std::setw(8) << fmt(q);
    for (auto c : all) {
      const auto it = row.find(std::string(to_string(c)));
      os << std::setw(14) << (it == row.end() ? 0 : it->second);
    }
    os << errors[q] << "\n";
  }
  return os.str();
}

void write_sweep_outputs(const std::filesystem::path& dir, const std::string& name,
                         const std::vector<SweepRecord>& records) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& ext) {
    const auto file = dir / (name + ext);
    std::ofstream out(file);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
    return out;
  };
  {
    auto out = open(".jsonl");
    out << schema_header("sweep") << "\n";
    for (const auto& r : records) out << to_jsonl(r) << "\n";
  }
  {
    auto out = open(".csv");
    out << "index,n,m,s,q,a,b,c,class,constant,exponent,termination,termination_radius,checks_pass,checks_fail,"
           "m_inf,log_r_w0,log_r_death,observed,error\n";
    auto opt = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
    for (const auto& r : records) {
      int pass = 0, fail = 0;
      for (const auto& c : r.checks) {
        pass += c.status == "pass";
        fail += c.status == "fail";
      }
      std::string err = r.error;
      for (auto& ch : err)
        if (ch == ',' || ch == '\n') ch = ';';
      out << r.index << ',' << r.n << ',' << r.m << ',' << r.s << ',' << fmt(r.q) << ',' << fmt(r.a) << ','
          << fmt(r.b) << ',' << opt(r.c) << ',' << r.cls << ',' << fmt(r.constant) << ',' << fmt(r.exponent) << ','
          << r.termination << ',' << fmt(r.termination_radius) << ',' << pass << ',' << fail << ',' << opt(r.m_inf)
          << ',' << opt(r.log_r_w0) << ',' << opt(r.log_r_death) << ',' << opt(r.observed) << ',' << err << "\n";
    }
  }
  {
    auto out = open(".dat");
    out << "# sweep " << name << "\n";
    out << "# class ids: 0 Extinct, 1 Power, 2 LogCorrected, 3 Linear, 4 Quadratic, 5 Quartic, 6 Undetermined\n";
    out << "# index q a b c class_id constant exponent termination_radius\n";
    for (const auto& r : records) {
      const auto cls = growth_class_from_string(r.cls);
      out << r.index << ' ' << fmt(r.q) << ' ' << fmt(r.a) << ' ' << fmt(r.b) << ' ' << fmt(r.c.value_or(0.0)) << ' '
          << (cls ? static_cast<int>(*cls) : -1) << ' ' << fmt(r.constant) << ' ' << fmt(r.exponent) << ' '
          << fmt(r.termination_radius) << "\n";
    }
  }
  {
    auto out = open("-summary.txt");
    out << class_summary(records);
  }
}

std::string version_string() {
  std::ostringstream os;
  os << "polyrad " << POLYRAD_VERSION << " (boost " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000
     << "." << BOOST_VERSION % 100 << ", nlohmann_json " << NLOHMANN_JSON_VERSION_MAJOR << "."
     << NLOHMANN_JSON_VERSION_MINOR << "." << NLOHMANN_JSON_VERSION_PATCH << ", " << __VERSION__ << ")";
  return os.str();
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& run, std::string_view config_json) {
  std::filesystem::create_directories(dir);
  json overrides = json::object();
  if (run.rel_tol) overrides["rel_tol"] = *run.rel_tol;
  if (run.abs_tol) overrides["abs_tol"] = *run.abs_tol;
  if (run.r_max) overrides["r_max"] = *run.r_max;
  json config = config_json.empty() ? json(nullptr) : json::parse(config_json.begin(), config_json.end());
  json j{{"tool", "polyrad"},
         {"version", POLYRAD_VERSION},
         {"command", run.command},
         {"seed", run.seed},
         {"threads", run.threads},
         {"output_dir", run.output_dir.string()},
         {"kernel_cache", run.kernel_cache ? json(run.kernel_cache->string()) : json(nullptr)},
         {"overrides", overrides},
         {"config", config},
         {"versions", {{"library", version_string()}}}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

void write_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                 const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  for (const auto& h : header) out << "# " << h << "\n";
  out << "#";
  for (const auto& c : columns) out << ' ' << c;
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << fmt(row[i]);
    out << "\n";
  }
}

}  // namespace polyrad::io
