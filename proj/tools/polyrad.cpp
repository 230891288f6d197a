// polyrad: command-line front end for the radial shooting library.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "polyrad/classifier.hpp"
#include "polyrad/error.hpp"
#include "polyrad/experiments.hpp"
#include "polyrad/integrator.hpp"
#include "polyrad/invariants.hpp"
#include "polyrad/io.hpp"
#include "polyrad/kernels.hpp"
#include "verify.hpp"

namespace {

using namespace polyrad;
using json = nlohmann::ordered_json;

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

struct ProblemFlags {
  int n = 2;
  int m = 2;
  int s = -1;
  double q = 2.0;
  double a = 1.0;
  double b = 0.0;
  std::optional<double> c;

  void add(CLI::App* app) {
    app->add_option("--n", n, "dimension")->check(CLI::Range(2, 64));
    app->add_option("--m", m, "polyharmonic order (2 or 3)")->check(CLI::IsMember({2, 3}));
    app->add_option("--s", s, "sign of the right-hand side")->check(CLI::IsMember({-1, 1}));
    app->add_option("--q", q, "exponent q > 0")->check(CLI::PositiveNumber);
    app->add_option("--a", a, "u(0) > 0")->check(CLI::PositiveNumber);
    app->add_option("--b", b, "Laplacian at the origin");
    app->add_option("--c", c, "bi-Laplacian at the origin (m = 3)");
  }

  ProblemSpec spec() const { return ProblemSpec::make(n, m, s > 0 ? Sign::Plus : Sign::Minus, q); }
  OriginData origin(const ProblemSpec& sp) const {
    return OriginData::make(sp, a, b, sp.m == 3 ? std::optional<double>(c.value_or(0.0)) : std::nullopt);
  }
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << j.dump(2) << "\n";
}

json growth_json(const GrowthReport& g) {
  return json{{"class", to_string(g.cls)},     {"constant", g.constant}, {"exponent", g.exponent},
              {"target", g.target_exponent},  {"tail", {g.tail_lo, g.tail_hi}}, {"drift", g.slope_drift},
              {"note", g.note}};
}

json checks_json(const InvariantReport& rep) {
  json arr = json::array();
  for (const auto& c : rep.checks)
    arr.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"worst_margin", c.worst_margin},
                   {"radius", c.worst_radius}, {"note", c.note}});
  return arr;
}

std::optional<std::filesystem::path> kernel_cache(const io::RunConfig& run) {
  if (run.kernel_cache) return run.kernel_cache;
  if (const char* env = std::getenv("POLYRAD_KERNEL_CACHE"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

int cmd_verify(const io::RunConfig& run, const std::string& suite) {
  const auto cache = kernel_cache(run);
  const auto findings = tools::run_suite(suite, cache);
  int failed = 0;
  json arr = json::array();
  for (const auto& f : findings) {
    std::printf("%-5s %-15s %-28s %s\n", f.passed ? "PASS" : "FAIL", f.suite.c_str(), f.name.c_str(), f.detail.c_str());
    failed += !f.passed;
    arr.push_back({{"suite", f.suite}, {"name", f.name}, {"passed", f.passed}, {"detail", f.detail}});
  }
  write_json(run.output_dir / ("verify-" + suite + ".json"), json{{"suite", suite}, {"failed", failed}, {"findings", arr}});
  io::write_manifest(run.output_dir, run, json{{"suite", suite}}.dump());
  if (failed) std::printf("%d check(s) failed\n", failed);
  return failed ? kCheckFailure : kPass;
}

int cmd_integrate(const io::RunConfig& run, const ProblemFlags& pf) {
  const ProblemSpec spec = pf.spec();
  const OriginData origin = pf.origin(spec);
  IntegrationConfig cfg;
  run.apply(cfg);
  const Trajectory t = integrate(spec, origin, cfg);
  const GrowthReport g = classify(t);
  const InvariantReport inv = check_all(t, g);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const State& y = t.states[i];
    rows.push_back({t.radii[i], y.u, y.du, y.w, y.dw, y.v, y.dv});
  }
  const std::string stem = "trajectory";
  io::write_table(run.output_dir / (stem + ".dat"),
                  {"n=" + std::to_string(spec.n) + " m=" + std::to_string(spec.m) + " q=" + fmt(spec.q) +
                   " a=" + fmt(origin.a) + " b=" + fmt(origin.b) + (origin.c ? " c=" + fmt(*origin.c) : "")},
                  {"r", "u", "du", "w", "dw", "v", "dv"}, rows);
  json rep{{"termination", {{"cause", to_string(t.termination.cause)}, {"radius", t.termination.radius}}},
           {"steps", {{"accepted", t.steps_accepted}, {"rejected", t.steps_rejected}}},
           {"growth", growth_json(g)},
           {"invariants", checks_json(inv)}};
  if (spec.n == 2 && spec.m == 2 && spec.s == Sign::Minus) {
    try {
      const auto f = death_forecast(t);
      rep["forecast"] = {{"m_inf", f.m_inf}, {"log_r_w0", f.log_r_w0}, {"log_r_death", f.log_r_death}};
    } catch (const Error& e) {
      rep["forecast"] = {{"error", e.what()}};
    }
  }
  write_json(run.output_dir / (stem + ".json"), rep);
  io::write_manifest(run.output_dir, run, json{{"n", spec.n}, {"m", spec.m}, {"s", static_cast<int>(spec.s)},
                                               {"q", spec.q}, {"a", origin.a}, {"b", origin.b},
                                               {"c", origin.c ? json(*origin.c) : json(nullptr)}}.dump());
  std::printf("%s at r=%s, class %s (constant %s, exponent %s), invariants %zu pass / %zu fail\n",
              std::string(to_string(t.termination.cause)).c_str(), fmt(t.termination.radius).c_str(),
              std::string(to_string(g.cls)).c_str(), fmt(g.constant).c_str(), fmt(g.exponent).c_str(),
              inv.count(CheckStatus::Pass), inv.count(CheckStatus::Fail));
  return inv.all_pass() ? kPass : kCheckFailure;
}

int cmd_sweep(io::RunConfig run, const std::string& config_file) {
  SweepPlan plan = io::parse_sweep_plan(io::read_file(config_file), config_file);
  run.apply(plan.cfg);
  if (run.threads) plan.threads = run.threads;
  plan.validate();
  const auto results = run_sweep(plan);
  std::vector<io::SweepRecord> records;
  for (const auto& r : results) records.push_back(io::SweepRecord::from(r));
  io::write_sweep_outputs(run.output_dir, plan.name, records);
  io::write_manifest(run.output_dir, run, io::to_json(plan));
  std::printf("%s", io::class_summary(records).c_str());
  int failures = 0;
  for (const auto& r : records) failures += !r.error.empty();
  return failures ? kCheckFailure : kPass;
}

int cmd_bisect(io::RunConfig run, const std::string& config_file) {
  io::BisectConfig bc = io::parse_bisect_config(io::read_file(config_file), config_file);
  run.apply(bc.cfg);
  io::write_manifest(run.output_dir, run, io::to_json(bc));
  json rep{{"name", bc.name}};
  int rc = kPass;
  try {
    const auto res = bisect_separatrix(bc.spec, bc.origin, bc.free, bc.lo, bc.hi, bc.cfg, bc.classifier);
    rep["param"] = res.param;
    rep["bracket"] = {res.below, res.above};
    rep["iterations"] = res.iterations;
    rep["endpoint_classes"] = {to_string(res.lo_class), to_string(res.hi_class)};
    rep["growth"] = growth_json(res.growth);
    std::printf("separatrix at %.17g (%zu steps), endpoints %s/%s, class %s alpha=%s\n", res.param, res.iterations,
                std::string(to_string(res.lo_class)).c_str(), std::string(to_string(res.hi_class)).c_str(),
                std::string(to_string(res.growth.cls)).c_str(), fmt(res.growth.constant).c_str());
    if (bc.spec.n == 3 && bc.spec.m == 2 && bc.spec.q == 7.0 && bc.free == FreeParam::B) {
      const double ref = 3.0 / bc.origin.a;
      rep["closed_form_b"] = ref;
      rep["relative_gap"] = std::abs(res.param - ref) / ref;
      std::printf("closed form predicts b = 3/a = %.17g, relative gap %.3g\n", ref, std::abs(res.param - ref) / ref);
    }
  } catch (const Error& e) {
    rep["error"] = e.what();
    std::printf("%s\n", e.what());
    rc = kCheckFailure;
  }
  write_json(run.output_dir / (bc.name + ".json"), rep);
  return rc;
}

int cmd_represent(io::RunConfig run, const std::string& config_file) {
  io::RepresentConfig rc_cfg = io::parse_represent_config(io::read_file(config_file), config_file);
  run.apply(rc_cfg.cfg);
  io::write_manifest(run.output_dir, run, io::to_json(rc_cfg));
  std::vector<std::vector<double>> rows;
  json arr = json::array();
  int rc = kPass;
  std::printf("%-6s %-12s %-12s %-12s %-12s %-12s %-10s %-10s\n", "q", "alpha", "zeta", "gamma", "gamma_err", "residual",
              "poh_lhs", "poh_rhs");
  for (double q : rc_cfg.q_values) {
    json row{{"q", q}};
    try {
      const auto spec = ProblemSpec::triharmonic(rc_cfg.n, q);
      const auto sol = find_linear_solution(spec, rc_cfg.a, rc_cfg.b_bracket, rc_cfg.c_bracket, rc_cfg.cfg,
                                            rc_cfg.classifier);
      const auto rep = extract_gamma(sol.traj, sol.growth);
      const auto poh = pohozaev_check(sol.traj, sol.growth, rep);
      row.update(json{{"b", sol.b}, {"c", sol.c}, {"alpha", rep.alpha}, {"zeta", rep.zeta}, {"gamma", rep.gamma},
                      {"gamma_error", rep.gamma_error}, {"residual", rep.residual},
                      {"tail_truncation", rep.tail_truncation}, {"pohozaev_lhs", poh.lhs},
                      {"pohozaev_rhs", poh.rhs}, {"pohozaev_residual", poh.residual}});
      rows.push_back({q, sol.b, sol.c, rep.alpha, rep.zeta, rep.gamma, rep.gamma_error, rep.residual, poh.lhs, poh.rhs,
                      poh.residual});
      std::printf("%-6g %-12s %-12s %-12s %-12s %-12s %-10s %-10s\n", q, fmt(rep.alpha).c_str(), fmt(rep.zeta).c_str(),
                  fmt(rep.gamma).c_str(), fmt(rep.gamma_error).c_str(), fmt(rep.residual).c_str(),
                  fmt(poh.lhs).c_str(), fmt(poh.rhs).c_str());
    } catch (const Error& e) {
      row["error"] = e.what();
      std::printf("%-6g %s\n", q, e.what());
      rc = kCheckFailure;
    }
    arr.push_back(row);
  }
  io::write_table(run.output_dir / (rc_cfg.name + ".dat"), {"representation intercept versus q"},
                  {"q", "b", "c", "alpha", "zeta", "gamma", "gamma_err", "residual", "poh_lhs", "poh_rhs", "poh_res"},
                  rows);
  write_json(run.output_dir / (rc_cfg.name + ".json"), json{{"rows", arr}});
  return rc;
}

int cmd_forecast(const io::RunConfig& run, const ProblemFlags& pf) {
  const ProblemSpec spec = ProblemSpec::biharmonic(2, pf.q);
  const OriginData origin = OriginData::make(spec, pf.a, pf.b);
  IntegrationConfig cfg;
  cfg.r_max = 1e4;
  cfg.dense_output_stride = 10.0;
  run.apply(cfg);
  const Trajectory t = integrate(spec, origin, cfg);
  const auto f = death_forecast(t);
  json rep{{"q", pf.q},
           {"a", pf.a},
           {"b", pf.b},
           {"termination", to_string(t.termination.cause)},
           {"observed", f.observed ? json(*f.observed) : json(nullptr)},
           {"m_inf", f.m_inf},
           {"mass_converged", f.mass_converged},
           {"log_r_w0", f.log_r_w0},
           {"log_r_death", f.log_r_death},
           {"log_r_death_error", f.log_r_death_error},
           {"method", f.method}};
  write_json(run.output_dir / "forecast.json", rep);
  io::write_manifest(run.output_dir, run, json{{"q", pf.q}, {"a", pf.a}, {"b", pf.b}}.dump());
  std::printf("m=%s (%s) ln r_w0=%s ln r_death=%s +- %s%s\n", fmt(f.m_inf).c_str(),
              f.mass_converged ? "plateaued" : "not plateaued", fmt(f.log_r_w0).c_str(), fmt(f.log_r_death).c_str(),
              fmt(f.log_r_death_error).c_str(), f.observed ? (", observed r* = " + fmt(*f.observed)).c_str() : "");
  return std::isfinite(f.log_r_death) && f.m_inf > 0.0 ? kPass : kCheckFailure;
}

int cmd_compare(const io::RunConfig& run, const ProblemFlags& pf, double amplitude) {
  const ProblemSpec spec = ProblemSpec::biharmonic(2, pf.q);
  const OriginData origin = OriginData::make(spec, pf.a, pf.b);
  IntegrationConfig cfg;
  cfg.r_max = 20.0;
  run.apply(cfg);
  Forcing f;
  if (amplitude != 0.0) {
    f.value = [amplitude](double r) { return amplitude * std::exp(-r * r); };
    f.derivative = [amplitude](double r) { return -2.0 * r * amplitude * std::exp(-r * r); };
  }
  const auto res = comparison_harness(spec, origin, f, cfg);
  write_json(run.output_dir / "compare.json",
             json{{"amplitude", amplitude}, {"min_gap", res.min_gap}, {"radius", res.min_gap_radius},
                  {"common_until", res.common_until}, {"strict", res.strict}, {"verdict", res.verdict}});
  io::write_manifest(run.output_dir, run, json{{"q", pf.q}, {"a", pf.a}, {"b", pf.b}, {"amplitude", amplitude}}.dump());
  std::printf("%s (min relative gap %s at r=%s, common range to %s)\n", res.verdict.c_str(), fmt(res.min_gap).c_str(),
              fmt(res.min_gap_radius).c_str(), fmt(res.common_until).c_str());
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyrad: radial shooting and quadrature for Δ^m u = s·u^{-q}"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", io::version_string());

  io::RunConfig run;
  std::string out_dir = "polyrad-out", cache;
  std::optional<double> rel_tol, abs_tol, r_max;
  unsigned threads = 0;
  std::uint64_t seed = run.seed;
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--kernel-cache", cache, "kernel table cache directory (default $POLYRAD_KERNEL_CACHE)");
  app.add_option("--rel-tol", rel_tol, "relative tolerance override");
  app.add_option("--abs-tol", abs_tol, "absolute tolerance override");
  app.add_option("--r-max", r_max, "integration radius override");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "seed recorded in the manifest");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite)->check(CLI::IsMember(polyrad::tools::suite_names()));

  ProblemFlags pf;
  auto* integ = app.add_subcommand("integrate", "integrate and classify one trajectory");
  pf.add(integ);

  std::string config;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("config", config, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  auto* bisect = app.add_subcommand("bisect", "bisect a separatrix");
  bisect->add_option("config", config, "bisection config (JSON)")->required()->check(CLI::ExistingFile);
  auto* represent = app.add_subcommand("represent", "representation intercept and Pohozaev identity");
  represent->add_option("config", config, "representation config (JSON)")->required()->check(CLI::ExistingFile);

  ProblemFlags ff;
  auto* forecast = app.add_subcommand("forecast", "planar death forecast");
  forecast->add_option("--q", ff.q)->check(CLI::PositiveNumber);
  forecast->add_option("--a", ff.a)->check(CLI::PositiveNumber);
  forecast->add_option("--b", ff.b);

  ProblemFlags cf;
  double amplitude = 0.1;
  auto* compare = app.add_subcommand("compare", "planar comparison with forcing amplitude·exp(-r²)");
  compare->add_option("--q", cf.q)->check(CLI::PositiveNumber);
  compare->add_option("--a", cf.a)->check(CLI::PositiveNumber);
  compare->add_option("--b", cf.b);
  compare->add_option("--amplitude", amplitude)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  run.output_dir = out_dir;
  if (!cache.empty()) run.kernel_cache = cache;
  run.rel_tol = rel_tol;
  run.abs_tol = abs_tol;
  run.r_max = r_max;
  run.threads = threads;
  run.seed = seed;

  try {
    if (*verify) return run.command = "verify " + suite, cmd_verify(run, suite);
    if (*integ) return run.command = "integrate", cmd_integrate(run, pf);
    if (*sweep) return run.command = "sweep " + config, cmd_sweep(run, config);
    if (*bisect) return run.command = "bisect " + config, cmd_bisect(run, config);
    if (*represent) return run.command = "represent " + config, cmd_represent(run, config);
    if (*forecast) return run.command = "forecast", cmd_forecast(run, ff);
    if (*compare) return run.command = "compare", cmd_compare(run, cf, amplitude);
  } catch (const Error& e) {
    std::fprintf(stderr, "polyrad: %s\n", e.what());
    const bool usage = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidArgument;
    return usage ? kUsage : kCheckFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polyrad: %s\n", e.what());
    return kCheckFailure;
  }
  return kUsage;
}
