#include "polyrad/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "polyrad/error.hpp"

namespace polyrad {

namespace {

bool planar_biharmonic(const ProblemSpec& s) { return s.n == 2 && s.m == 2 && s.s == Sign::Minus; }

void need_grid(const std::vector<double>& v, const char* field) {
  if (v.empty()) throw Error(ErrorCode::ConfigError, std::string(field) + ": grid is empty");
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorCode::ConfigError, std::string(field) + ": non-finite grid value");
}

}  // namespace

void SweepPlan::validate() const {
  if (n < 2) throw Error(ErrorCode::ConfigError, "n: must be at least 2");
  if (m != 2 && m != 3) throw Error(ErrorCode::ConfigError, "m: must be 2 or 3");
  need_grid(q_values, "q");
  need_grid(a_values, "a");
  need_grid(b_values, "b");
  for (double q : q_values)
    if (!(q > 0.0)) throw Error(ErrorCode::ConfigError, "q: values must be positive");
  for (double a : a_values)
    if (!(a > 0.0)) throw Error(ErrorCode::ConfigError, "a: values must be positive");
  if (m == 3) need_grid(c_values, "c");
  if (m == 2 && !c_values.empty()) throw Error(ErrorCode::ConfigError, "c: only meaningful for m = 3");
  try {
    cfg.validate(0.0);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("integration: ") + e.what());
  }
}

std::vector<SweepCell> SweepPlan::cells() const {
  std::vector<SweepCell> out;
  const std::vector<double> cs = m == 3 ? c_values : std::vector<double>{0.0};
  for (double q : q_values)
    for (double a : a_values)
      for (double b : b_values)
        for (double c : cs) {
          SweepCell cell;
          cell.index = out.size();
          cell.spec = ProblemSpec::make(n, m, s, q);
          cell.origin = OriginData::make(cell.spec, a, b, m == 3 ? std::optional<double>(c) : std::nullopt);
          out.push_back(cell);
        }
  return out;
}

// ---------------------------------------------------------------------------
// Death forecast

double DeathForecast::r_w0() const { return std::exp(log_r_w0); }
double DeathForecast::r_death_pred() const { return std::exp(log_r_death); }

namespace {

/// First root beyond x0 = ln r_a of the frozen-mass planar profile
/// u = C1 + C2·ln r + r²/4·(A + m - m·ln r), in x = ln r.
double log_death_radius(double r_a, double u_a, double du_a, double w_a, double m) {
  const double x0 = std::log(r_a);
  const double A = w_a + m * x0;
  const double c2 = r_a * (du_a - 0.5 * r_a * (A + m - m * x0) + 0.25 * m * r_a);
  const double c1 = u_a - c2 * x0 - 0.25 * r_a * r_a * (A + m - m * x0);
  // h = 4u·e^{-2x} avoids overflow for astronomically distant roots.
  auto h = [&](double x) { return 4.0 * (c1 + c2 * x) * std::exp(-2.0 * x) + A + m - m * x; };
  double lo = x0;
  double dx = 1e-3;
  double hi = x0 + dx;
  std::size_t guard = 0;
  while (h(hi) > 0.0) {
    lo = hi;
    dx = std::min(1.5 * dx, std::max(1e-3, 0.05 * (hi - x0 + 1.0)));
    hi += dx;
    if (++guard > 1'000'000 || !std::isfinite(hi))
      throw Error(ErrorCode::MassNotConverged, "death predictor found no root of the log potential");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

DeathForecast death_forecast(const Trajectory& traj) {
  if (!planar_biharmonic(traj.spec))
    throw Error(ErrorCode::WrongSpec, "death_forecast applies to the planar bi-harmonic problem");
  if (traj.size() < 2) throw Error(ErrorCode::InvalidArgument, "death_forecast: trajectory too short");

  DeathForecast fc;
  std::size_t alive = traj.size();
  while (alive > 0 && traj.radii[alive - 1] > traj.alive_until()) --alive;
  if (alive < 2) throw Error(ErrorCode::InvalidArgument, "death_forecast: no alive samples");

  std::size_t anchor = alive - 1;
  if (traj.termination.cause == Termination::Extinct) {
    fc.observed = traj.termination.bracket_hi;
    fc.method = "retrospective from the peak of u";
    anchor = 0;
    for (std::size_t i = 1; i < alive; ++i)
      if (traj.states[i].u > traj.states[anchor].u) anchor = i;
  } else {
    fc.method = "frozen-mass log potential";
  }

  const double r_a = traj.radii[anchor];
  const State& y = traj.states[anchor];
  fc.r_anchor = r_a;
  fc.m_inf = -r_a * y.dw;
  if (!(fc.m_inf > 0.0) || !std::isfinite(fc.m_inf)) {
    std::ostringstream os;
    os << "mass " << fc.m_inf << " at r = " << r_a << " is not positive";
    throw Error(ErrorCode::MassNotConverged, os.str());
  }
  const double r_ref = std::max(0.1 * r_a, traj.r_start());
  const State y_ref = resample(traj, r_ref);
  const double m_ref = -r_ref * y_ref.dw;
  fc.m_drift = std::abs(fc.m_inf - m_ref) / fc.m_inf;
  fc.mass_converged = fc.m_drift < 0.01;

  fc.fit_a = y.w + fc.m_inf * std::log(r_a);
  fc.log_r_w0 = fc.fit_a / fc.m_inf;
  fc.log_r_death = log_death_radius(r_a, y.u, y.du, y.w, fc.m_inf);
  const double d = std::max(fc.m_drift, 1e-3);
  const double lo = log_death_radius(r_a, y.u, y.du, y.w, fc.m_inf * (1.0 + d));
  const double hi = log_death_radius(r_a, y.u, y.du, y.w, fc.m_inf * (1.0 - std::min(d, 0.5)));
  fc.log_r_death_error = std::max(std::abs(hi - fc.log_r_death), std::abs(fc.log_r_death - lo));
  return fc;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<CellResult> run_sweep(const SweepPlan& plan) {
  plan.validate();
  const std::vector<SweepCell> cells = plan.cells();
  std::vector<CellResult> results(cells.size());

  auto run_cell = [&](std::size_t i) {
    CellResult& res = results[i];
    res.cell = cells[i];
    try {
      const Trajectory traj = integrate(res.cell.spec, res.cell.origin, plan.cfg);
      res.termination = traj.termination;
      res.steps = traj.steps_accepted;
      res.growth = classify(traj, plan.classifier);
      if (plan.invariants) res.invariants = check_all(traj, res.growth);
      if (plan.forecast && planar_biharmonic(res.cell.spec)) {
        try {
          res.forecast = death_forecast(traj);
        } catch (const Error& e) {
          res.error = std::string("forecast: ") + e.what();
        }
      }
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  };

  unsigned threads = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
    });
  for (auto& th : pool) th.join();
  return results;
}

// ---------------------------------------------------------------------------
// Shooting

std::string_view to_string(Side s) noexcept { return s == Side::Below ? "below" : "above"; }

SideResult side_of(const ProblemSpec& spec, const OriginData& origin, const IntegrationConfig& cfg) {
  const int n = spec.n;
  SideResult res;
  res.min_d2u = std::numeric_limits<double>::infinity();
  IntegrateOptions opt;
  opt.record_samples = false;
  const bool tri = spec.m == 3;
  opt.stop = [&](double r, const State& y) {
    res.min_d2u = std::min(res.min_d2u, y.w - (n - 1) * y.du / r);
    if (tri) {
      if (y.w < 0.0) return 1;
      if (y.v > 0.0) return 2;
    } else if (y.du < 0.0) {
      return 1;
    }
    return 0;
  };
  const Trajectory t = integrate(spec, origin, cfg, opt);
  res.termination = t.termination;
  if (t.termination.cause == Termination::Stopped) {
    res.side = t.termination.stop_tag == 2 ? Side::Above : Side::Below;
  } else if (t.termination.cause == Termination::Extinct) {
    res.side = Side::Below;
  } else {
    const State& y = t.back();
    const double r = t.r_end();
    const double limit = tri ? y.v + r * y.dv / (n - 2) : y.w + r * y.dw;
    res.side = limit > 0.0 ? Side::Above : Side::Below;
  }
  return res;
}

namespace {

OriginData with_param(const ProblemSpec& spec, OriginData o, FreeParam p, double x) {
  if (p == FreeParam::B) {
    o.b = x;
  } else {
    if (spec.m != 3) throw Error(ErrorCode::InvalidArgument, "free parameter c needs m = 3");
    o.c = x;
  }
  return o;
}

struct Bracket {
  double below, above;
  std::size_t iterations = 0;
};

/// Bisects until the midpoint coincides with an endpoint.
template <class SideFn>
Bracket bisect(SideFn&& side, double below, double above) {
  Bracket br{below, above};
  for (; br.iterations < 200; ++br.iterations) {
    const double mid = 0.5 * (br.below + br.above);
    if (mid == br.below || mid == br.above) break;
    (side(mid) == Side::Below ? br.below : br.above) = mid;
  }
  return br;
}

std::string bracket_text(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

BisectionResult bisect_separatrix(const ProblemSpec& spec, const OriginData& origin, FreeParam free, double lo,
                                  double hi, const IntegrationConfig& cfg, const ClassifierConfig& ccfg) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "bisect_separatrix: need lo < hi");
  auto side = [&](double x) { return side_of(spec, with_param(spec, origin, free, x), cfg).side; };
  const Side s_lo = side(lo), s_hi = side(hi);
  if (s_lo == s_hi)
    throw Error(ErrorCode::BracketInvalid,
                "both ends of " + bracket_text(lo, hi) + " lie " + std::string(to_string(s_lo)) + " the separatrix");

  BisectionResult out;
  auto classify_at = [&](double x) {
    Trajectory t = integrate(spec, with_param(spec, origin, free, x), cfg);
    GrowthReport g = classify(t, ccfg);
    return std::make_pair(std::move(t), std::move(g));
  };
  out.lo_class = classify_at(lo).second.cls;
  out.hi_class = classify_at(hi).second.cls;

  const Bracket br = s_lo == Side::Below ? bisect(side, lo, hi) : bisect(side, hi, lo);
  out.below = br.below;
  out.above = br.above;
  out.iterations = br.iterations;

  auto [ta, ga] = classify_at(br.above);
  auto [tb, gb] = classify_at(br.below);
  out.above_class = ga.cls;
  out.below_class = gb.cls;
  auto linear = [](const GrowthReport& g) { return g.cls == GrowthClass::Linear && g.constant > 0.0; };
  if (linear(ga)) {
    out.param = br.above;
    out.traj = std::move(ta);
    out.growth = std::move(ga);
  } else if (linear(gb)) {
    out.param = br.below;
    out.traj = std::move(tb);
    out.growth = std::move(gb);
  } else {
    throw Error(ErrorCode::NoLinearWindow, "final bracket " + bracket_text(br.below, br.above) + " classifies " +
                                               std::string(to_string(gb.cls)) + "/" + std::string(to_string(ga.cls)));
  }
  return out;
}

LinearSolution find_linear_solution(const ProblemSpec& spec, double a, std::pair<double, double> b_bracket,
                                    std::pair<double, double> c_bracket, const IntegrationConfig& cfg,
                                    const ClassifierConfig& ccfg) {
  if (spec.m != 3 || spec.s != Sign::Plus)
    throw Error(ErrorCode::WrongSpec, "find_linear_solution is for the tri-harmonic problem");
  IntegrationConfig search = cfg;
  search.dense_output_stride = 0.0;

  auto inner = [&](double b) {
    auto side = [&](double c) { return side_of(spec, OriginData{a, b, c}, search).side; };
    double lo = c_bracket.first, hi = c_bracket.second;
    const Side s_lo = side(lo), s_hi = side(hi);
    if (s_lo == s_hi)
      throw Error(ErrorCode::BracketInvalid, "c bracket " + bracket_text(lo, hi) + " does not straddle c*(b)");
    return s_lo == Side::Below ? bisect(side, lo, hi) : bisect(side, hi, lo);
  };
  // Along c*(b) the overshoot-side trajectory bends down (min u'' < 0) exactly when b < b*.
  auto outer_side = [&](double b) {
    const Bracket c = inner(b);
    return side_of(spec, OriginData{a, b, c.above}, search).min_d2u < 0.0 ? Side::Below : Side::Above;
  };
  const Side s_lo = outer_side(b_bracket.first), s_hi = outer_side(b_bracket.second);
  if (s_lo == s_hi)
    throw Error(ErrorCode::BracketInvalid,
                "b bracket " + bracket_text(b_bracket.first, b_bracket.second) + " does not straddle b*");
  const Bracket bb = s_lo == Side::Below ? bisect(outer_side, b_bracket.first, b_bracket.second)
                                         : bisect(outer_side, b_bracket.second, b_bracket.first);

  LinearSolution out;
  out.outer_iterations = bb.iterations;
  out.b = bb.above;
  const Bracket cb = inner(out.b);
  for (double c : {cb.above, cb.below}) {
    Trajectory t = integrate(spec, OriginData{a, out.b, c}, cfg);
    GrowthReport g = classify(t, ccfg);
    if (g.cls == GrowthClass::Linear && g.constant > 0.0) {
      out.c = c;
      out.traj = std::move(t);
      out.growth = std::move(g);
      try {
        out.alpha_integral = linear_alpha_from_integral(out.traj);
      } catch (const Error&) {
        out.alpha_integral.reset();
      }
      return out;
    }
  }
  throw Error(ErrorCode::NoLinearWindow, "no Linear trajectory at b = " + bracket_text(bb.below, bb.above) +
                                             ", c = " + bracket_text(cb.below, cb.above));
}

// ---------------------------------------------------------------------------
// Comparison

ComparisonResult comparison_harness(const ProblemSpec& spec, const OriginData& origin, const Forcing& forcing,
                                    const IntegrationConfig& cfg) {
  if (spec.n != 2 || spec.m != 2 || spec.s != Sign::Minus)
    throw Error(ErrorCode::WrongSpec, "comparison_harness is for the planar bi-harmonic problem");
  ComparisonResult out;
  out.v = integrate(spec, origin, cfg);
  IntegrateOptions opt;
  opt.forcing = forcing;
  out.u = integrate(spec, origin, cfg, opt);

  for (double r : out.u.radii)
    if (forcing(r) < 0.0) throw Error(ErrorCode::InvalidArgument, "comparison_harness: forcing must be non-negative");

  out.common_until = std::min(out.u.alive_until(), out.v.alive_until());
  const double f0 = forcing(0.0);
  out.min_gap = std::numeric_limits<double>::infinity();
  out.strict = f0 > 0.0;
  double max_abs_gap = 0.0;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double r = out.v.radii[i];
    if (r > out.common_until) break;
    if (r < out.u.r_start() || r > out.u.r_end()) continue;
    const double uu = resample(out.u, r).u;
    const double vv = out.v.states[i].u;
    const double scale = std::max(std::abs(uu), std::abs(vv));
    const double gap = (uu - vv) / scale;
    max_abs_gap = std::max(max_abs_gap, std::abs(gap));
    if (gap < out.min_gap) {
      out.min_gap = gap;
      out.min_gap_radius = r;
    }
    if (f0 > 0.0 && f0 * r * r * r * r / 64.0 > 1e-8 * scale && !(gap > 0.0)) out.strict = false;
  }
  if (out.min_gap < -1e-8) {
    std::ostringstream os;
    os << "U - V = " << out.min_gap << " (relative) at r = " << out.min_gap_radius;
    throw Error(ErrorCode::HypothesisViolated, os.str());
  }
  out.verdict = max_abs_gap == 0.0 ? "identical" : out.strict ? "U > V strictly" : "U >= V";
  return out;
}

SuperSolutionResult quadratic_supersolution_check(const Trajectory& traj) {
  SuperSolutionResult res;
  res.min_margin = std::numeric_limits<double>::infinity();
  res.strict = true;
  const int n = traj.spec.n;
  const double a = traj.origin.a, b = traj.origin.b;
  const double lim = traj.alive_until();
  for (std::size_t i = 0; i < traj.size() && traj.radii[i] <= lim; ++i) {
    const double r = traj.radii[i];
    const double z = a + b * r * r / (2.0 * n);
    const double margin = (z - traj.states[i].u) / z;
    if (margin < res.min_margin) {
      res.min_margin = margin;
      res.worst_radius = r;
    }
    if (std::pow(a, -traj.spec.q) * r * r * r * r / 64.0 > 1e-8 * z && !(margin > 0.0)) res.strict = false;
  }
  return res;
}

}  // namespace polyrad
