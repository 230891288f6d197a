#include "polyrad/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "polyrad/error.hpp"

namespace polyrad {

std::string_view to_string(GrowthClass c) noexcept {
  switch (c) {
    case GrowthClass::Extinct: return "Extinct";
    case GrowthClass::Power: return "Power";
    case GrowthClass::LogCorrected: return "LogCorrected";
    case GrowthClass::Linear: return "Linear";
    case GrowthClass::Quadratic: return "Quadratic";
    case GrowthClass::Quartic: return "Quartic";
    case GrowthClass::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

std::optional<GrowthClass> growth_class_from_string(std::string_view s) noexcept {
  constexpr std::array all{GrowthClass::Extinct,   GrowthClass::Power,     GrowthClass::LogCorrected,
                           GrowthClass::Linear,    GrowthClass::Quadratic, GrowthClass::Quartic,
                           GrowthClass::Undetermined};
  for (GrowthClass c : all)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> r(count);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    r[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1));
  r.front() = lo;
  r.back() = hi;
  return r;
}

double second_derivative_u(const State& y, double r, int n) { return y.w - (n - 1) * y.du / r; }

// Decay exponent k in |f| ~ r^{-k}; NaN when f changes sign or vanishes.
double decay_exponent(const std::vector<double>& r, const std::vector<double>& f) {
  std::vector<double> lx, ly;
  const double sign = f.back() >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(sign * f[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    lx.push_back(std::log(r[i]));
    ly.push_back(std::log(sign * f[i]));
  }
  return -least_squares(lx, ly).slope;
}

}  // namespace

GrowthReport classify(const Trajectory& traj, const ClassifierConfig& cfg) {
  GrowthReport rep;
  rep.termination = traj.termination.cause;
  if (traj.empty()) {
    rep.note = "empty trajectory";
    return rep;
  }
  if (traj.termination.cause == Termination::Extinct) {
    rep.cls = GrowthClass::Extinct;
    rep.constant = traj.termination.bracket_hi;
    rep.tail_lo = traj.termination.bracket_lo;
    rep.tail_hi = traj.termination.bracket_hi;
    return rep;
  }

  const ProblemSpec& sp = traj.spec;
  const int n = sp.n;
  const double r_hi = traj.r_end();
  const double r_lo = cfg.tail_fraction * r_hi;
  rep.tail_lo = r_lo;
  rep.tail_hi = r_hi;
  if (r_lo <= traj.r_start() || traj.size() < 2) {
    rep.note = "trajectory too short for a tail window";
    return rep;
  }
  if (traj.termination.cause != Termination::ReachedRmax)
    rep.note = std::string("tail ends at ") + std::string(to_string(traj.termination.cause));

  const std::vector<double> radii = log_grid(r_lo, r_hi, std::max<std::size_t>(cfg.tail_samples, 8));
  const std::vector<State> ys = resample(traj, radii);
  std::vector<double> lr, lu;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(ys[i].u > 0.0)) {
      rep.note = "non-positive u inside the tail window";
      return rep;
    }
    lr.push_back(std::log(radii[i]));
    lu.push_back(std::log(ys[i].u));
    rep.slope_samples.push_back(radii[i] * ys[i].du / ys[i].u);
  }
  const LineFit fit = least_squares(lr, lu);
  rep.exponent = fit.slope;
  rep.fit_residual = fit.rms;
  const auto [mn, mx] = std::minmax_element(rep.slope_samples.begin(), rep.slope_samples.end());
  rep.slope_drift = *mx - *mn;
  if (rep.slope_drift > cfg.band) {
    rep.note = "log-log slope has not settled across the tail window";
    return rep;
  }

  const State& end = traj.states.back();
  const double p = rep.exponent;
  const double upp = second_derivative_u(end, r_hi, n);
  const double rho_min = cfg.rho_min_scale * std::max(1.0, traj.origin.b);
  auto near = [&](double target) { return std::abs(p - target) <= cfg.band; };

  // Quartic growth: only the s = +1 tri-harmonic problem has it.
  if (sp.m == 3 && sp.s == Sign::Plus && near(4.0)) {
    const State mid = resample(traj, 0.5 * r_hi);
    if (std::abs(end.v - mid.v) > cfg.quartic_settle_tol * std::abs(end.v) || !(end.v > 0.0)) {
      rep.note = "slope near 4 but Δ²u has not settled";
      return rep;
    }
    rep.cls = GrowthClass::Quartic;
    rep.target_exponent = 4.0;
    rep.constant = end.v / (8.0 * n * (n + 2.0));
    return rep;
  }

  if (near(2.0) && upp >= rho_min) {
    std::vector<double> dw;
    for (const State& y : ys) dw.push_back(y.dw);
    const double k = decay_exponent(radii, dw);
    const double remaining = std::isnan(k) || k <= 1.0 ? std::numeric_limits<double>::infinity()
                                                       : std::abs(r_hi * end.dw / (k - 1.0));
    const bool settled = end.dw == 0.0 || (!std::isnan(k) && k >= cfg.plateau_decay &&
                                           remaining <= cfg.plateau_tol * std::abs(end.w));
    if (!settled) {
      rep.note = "slope near 2 but Δu is still drifting";
      return rep;
    }
    rep.cls = GrowthClass::Quadratic;
    rep.target_exponent = 2.0;
    rep.constant = 0.5 * upp;
    return rep;
  }

  const bool log_case = sp.m == 2 && n == 3 && sp.q == 3.0;
  if (log_case && near(1.0) && r_lo > std::exp(1.0)) {
    // Pick whichever of u/r and u/(r ln^{1/4} r) drifts less across the window.
    auto drift = [&](auto&& coef) {
      const double a0 = coef(radii.front(), ys.front().u), a1 = coef(radii.back(), ys.back().u);
      return std::abs(a1 - a0) / std::abs(a1);
    };
    auto lin = [](double r, double u) { return u / r; };
    auto logc = [](double r, double u) { return u / (r * std::pow(std::log(r), 0.25)); };
    if (drift(logc) < drift(lin)) {
      rep.cls = GrowthClass::LogCorrected;
      rep.target_exponent = 1.0;
      rep.constant = logc(r_hi, end.u);
      rep.reference_constant = std::pow(2.0, 0.25);
      return rep;
    }
  }

  const double tau = 4.0 / (sp.q + 1.0);
  const bool power_possible = sp.m == 2 && near(tau) && std::abs(p - tau) < std::abs(p - 1.0);
  if (power_possible) {
    rep.cls = GrowthClass::Power;
    rep.target_exponent = tau;
    rep.constant = end.u / std::pow(r_hi, tau);
    if (n == 3 && sp.q > 1.0 && sp.q < 3.0) rep.reference_constant = std::pow(k_q(sp.q), -1.0 / (sp.q + 1.0));
    return rep;
  }

  if (near(1.0)) {
    if (upp >= rho_min) {
      rep.note = "slope near 1 but u'' above rho_min";
      return rep;
    }
    const State half = resample(traj, 0.5 * r_hi);
    const double alpha = (end.u - half.u) / (0.5 * r_hi);
    if (!(alpha > 0.0)) {
      rep.note = "non-positive linear coefficient";
      return rep;
    }
    rep.cls = GrowthClass::Linear;
    rep.target_exponent = 1.0;
    rep.constant = alpha;
    return rep;
  }

  rep.note = "slope matches no growth target";
  return rep;
}

AlphaIntegral linear_alpha_from_integral(const Trajectory& traj) {
  const ProblemSpec& sp = traj.spec;
  if (sp.m != 3) throw Error(ErrorCode::WrongSpec, "the linear-growth integral needs a tri-harmonic trajectory");
  if (traj.size() < 2) throw Error(ErrorCode::NonDecayingIntegrand, "trajectory too short");
  const int n = sp.n;
  auto g = [n](double t, const State& y) { return t * t * (y.v - (n - 3) * y.dw / t); };

  const double r0 = traj.r_start();
  const double r_hi = traj.alive_until();
  const AlongResult body = integrate_along(traj, g, r0, r_hi);
  const double head = g(r0, traj.states.front()) * r0 / 3.0;

  AlphaIntegral out;
  out.partial = body.value + head;

  auto tail_from = [&](double lo, double hi, double& k) {
    const std::vector<double> rs = log_grid(lo, hi, 24);
    std::vector<double> gs;
    for (double r : rs) gs.push_back(g(r, resample(traj, r)));
    k = decay_exponent(rs, gs);
    if (std::isnan(k) || k <= 1.0) return std::numeric_limits<double>::infinity();
    return gs.back() * hi / (k - 1.0);
  };
  double k_full = 0.0, k_inner = 0.0, k_outer = 0.0;
  const double tail = tail_from(0.25 * r_hi, r_hi, k_full);
  out.decay = k_full;
  if (!std::isfinite(tail) || std::abs(tail) > 0.1 * std::abs(out.partial)) {
    throw Error(ErrorCode::NonDecayingIntegrand,
                "tail remainder of the linear-growth integral does not decay (k = " + std::to_string(k_full) + ")");
  }
  const double tail_in = tail_from(0.25 * r_hi, 0.5 * r_hi, k_inner);
  const double tail_out = tail_from(0.5 * r_hi, r_hi, k_outer);
  double spread = 0.0;
  if (std::isfinite(tail_in) && std::isfinite(tail_out) && k_inner > 1.0 && k_outer > 1.0) {
    const double g_hi = tail * (k_full - 1.0);
    spread = std::abs(g_hi / (k_inner - 1.0) - g_hi / (k_outer - 1.0));
  } else {
    spread = std::abs(tail);
  }
  out.tail = tail;
  out.value = -(out.partial + tail) / (n - 1.0);
  out.error = (body.error + spread) / (n - 1.0);
  return out;
}

QuarticLimit quartic_limit(const Trajectory& traj, double settle_tol) {
  const ProblemSpec& sp = traj.spec;
  if (sp.m != 3 || sp.s != Sign::Plus) throw Error(ErrorCode::WrongSpec, "quartic limit needs Δ³u = u^{-q}");
  if (traj.size() < 2 || traj.termination.cause == Termination::Extinct)
    throw Error(ErrorCode::NotSettled, "trajectory does not reach a tail");
  const double r_hi = traj.r_end();
  const State& end = traj.states.back();
  const State mid = resample(traj, 0.5 * r_hi);
  if (!(end.v > 0.0) || std::abs(end.v - mid.v) > settle_tol * std::abs(end.v))
    throw Error(ErrorCode::NotSettled, "Δ²u still drifting at r = " + std::to_string(r_hi));
  QuarticLimit q;
  const int n = sp.n;
  q.limit = end.v / (8.0 * n * (n + 2.0));
  q.u_over_r4 = end.u / std::pow(r_hi, 4);
  q.relative_gap = std::abs(q.u_over_r4 - q.limit) / q.limit;
  return q;
}

}  // namespace polyrad
