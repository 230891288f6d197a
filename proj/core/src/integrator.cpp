#include "polyrad/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "polyrad/error.hpp"
#include "polyrad/quadrature.hpp"

namespace polyrad {

namespace {

using Vec = State::Array;
constexpr std::size_t kDim = 6;

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer–Wanner, DOPRI5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool finite_alive(const Vec& y) {
  if (!(y[0] > 0.0)) return false;
  return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

class System {
 public:
  System(const ProblemSpec& spec, const Forcing& forcing) : spec_(spec), forcing_(forcing) {}

  Vec f(double r, const Vec& y) const { return rhs(spec_, r, State::from_array(y), forcing_).to_array(); }

  struct Jet {
    State value, slope, curvature;
  };
  Jet jet(double r, const State& y) const {
    if (!(y.u > 0.0)) return {y, State{}, State{}};
    const State dy = rhs(spec_, r, y, forcing_);
    return {y, dy, rhs_prime(spec_, r, y, dy, forcing_)};
  }

 private:
  const ProblemSpec& spec_;
  const Forcing& forcing_;
};

struct Step {
  Vec y1{};
  Vec k7{};
  std::array<Vec, 5> cont{};
  double err = 0.0;
  bool stage_ok = true;
};

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [coef, k] : terms) {
    if (coef == 0.0) continue;
    for (std::size_t i = 0; i < kDim; ++i) out[i] += h * coef * (*k)[i];
  }
  return out;
}

template <class F, class Valid>
Step dp5_step(const F& f, const Valid& valid, double r, const Vec& y, const Vec& k1, double h,
              const IntegrationConfig& cfg) {
  Step st;
  auto stage = [&](double rr, const Vec& yy, Vec& k) {
    if (!valid(yy)) {
      st.stage_ok = false;
      return false;
    }
    k = f(rr, yy);
    return true;
  };
  Vec k2, k3, k4, k5, k6;
  if (!stage(r + c2 * h, axpy(y, h, {{a21, &k1}}), k2)) return st;
  if (!stage(r + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}), k3)) return st;
  if (!stage(r + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), k4)) return st;
  if (!stage(r + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), k5)) return st;
  if (!stage(r + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), k6)) return st;
  st.y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
  if (!stage(r + h, st.y1, st.k7)) return st;

  double sum = 0.0;
  for (std::size_t i = 0; i < kDim; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * st.k7[i]);
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(st.y1[i]));
    sum += (e / sc) * (e / sc);
  }
  st.err = std::sqrt(sum / kDim);

  for (std::size_t i = 0; i < kDim; ++i) {
    const double dy = st.y1[i] - y[i];
    const double bspl = h * k1[i] - dy;
    st.cont[0][i] = y[i];
    st.cont[1][i] = dy;
    st.cont[2][i] = bspl;
    st.cont[3][i] = dy - h * st.k7[i] - bspl;
    st.cont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * st.k7[i]);
  }
  return st;
}

Vec dense(const Step& st, double theta) {
  const double t1 = 1.0 - theta;
  Vec out;
  for (std::size_t i = 0; i < kDim; ++i) {
    out[i] = st.cont[0][i] +
             theta * (st.cont[1][i] + t1 * (st.cont[2][i] + theta * (st.cont[3][i] + t1 * st.cont[4][i])));
  }
  return out;
}

bool exceeds(const Vec& y, double limit) {
  return std::any_of(y.begin(), y.end(), [limit](double x) { return std::abs(x) > limit; });
}

void push_sample(Trajectory& t, const System& sys, double r, const State& y) {
  auto jet = sys.jet(r, y);
  t.radii.push_back(r);
  t.states.push_back(jet.value);
  t.slopes.push_back(jet.slope);
  t.curvatures.push_back(jet.curvature);
}

// Quintic Hermite interpolation of one scalar on [x0, x1].
double hermite5(double x0, double x1, double f0, double d0, double s0, double f1, double d1_, double s1,
                double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h21 = 0.5 * (t3 - 2 * t4 + t5);
  return h00 * f0 + h10 * h * d0 + h20 * h * h * s0 + h01 * f1 + h11 * h * d1_ + h21 * h * h * s1;
}

State interpolate(const Trajectory& t, std::size_t i, double r) {
  if (r == t.radii[i]) return t.states[i];
  if (r == t.radii[i + 1]) return t.states[i + 1];
  const Vec f0 = t.states[i].to_array(), f1 = t.states[i + 1].to_array();
  const Vec d0 = t.slopes[i].to_array(), d1v = t.slopes[i + 1].to_array();
  const Vec s0 = t.curvatures[i].to_array(), s1 = t.curvatures[i + 1].to_array();
  Vec out;
  for (std::size_t k = 0; k < kDim; ++k)
    out[k] = hermite5(t.radii[i], t.radii[i + 1], f0[k], d0[k], s0[k], f1[k], d1v[k], s1[k], r);
  return State::from_array(out);
}

std::size_t locate(const Trajectory& t, double r) {
  if (t.empty() || r < t.radii.front() || r > t.radii.back() || !std::isfinite(r))
    throw Error(ErrorCode::OutOfRange, "radius " + std::to_string(r) + " outside trajectory range");
  if (t.size() == 1) return 0;
  auto it = std::upper_bound(t.radii.begin(), t.radii.end(), r);
  std::size_t i = static_cast<std::size_t>(std::distance(t.radii.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, t.size() - 2);
}

// Touchdown continuation. With σ = -ln u as the independent variable and
// z = (r, u', Δu, (Δu)', Δ²u, (Δ²u)') the collapse u → 0 is resolved in
// equal steps of log u, which keeps the final approach to the extinction
// threshold representable after r itself has stopped moving in double precision.
void touchdown_phase(Trajectory& traj, const System& sys, const ProblemSpec& spec, const Forcing& forcing,
                     double r, const Vec& y, double threshold, const IntegrationConfig& cfg, bool record) {
  auto to_state = [](double sigma, const Vec& z) { return State{std::exp(-sigma), z[1], z[2], z[3], z[4], z[5]}; };
  auto f = [&](double sigma, const Vec& z) {
    const State st = to_state(sigma, z);
    const State d = rhs(spec, z[0], st, forcing);
    const double factor = -st.u / d.u;
    return Vec{factor, factor * d.du, factor * d.w, factor * d.dw, factor * d.v, factor * d.dv};
  };
  auto valid = [](const Vec& z) {
    return z[1] < 0.0 && std::all_of(z.begin(), z.end(), [](double x) { return std::isfinite(x); });
  };

  double sigma = -std::log(y[0]);
  const double sigma_end = -std::log(threshold);
  Vec z{r, y[1], y[2], y[3], y[4], y[5]};
  Vec k1 = f(sigma, z);
  double h = std::max((sigma_end - sigma) / 64.0, 1e-6);
  auto fail = [&]() {
    const State last = to_state(sigma, z);
    if (z[0] > traj.radii.back()) push_sample(traj, sys, z[0], last);
    traj.termination = {Termination::StepFailure, traj.radii.back(), traj.radii.back(), traj.radii.back(), 0};
  };

  for (std::size_t guard = 0; guard < cfg.max_steps; ++guard) {
    const bool last = sigma + h >= sigma_end;
    if (last) h = sigma_end - sigma;
    if (h <= 1e-14 * std::max(1.0, std::abs(sigma))) return fail();
    const Step st = dp5_step(f, valid, sigma, z, k1, h, cfg);
    if (!st.stage_ok || !(st.err <= 1.0)) {
      ++traj.steps_rejected;
      h *= st.stage_ok && std::isfinite(st.err) ? std::max(0.2, 0.9 * std::pow(st.err, -0.2)) : 0.25;
      continue;
    }
    ++traj.steps_accepted;
    sigma = last ? sigma_end : sigma + h;
    z = st.y1;
    k1 = st.k7;
    if (last) {
      State fin = to_state(sigma_end, z);
      fin.u = std::min(fin.u, threshold);
      if (!(z[0] > traj.radii.back())) {
        traj.radii.pop_back();
        traj.states.pop_back();
        traj.slopes.pop_back();
        traj.curvatures.pop_back();
      }
      const double r_lo = traj.radii.back();
      push_sample(traj, sys, z[0], fin);
      traj.termination = {Termination::Extinct, z[0], r_lo, z[0], 0};
      return;
    }
    if (record && z[0] > traj.radii.back()) push_sample(traj, sys, z[0], to_state(sigma, z));
    h *= st.err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(st.err, -0.2))) : 5.0;
  }
  fail();
}

}  // namespace

void IntegrationConfig::validate(double r_start) const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3)) bad("rel_tol must lie in [1e-12, 1e-3]");
  if (!(abs_tol > 0.0)) bad("abs_tol must be positive");
  if (!(extinction_threshold > 0.0 && extinction_threshold < 1e-2)) bad("extinction_threshold must lie in (0, 1e-2)");
  if (!(r_max > r_start)) bad("r_max must exceed the start radius");
  if (max_steps == 0) bad("max_steps must be positive");
  if (!(dense_output_stride >= 0.0)) bad("dense_output_stride must be non-negative");
  if (!(blowup_threshold > 0.0)) bad("blowup_threshold must be positive");
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ReachedRmax: return "ReachedRmax";
    case Termination::Extinct: return "Extinct";
    case Termination::BlowUp: return "BlowUp";
    case Termination::StepFailure: return "StepFailure";
    case Termination::Stopped: return "Stopped";
  }
  return "Unknown";
}

double Trajectory::alive_until() const {
  if (termination.cause == Termination::Extinct) return termination.bracket_lo;
  return radii.empty() ? 0.0 : radii.back();
}

Trajectory integrate(const ProblemSpec& spec, const OriginData& origin, const IntegrationConfig& cfg,
                     const IntegrateOptions& options) {
  const double r0 = start_radius(spec, origin);
  const State y0 = series_origin(spec, origin, r0, options.forcing(0.0));
  return integrate_from(spec, origin, r0, y0, cfg, options);
}

Trajectory integrate_from(const ProblemSpec& spec, const OriginData& origin, double r_start, const State& start,
                          const IntegrationConfig& cfg, const IntegrateOptions& options) {
  cfg.validate(r_start);
  if (!(start.u > 0.0)) throw Error(ErrorCode::InvalidArgument, "starting state must have u > 0");

  const System sys(spec, options.forcing);
  const double threshold = cfg.extinction_threshold * origin.a;
  Trajectory traj;
  traj.spec = spec;
  traj.origin = origin;

  double r = r_start;
  Vec y = start.to_array();
  if (spec.m == 2) y[4] = y[5] = 0.0;
  push_sample(traj, sys, r, State::from_array(y));
  Vec k1 = sys.f(r, y);

  // Initial step from the local derivative scale.
  double h = std::min({0.1 * r_start, 1e-2, cfg.r_max - r_start});
  {
    double dnorm = 0.0, ynorm = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      dnorm = std::max(dnorm, std::abs(k1[i]) / sc);
      ynorm = std::max(ynorm, std::abs(y[i]) / sc);
    }
    if (dnorm > 0.0) h = std::min(h, 0.01 * std::max(ynorm, 1.0) / dnorm);
    h = std::max(h, 1e-6 * r_start);
  }

  double next_sample = cfg.dense_output_stride > 0.0 ? r + cfg.dense_output_stride : cfg.r_max;
  auto finish = [&](Termination cause, double at) {
    traj.termination.cause = cause;
    traj.termination.radius = at;
    traj.termination.bracket_lo = at;
    traj.termination.bracket_hi = at;
  };

  for (;;) {
    if (traj.steps_accepted + traj.steps_rejected >= cfg.max_steps) {
      if (!options.record_samples && traj.radii.back() != r) push_sample(traj, sys, r, State::from_array(y));
      finish(Termination::StepFailure, r);
      return traj;
    }
    const bool last = r + h >= cfg.r_max;
    if (last) h = cfg.r_max - r;
    if (spec.s == Sign::Minus && y[1] < 0.0 && y[0] < 0.5 * origin.a && h < 1e-9 * std::max(1.0, r)) {
      if (!options.record_samples && traj.radii.back() != r) push_sample(traj, sys, r, State::from_array(y));
      touchdown_phase(traj, sys, spec, options.forcing, r, y, threshold, cfg, options.record_samples);
      return traj;
    }
    if (h <= 32.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r)) {
      if (!options.record_samples && traj.radii.back() != r) push_sample(traj, sys, r, State::from_array(y));
      finish(Termination::StepFailure, r);
      return traj;
    }

    const Step st = dp5_step([&sys](double rr, const Vec& yy) { return sys.f(rr, yy); }, finite_alive, r, y, k1, h, cfg);
    if (!st.stage_ok || !(st.err <= 1.0)) {
      ++traj.steps_rejected;
      const double shrink = st.stage_ok && std::isfinite(st.err) ? std::max(0.2, 0.9 * std::pow(st.err, -0.2)) : 0.25;
      h *= shrink;
      continue;
    }
    ++traj.steps_accepted;
    const double r1 = last ? cfg.r_max : r + h;

    // Extinction inside this step: bisect the continuous extension.
    if (st.y1[0] <= threshold) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 200 && (hi - lo) * h > 1e-14 * std::max(1.0, r); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dense(st, mid)[0] > threshold) lo = mid;
        else hi = mid;
      }
      const double r_lo = r + lo * h;
      const double r_hi = r + hi * h;
      if (options.record_samples && cfg.dense_output_stride > 0.0) {
        while (next_sample < r_lo) {
          push_sample(traj, sys, next_sample, State::from_array(dense(st, (next_sample - r) / h)));
          next_sample += cfg.dense_output_stride;
        }
      }
      if (r_lo > traj.radii.back()) push_sample(traj, sys, r_lo, State::from_array(dense(st, lo)));
      Vec dead = dense(st, hi);
      dead[0] = std::min(dead[0], threshold);
      push_sample(traj, sys, r_hi, State::from_array(dead));
      traj.termination = {Termination::Extinct, r_hi, r_lo, r_hi, 0};
      return traj;
    }

    if (options.record_samples) {
      if (cfg.dense_output_stride > 0.0) {
        while (next_sample < r1) {
          push_sample(traj, sys, next_sample, State::from_array(dense(st, (next_sample - r) / h)));
          next_sample += cfg.dense_output_stride;
        }
        if (next_sample == r1) next_sample += cfg.dense_output_stride;
      }
      push_sample(traj, sys, r1, State::from_array(st.y1));
    }

    r = r1;
    y = st.y1;
    k1 = st.k7;

    // Near a touchdown the derivatives diverge before u reaches the extinction
    // threshold, so the guard only applies while u is not collapsing.
    if (exceeds(y, cfg.blowup_threshold) && y[1] >= 0.0) {
      if (!options.record_samples) push_sample(traj, sys, r, State::from_array(y));
      finish(Termination::BlowUp, r);
      return traj;
    }
    if (options.stop) {
      if (int tag = options.stop(r, State::from_array(y)); tag != 0) {
        if (!options.record_samples) push_sample(traj, sys, r, State::from_array(y));
        finish(Termination::Stopped, r);
        traj.termination.stop_tag = tag;
        return traj;
      }
    }
    if (last) {
      if (!options.record_samples) push_sample(traj, sys, r, State::from_array(y));
      finish(Termination::ReachedRmax, r);
      return traj;
    }

    const double grow = st.err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(st.err, -0.2))) : 5.0;
    h *= grow;
  }
}

State resample(const Trajectory& traj, double r) { return interpolate(traj, locate(traj, r), r); }

std::vector<State> resample(const Trajectory& traj, std::span<const double> radii) {
  std::vector<State> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(resample(traj, r));
  return out;
}

AlongResult integrate_along(const Trajectory& traj, const std::function<double(double, const State&)>& g,
                            double lo, double hi, std::span<const double> breaks) {
  AlongResult res;
  if (!(hi > lo)) return res;
  locate(traj, lo);
  locate(traj, hi);

  std::vector<double> cuts;
  cuts.push_back(lo);
  auto first = std::upper_bound(traj.radii.begin(), traj.radii.end(), lo);
  for (auto it = first; it != traj.radii.end() && *it < hi; ++it) cuts.push_back(*it);
  for (double b : breaks)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::size_t seg = locate(traj, lo);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double x0 = cuts[k], x1 = cuts[k + 1];
    while (seg + 2 < traj.size() && traj.radii[seg + 1] <= x0) ++seg;
    auto f = [&](double x) { return g(x, interpolate(traj, seg, x)); };
    const double fine = quad::gauss_legendre8(f, x0, x1);
    const double coarse = boost::math::quadrature::gauss<double, 4>::integrate(f, x0, x1);
    res.value += fine;
    res.error += std::abs(fine - coarse);
  }
  return res;
}

std::vector<double> cumulative_along(const Trajectory& traj, const std::function<double(double, const State&)>& g) {
  std::vector<double> out(traj.size(), 0.0);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    auto f = [&](double x) { return g(x, interpolate(traj, i, x)); };
    out[i + 1] = out[i] + quad::gauss_legendre8(f, traj.radii[i], traj.radii[i + 1]);
  }
  return out;
}

std::vector<double> cumulative_trapezoid(const Trajectory& traj,
                                         const std::function<double(double, const State&)>& g) {
  std::vector<double> out(traj.size(), 0.0);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double h = traj.radii[i + 1] - traj.radii[i];
    out[i + 1] = out[i] + 0.5 * h * (g(traj.radii[i], traj.states[i]) + g(traj.radii[i + 1], traj.states[i + 1]));
  }
  return out;
}

namespace {

double first_integral_impl(const Trajectory& traj, double w_offset, double r_limit) {
  const ProblemSpec& sp = traj.spec;
  if (sp.n != 2 || sp.m != 2 || sp.q != 1.0 || sp.s != Sign::Minus)
    throw Error(ErrorCode::WrongSpec, "first integral holds only for n=2, m=2, q=1, s=-1");
  if (traj.empty()) return 0.0;

  const double r_end = std::min(r_limit, traj.alive_until());
  auto g = [w_offset](double t, const State& y) { return t * (y.w + w_offset) * (y.w + w_offset); };
  const std::vector<double> cum = cumulative_along(traj, g);

  // ∫₀^{r₀} tW² dt from the series W ≈ w₀ + w₂r².
  const double r0 = traj.radii.front();
  const double w0 = traj.origin.b + w_offset;
  const double w2 = traj.states.front().dw / (2.0 * r0);
  const double r2 = r0 * r0;
  const double head = r2 * (0.5 * w0 * w0 + 0.5 * w0 * w2 * r2 + w2 * w2 * r2 * r2 / 6.0);

  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double r = traj.radii[i];
    if (r > r_end) break;
    const State& y = traj.states[i];
    const double w = y.w + w_offset;
    const double q = y.u * r * y.dw - y.du * r * w + head + cum[i] + 0.5 * r * r;
    worst = std::max(worst, std::abs(q) / (r * r));
  }
  return worst;
}

}  // namespace

double first_integral_residual(const Trajectory& traj, double r_limit) {
  return first_integral_impl(traj, 0.0, r_limit);
}

double first_integral_residual_perturbed(const Trajectory& traj, double w_offset, double r_limit) {
  return first_integral_impl(traj, w_offset, r_limit);
}

}  // namespace polyrad
