#include "polyrad/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace polyrad {

std::string_view to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "n/a";
  }
  return "?";
}

bool InvariantReport::all_pass() const noexcept {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

std::size_t InvariantReport::count(CheckStatus s) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [s](const CheckResult& c) { return c.status == s; }));
}

const CheckResult* InvariantReport::find(std::string_view name) const noexcept {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void InvariantReport::append(const InvariantReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

namespace {

/// Accumulates "value > 0" with the tolerance value ≥ -slack·scale.
class SignCheck {
 public:
  SignCheck(std::string name, double slack) : slack_(slack) {
    res_.name = std::move(name);
    res_.worst_margin = std::numeric_limits<double>::infinity();
  }

  void add(double r, double value, double scale) {
    scale = std::max(scale, std::numeric_limits<double>::min());
    const double margin = value / scale;
    ++res_.samples;
    if (margin < res_.worst_margin) {
      res_.worst_margin = margin;
      res_.worst_radius = r;
    }
  }

  CheckResult done(std::string note = {}) {
    res_.note = std::move(note);
    if (res_.samples == 0) {
      res_.status = CheckStatus::NotApplicable;
      res_.worst_margin = 0.0;
      if (res_.note.empty()) res_.note = "no samples in range";
    } else {
      res_.status = res_.worst_margin >= -slack_ ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return res_;
  }

 private:
  double slack_;
  CheckResult res_;
};

CheckResult not_applicable(std::string name, std::string note) {
  CheckResult c;
  c.name = std::move(name);
  c.status = CheckStatus::NotApplicable;
  c.note = std::move(note);
  return c;
}

double u2(const State& y, double r, int n) { return y.w - (n - 1) * y.du / r; }

double u3(const State& y, double r, int n) {
  return y.dw - (n - 1) * (u2(y, r, n) / r - y.du / (r * r));
}

double u3_scale(const State& y, double r, int n) {
  return std::abs(y.dw) + (n - 1) * (std::abs(y.w) / r + 2.0 * (n - 1) * std::abs(y.du) / (r * r));
}

/// Indices of the samples where u is still alive.
std::size_t alive_count(const Trajectory& traj) {
  const double lim = traj.alive_until();
  std::size_t k = traj.size();
  while (k > 0 && traj.radii[k - 1] > lim) --k;
  return k;
}

/// First stored radius with Δu ≤ 0, or +inf.
double first_w_zero(const Trajectory& traj) {
  const std::size_t k = alive_count(traj);
  for (std::size_t i = 0; i < k; ++i)
    if (traj.states[i].w <= 0.0) return traj.radii[i];
  return std::numeric_limits<double>::infinity();
}

bool planar_biharmonic(const ProblemSpec& s) { return s.m == 2 && s.n == 2; }

/// Entire-solution hypotheses of the sign lemmas: subquartic survivor.
bool sign_lemmas_apply(const Trajectory& traj, const GrowthReport& g) {
  if (planar_biharmonic(traj.spec)) return false;
  return g.subquartic();
}

std::string growth_note(const GrowthReport& g) {
  return "growth " + std::string(to_string(g.cls)) + " does not meet the subquartic hypothesis";
}

constexpr const char* kPlanarNote = "no positive entire solution exists in the plane";

template <class F>
void over_alive(const Trajectory& traj, double r_lo, double r_hi, F&& f) {
  const std::size_t k = alive_count(traj);
  for (std::size_t i = 0; i < k; ++i) {
    const double r = traj.radii[i];
    if (r < r_lo || r > r_hi) continue;
    f(r, traj.states[i]);
  }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

InvariantReport check_subpolyharmonic(const Trajectory& traj, const GrowthReport& growth,
                                      const InvariantConfig& cfg) {
  InvariantReport rep;
  const auto& spec = traj.spec;
  if (!sign_lemmas_apply(traj, growth)) {
    const std::string note = planar_biharmonic(spec) ? kPlanarNote : growth_note(growth);
    rep.checks.push_back(not_applicable("subpoly.laplacian_positive", note));
    if (spec.m == 3) rep.checks.push_back(not_applicable("subpoly.bilaplacian_negative", note));
    return rep;
  }
  SignCheck w_pos("subpoly.laplacian_positive", cfg.slack);
  SignCheck v_neg("subpoly.bilaplacian_negative", cfg.slack);
  over_alive(traj, 0.0, kInf, [&](double r, const State& y) {
    w_pos.add(r, y.w, std::abs(y.w) + r * std::abs(y.dw));
    if (spec.m == 3) v_neg.add(r, -y.v, std::abs(y.v) + r * std::abs(y.dv));
  });
  rep.checks.push_back(w_pos.done());
  if (spec.m == 3) rep.checks.push_back(v_neg.done());
  return rep;
}

InvariantReport check_monotonicity(const Trajectory& traj, const GrowthReport& growth, const InvariantConfig& cfg) {
  InvariantReport rep;
  const auto& spec = traj.spec;
  const int n = spec.n;
  const double r0 = traj.empty() ? 0.0 : traj.r_start();
  const bool lemmas = sign_lemmas_apply(traj, growth);

  if (spec.m == 3) {
    // Holds for every radial solution: (r^{n-1}v')' = r^{n-1}u^{-q} > 0.
    SignCheck vp("monotone.dbilaplacian_positive", cfg.slack);
    over_alive(traj, r0, kInf, [&](double r, const State& y) {
      vp.add(r, y.dv, std::abs(y.dv) + std::abs(y.v) / r);
    });
    rep.checks.push_back(vp.done());
  }

  // w' < 0: from the equation for m = 2, from the sub-polyharmonic property for m = 3.
  if (spec.m == 2 || lemmas) {
    SignCheck wp("monotone.dlaplacian_negative", cfg.slack);
    over_alive(traj, r0, kInf, [&](double r, const State& y) {
      wp.add(r, -y.dw, std::abs(y.dw) + std::abs(y.w) / r);
    });
    rep.checks.push_back(wp.done());
  } else {
    rep.checks.push_back(not_applicable("monotone.dlaplacian_negative", growth_note(growth)));
  }

  // u' > 0 needs Δu > 0 on [0, r]. In the plane that holds up to the first zero of Δu.
  if (lemmas || planar_biharmonic(spec)) {
    const double hi = lemmas ? kInf : first_w_zero(traj);
    SignCheck up("monotone.du_positive", cfg.slack);
    over_alive(traj, r0, hi, [&](double r, const State& y) { up.add(r, y.du, std::abs(y.du) + r * std::abs(y.w)); });
    rep.checks.push_back(up.done(lemmas ? "" : "restricted to the range where Delta u > 0"));
  } else {
    rep.checks.push_back(not_applicable("monotone.du_positive", growth_note(growth)));
  }

  // u'' > 0, u''' < 0: entire planar bi-harmonic (never realised) or subquartic 5D tri-harmonic.
  const bool convexity = lemmas && spec.m == 3 && n == 5;
  if (convexity) {
    SignCheck c2("monotone.d2u_positive", cfg.slack);
    SignCheck c3("monotone.d3u_negative", cfg.slack);
    over_alive(traj, r0, kInf, [&](double r, const State& y) {
      c2.add(r, u2(y, r, n), std::abs(y.w) + (n - 1) * std::abs(y.du) / r);
      c3.add(r, -u3(y, r, n), u3_scale(y, r, n));
    });
    rep.checks.push_back(c2.done());
    rep.checks.push_back(c3.done());
  } else {
    const std::string note = planar_biharmonic(spec) ? kPlanarNote
                             : !lemmas              ? growth_note(growth)
                                                    : "stated only for n = 5 tri-harmonic";
    rep.checks.push_back(not_applicable("monotone.d2u_positive", note));
    rep.checks.push_back(not_applicable("monotone.d3u_negative", note));
  }
  return rep;
}

InvariantReport check_bounds(const Trajectory& traj, const GrowthReport& growth, const InvariantConfig& cfg) {
  InvariantReport rep;
  const auto& spec = traj.spec;
  const int n = spec.n;
  const double a = traj.origin.a;
  const double b = traj.origin.b;
  const bool lemmas = sign_lemmas_apply(traj, growth);
  // For m = 2 the Laplacian decreases along every solution, which is all the
  // two mean-value bounds use.
  const bool w_decreasing = spec.m == 2 || lemmas;
  const bool from_origin = !traj.empty() && traj.r_start() <= kSeriesMaxRadius;
  const std::string no_origin = "trajectory does not start at the origin";

  if (!from_origin) {
    rep.checks.push_back(not_applicable("bounds.upper_quadratic", no_origin));
  } else if (w_decreasing && b >= 0.0) {
    SignCheck up("bounds.upper_quadratic", cfg.slack);
    over_alive(traj, 0.0, kInf, [&](double r, const State& y) {
      const double rhs = a + 0.25 * b * r * r;
      up.add(r, rhs - y.u, rhs + y.u);
    });
    rep.checks.push_back(up.done());
  } else {
    rep.checks.push_back(
        not_applicable("bounds.upper_quadratic", w_decreasing ? "needs Delta u(0) >= 0" : growth_note(growth)));
  }

  if (!from_origin) {
    rep.checks.push_back(not_applicable("bounds.lower_mean_value", no_origin));
  } else if (w_decreasing) {
    SignCheck lo("bounds.lower_mean_value", cfg.slack);
    over_alive(traj, 0.0, kInf, [&](double r, const State& y) {
      const double rhs = a + r * r * y.w / (2.0 * n);
      lo.add(r, y.u - rhs, std::abs(y.u) + a + std::abs(rhs - a));
    });
    rep.checks.push_back(lo.done());
  } else {
    rep.checks.push_back(not_applicable("bounds.lower_mean_value", growth_note(growth)));
  }

  if (spec.m == 3 && lemmas && !traj.empty()) {
    // inf over the tail of u·r^{-4/q} must stay positive.
    SignCheck pw("bounds.power_lower", cfg.slack);
    const double lo_r = 0.25 * traj.alive_until();
    double inf = kInf;
    over_alive(traj, lo_r, kInf, [&](double r, const State& y) {
      const double val = y.u * std::pow(r, -4.0 / spec.q);
      inf = std::min(inf, val);
      pw.add(r, val, val);
    });
    std::ostringstream os;
    os << "tail infimum " << inf;
    rep.checks.push_back(pw.done(os.str()));
  } else if (spec.m == 3) {
    rep.checks.push_back(not_applicable("bounds.power_lower", growth_note(growth)));
  }

  if (planar_biharmonic(spec)) {
    // The derivation only uses Δu(2r) ≥ 0, so it is valid on half the range where Δu > 0.
    const double hi = 0.5 * first_w_zero(traj);
    const double c = std::pow(std::log(2.0) / 8.0, 1.0 / (spec.q + 1.0));
    SignCheck lg("bounds.planar_lower", cfg.slack);
    over_alive(traj, 0.0, hi, [&](double r, const State& y) {
      const double rhs = c * std::pow(r, 4.0 / (spec.q + 1.0));
      lg.add(r, y.u - rhs, y.u + rhs);
    });
    rep.checks.push_back(lg.done("restricted to r <= r_w0/2 where Delta u(2r) > 0"));
    rep.checks.push_back(not_applicable("bounds.planar_iterated_log", "constant not explicit"));
  }
  return rep;
}

InvariantReport check_lemma7_estimates(const Trajectory& traj, const GrowthReport& growth,
                                       const InvariantConfig& cfg) {
  InvariantReport rep;
  const auto& spec = traj.spec;
  const int n = spec.n;
  const char* names[] = {"lemma7.bilaplacian_lower", "lemma7.bilaplacian_upper", "lemma7.laplacian_lower",
                         "lemma7.linear_lower"};
  if (spec.m != 3 || !sign_lemmas_apply(traj, growth)) {
    const std::string note = spec.m != 3 ? "tri-harmonic only" : growth_note(growth);
    for (const char* nm : names) rep.checks.push_back(not_applicable(nm, note));
    return rep;
  }

  const double b = traj.origin.b;
  SignCheck a5(names[0], cfg.slack);
  over_alive(traj, 0.0, kInf, [&](double r, const State& y) {
    const double rhs = -2.0 * n * b / (r * r);
    a5.add(r, y.v - rhs, std::abs(y.v) + std::abs(rhs));
  });
  rep.checks.push_back(a5.done());

  if (traj.alive_until() < 1.0 || traj.r_start() > 1.0) {
    for (int i = 1; i < 4; ++i) rep.checks.push_back(not_applicable(names[i], "trajectory does not reach r = 1"));
    return rep;
  }
  const State at1 = resample(traj, 1.0);

  if (n >= 3) {
    const double c = -at1.v;
    SignCheck a6(names[1], cfg.slack);
    over_alive(traj, 1.0, kInf, [&](double r, const State& y) {
      const double rhs = -c * std::pow(r, -(n - 2.0));
      a6.add(r, rhs - y.v, std::abs(y.v) + std::abs(rhs));
    });
    rep.checks.push_back(a6.done());
  } else {
    rep.checks.push_back(not_applicable(names[1], "needs n >= 3"));
  }

  if (n >= 5) {
    const double c = std::min(-at1.v / (2.0 * (n - 4)), at1.w);
    SignCheck a7(names[2], cfg.slack);
    over_alive(traj, 1.0, kInf, [&](double r, const State& y) {
      const double rhs = c * std::pow(r, -(n - 4.0));
      a7.add(r, y.w - rhs, std::abs(y.w) + std::abs(rhs));
    });
    rep.checks.push_back(a7.done());
    if (n == 5) {
      SignCheck a8(names[3], cfg.slack);
      over_alive(traj, 1.0, kInf, [&](double r, const State& y) {
        const double rhs = 0.1 * c * r;
        a8.add(r, y.u - rhs, y.u + std::abs(rhs));
      });
      rep.checks.push_back(a8.done());
    } else {
      rep.checks.push_back(not_applicable(names[3], "needs n = 5"));
    }
  } else {
    rep.checks.push_back(not_applicable(names[2], "needs n >= 5"));
    rep.checks.push_back(not_applicable(names[3], "needs n = 5"));
  }
  return rep;
}

InvariantReport check_radial_jensen(const Trajectory& traj, const Forcing& forcing) {
  InvariantReport rep;
  CheckResult c;
  c.name = "radial.jensen_identity";
  const std::size_t k = alive_count(traj);
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = traj.radii[i];
    const State f = rhs(traj.spec, r, traj.states[i], forcing);
    const State& s = traj.slopes[i];
    const double top = traj.spec.m == 3 ? f.dv : f.dw;
    const double stored = traj.spec.m == 3 ? s.dv : s.dw;
    const double gap = std::abs(top - stored) / std::max(std::abs(top), std::numeric_limits<double>::min());
    if (gap > worst) {
      worst = gap;
      c.worst_radius = r;
    }
    ++c.samples;
  }
  c.worst_margin = -worst;
  c.status = c.samples == 0 ? CheckStatus::NotApplicable
             : worst <= 1e-13 ? CheckStatus::Pass
                              : CheckStatus::Fail;
  rep.checks.push_back(c);
  return rep;
}

InvariantReport check_all(const Trajectory& traj, const GrowthReport& growth, const InvariantConfig& cfg) {
  InvariantReport rep = check_subpolyharmonic(traj, growth, cfg);
  rep.append(check_monotonicity(traj, growth, cfg));
  rep.append(check_bounds(traj, growth, cfg));
  rep.append(check_lemma7_estimates(traj, growth, cfg));
  return rep;
}

}  // namespace polyrad
