#include "polyrad/radial_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "polyrad/error.hpp"

namespace polyrad {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ExtinctState: return "ExtinctState";
    case ErrorCode::NonConstantLambda: return "NonConstantLambda";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::WrongSpec: return "WrongSpec";
    case ErrorCode::NonDecayingIntegrand: return "NonDecayingIntegrand";
    case ErrorCode::NotSettled: return "NotSettled";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::SingularDiagonal: return "SingularDiagonal";
    case ErrorCode::NonIntegrableTail: return "NonIntegrableTail";
    case ErrorCode::TailDominates: return "TailDominates";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::NoLinearWindow: return "NoLinearWindow";
    case ErrorCode::MassNotConverged: return "MassNotConverged";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ProblemSpec ProblemSpec::make(int n, int m, Sign s, double q) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 2, got " + std::to_string(n));
  if (m != 2 && m != 3) throw Error(ErrorCode::InvalidArgument, "order m must be 2 or 3, got " + std::to_string(m));
  if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorCode::InvalidArgument, "exponent q must be positive");
  return ProblemSpec{n, m, s, q};
}

OriginData OriginData::make(const ProblemSpec& spec, double a, double b, std::optional<double> c) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "u(0) must be positive");
  if (!std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "Δu(0) must be finite");
  if (spec.m == 3 && !c) throw Error(ErrorCode::InvalidArgument, "tri-harmonic origin data needs Δ²u(0)");
  if (spec.m == 2 && c) throw Error(ErrorCode::InvalidArgument, "bi-harmonic origin data takes no Δ²u(0)");
  if (c && !std::isfinite(*c)) throw Error(ErrorCode::InvalidArgument, "Δ²u(0) must be finite");
  return OriginData{a, b, c};
}

double radial_laplacian(double f, double df, double d2f, double r, int n) {
  (void)f;
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radial_laplacian needs r > 0; use the series at the origin");
  return d2f + (n - 1) * df / r;
}

State rhs(const ProblemSpec& spec, double r, const State& y, const Forcing& forcing) {
  if (!(y.u > 0.0)) throw Error(ErrorCode::ExtinctState, "u <= 0 at r = " + std::to_string(r));
  const double k = spec.n - 1;
  const double source = as_double(spec.s) * std::pow(y.u, -spec.q) + forcing(r);
  State d;
  d.u = y.du;
  d.du = y.w - k * y.du / r;
  d.w = y.dw;
  if (spec.m == 3) {
    d.dw = y.v - k * y.dw / r;
    d.v = y.dv;
    d.dv = source - k * y.dv / r;
  } else {
    d.dw = source - k * y.dw / r;
  }
  return d;
}

State rhs_prime(const ProblemSpec& spec, double r, const State& y, const State& dy,
                const Forcing& forcing) {
  const double k = spec.n - 1;
  const double r2 = r * r;
  const double source_prime =
      -spec.q * as_double(spec.s) * std::pow(y.u, -spec.q - 1.0) * y.du + forcing.prime(r);
  // dy = (u', u'', w', w'', v', v''); differentiate each component once more.
  State d2;
  d2.u = dy.du;
  d2.du = y.dw - k * (dy.du / r - y.du / r2);
  d2.w = dy.dw;
  if (spec.m == 3) {
    d2.dw = y.dv - k * (dy.dw / r - y.dw / r2);
    d2.v = dy.dv;
    d2.dv = source_prime - k * (dy.dv / r - y.dv / r2);
  } else {
    d2.dw = source_prime - k * (dy.dw / r - y.dw / r2);
  }
  return d2;
}

namespace {

// Δ r^{2j} = lap_factor(j, n) r^{2j-2}.
double lap_factor(int j, int n) { return 2.0 * j * (2.0 * j + n - 2.0); }

}  // namespace

std::vector<double> series_coefficients(const ProblemSpec& spec, const OriginData& origin,
                                        double forcing_at_zero) {
  const int n = spec.n;
  const int m = spec.m;
  const double a = origin.a;
  const double s = as_double(spec.s);

  std::vector<double> c(static_cast<std::size_t>(m + 2), 0.0);
  c[0] = a;
  c[1] = origin.b / lap_factor(1, n);
  if (m == 3) c[2] = origin.c.value_or(0.0) / (lap_factor(1, n) * lap_factor(2, n));

  // Δ^m c_m r^{2m} = Π_{i=1..m} lap_factor(i) c_m must equal the source at 0.
  double top = 1.0;
  for (int i = 1; i <= m; ++i) top *= lap_factor(i, n);
  const double a_pow = std::pow(a, -spec.q);
  c[static_cast<std::size_t>(m)] = (s * a_pow + forcing_at_zero) / top;

  // r² coefficient of s·u^{-q} is -s q a^{-q-1} c_1.
  double next = 1.0;
  for (int i = 2; i <= m + 1; ++i) next *= lap_factor(i, n);
  c[static_cast<std::size_t>(m + 1)] = -s * spec.q * a_pow / a * c[1] / next;
  return c;
}

State series_origin(const ProblemSpec& spec, const OriginData& origin, double r,
                    double forcing_at_zero) {
  if (!(r > 0.0) || r > kSeriesMaxRadius)
    throw Error(ErrorCode::InvalidArgument, "series start radius outside (0, r_series_max]");
  if (!(origin.a > 0.0)) throw Error(ErrorCode::InvalidArgument, "u(0) must be positive");

  std::vector<double> coeff = series_coefficients(spec, origin, forcing_at_zero);
  auto value_and_slope = [r](const std::vector<double>& cs) {
    double f = 0.0, df = 0.0;
    for (std::size_t j = cs.size(); j-- > 0;) {
      f += cs[j] * std::pow(r, 2.0 * static_cast<double>(j));
      if (j > 0) df += 2.0 * static_cast<double>(j) * cs[j] * std::pow(r, 2.0 * static_cast<double>(j) - 1.0);
    }
    return std::pair{f, df};
  };
  auto laplace = [&spec](const std::vector<double>& cs) {
    std::vector<double> out;
    for (std::size_t j = 1; j < cs.size(); ++j) out.push_back(cs[j] * lap_factor(static_cast<int>(j), spec.n));
    return out;
  };

  State y;
  std::tie(y.u, y.du) = value_and_slope(coeff);
  coeff = laplace(coeff);
  std::tie(y.w, y.dw) = value_and_slope(coeff);
  if (spec.m == 3) {
    coeff = laplace(coeff);
    std::tie(y.v, y.dv) = value_and_slope(coeff);
  }
  return y;
}

double start_radius(const ProblemSpec& spec, const OriginData& origin) {
  const std::vector<double> c = series_coefficients(spec, origin);
  double length = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    length = std::min(length, std::pow(origin.a / std::abs(c[j]), 0.5 / static_cast<double>(j)));
  }
  return 1e-3 * std::min(1.0, length);
}

double k_q(double q) {
  const double tau = 4.0 / (q + 1.0);
  return tau * (2.0 - tau) * (tau + 1.0) * (tau - 1.0);
}

ClosedForm ClosedForm::triharmonic_5d() {
  return ClosedForm{Kind::TriHarm5D_q11, std::pow(kTriharmonicLambda, -1.0 / 12.0), 0.0, 0.0};
}

ClosedForm ClosedForm::biharmonic_3d() {
  return ClosedForm{Kind::BiHarm3D_q7, 1.0, 1.0 / std::sqrt(15.0), 0.0};
}

ClosedForm ClosedForm::power_law(double q) {
  if (!(q > 1.0 && q < 3.0)) throw Error(ErrorCode::InvalidArgument, "power-law branch needs 1 < q < 3");
  const double tau = 4.0 / (q + 1.0);
  return ClosedForm{Kind::PowerLaw, std::pow(k_q(q), -1.0 / (q + 1.0)), 0.0, tau};
}

ProblemSpec ClosedForm::spec() const {
  switch (kind) {
    case Kind::TriHarm5D_q11: return ProblemSpec::triharmonic(5, 11.0);
    case Kind::BiHarm3D_q7: return ProblemSpec::biharmonic(3, 7.0);
    case Kind::PowerLaw: return ProblemSpec::biharmonic(3, 4.0 / exponent - 1.0);
  }
  return {};
}

OriginData ClosedForm::origin() const {
  switch (kind) {
    case Kind::TriHarm5D_q11: return OriginData{amplitude, 5.0 * amplitude, -35.0 * amplitude};
    case Kind::BiHarm3D_q7: {
      const double a0 = std::sqrt(shift);
      return OriginData{a0, 3.0 / a0, std::nullopt};
    }
    case Kind::PowerLaw: break;
  }
  throw Error(ErrorCode::InvalidArgument, "power-law closed form is singular at the origin");
}

namespace {

struct Jet {
  State y;
};

Jet closed_form_jet(const ClosedForm& cf, double r) {
  Jet j;
  const double r2 = r * r;
  switch (cf.kind) {
    case ClosedForm::Kind::TriHarm5D_q11: {
      const double c = cf.amplitude;
      const double t = 1.0 + r2;
      const double st = std::sqrt(t);
      j.y.u = c * st;
      j.y.du = c * r / st;
      j.y.w = c * (4.0 * r2 + 5.0) / (t * st);
      j.y.dw = -c * r * (4.0 * r2 + 7.0) / (t * t * st);
      j.y.v = -c * (8.0 * r2 * r2 + 28.0 * r2 + 35.0) / (t * t * t * st);
      j.y.dv = 3.0 * c * r * (8.0 * r2 * r2 + 36.0 * r2 + 63.0) / (t * t * t * t * st);
      break;
    }
    case ClosedForm::Kind::BiHarm3D_q7: {
      const double a = cf.shift;
      const double t = a + r2;
      const double st = std::sqrt(t);
      j.y.u = st;
      j.y.du = r / st;
      j.y.w = (3.0 * a + 2.0 * r2) / (t * st);
      j.y.dw = -r * (5.0 * a + 2.0 * r2) / (t * t * st);
      break;
    }
    case ClosedForm::Kind::PowerLaw: {
      if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "power-law closed form needs r > 0");
      const double A = cf.amplitude;
      const double tau = cf.exponent;
      const int n = 3;
      const double lap1 = tau * (tau + n - 2);  // Δ r^τ = lap1 r^{τ-2}
      j.y.u = A * std::pow(r, tau);
      j.y.du = A * tau * std::pow(r, tau - 1.0);
      j.y.w = A * lap1 * std::pow(r, tau - 2.0);
      j.y.dw = A * lap1 * (tau - 2.0) * std::pow(r, tau - 3.0);
      break;
    }
  }
  return j;
}

}  // namespace

State eval_closed_form(const ClosedForm& cf, double r) {
  if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "radius must be non-negative");
  return closed_form_jet(cf, r).y;
}

namespace {

// Σ coeff·t^power with t = shift + r², closed under the radial Laplacian:
// Δ t^p = (4p(p-1) + 2np)·t^{p-1} - 4·shift·p(p-1)·t^{p-2}.
struct ShiftedPowers {
  std::map<double, double> terms;

  ShiftedPowers laplacian(int n, double shift) const {
    ShiftedPowers out;
    for (const auto& [p, c] : terms) {
      out.terms[p - 1.0] += c * (4.0 * p * (p - 1.0) + 2.0 * n * p);
      out.terms[p - 2.0] -= c * 4.0 * shift * p * (p - 1.0);
    }
    return out;
  }

  double operator()(double t) const {
    double sum = 0.0;
    for (const auto& [p, c] : terms) sum += c * std::pow(t, p);
    return sum;
  }
};

}  // namespace

double closed_form_top_laplacian(const ClosedForm& cf, double r) {
  const ProblemSpec spec = cf.spec();
  if (cf.kind == ClosedForm::Kind::PowerLaw) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "power-law closed form needs r > 0");
    // Δ r^p = p(p+n-2) r^{p-2}
    double coeff = cf.amplitude, p = cf.exponent;
    for (int k = 0; k < spec.m; ++k, p -= 2.0) coeff *= p * (p + spec.n - 2.0);
    return coeff * std::pow(r, p);
  }
  const bool tri = cf.kind == ClosedForm::Kind::TriHarm5D_q11;
  const double shift = tri ? 1.0 : cf.shift;
  ShiftedPowers f;
  f.terms[0.5] = tri ? cf.amplitude : 1.0;
  for (int k = 0; k < spec.m; ++k) f = f.laplacian(spec.n, shift);
  return f(shift + r * r);
}

ClosedFormCheck verify_closed_form(const ClosedForm& cf, const ProblemSpec& spec,
                                   std::span<const double> radii) {
  const ProblemSpec own = cf.spec();
  if (own.n != spec.n || own.m != spec.m || own.s != spec.s || std::abs(own.q - spec.q) > 1e-12 * spec.q)
    throw Error(ErrorCode::InvalidArgument, "closed form does not solve the given problem");

  ClosedFormCheck out;
  const double s = as_double(spec.s);
  for (double r : radii) {
    const double u = eval_closed_form(cf, r).u;
    const double top = closed_form_top_laplacian(cf, r);
    out.max_residual = std::max(out.max_residual, std::abs(top * std::pow(u, spec.q) - s));
  }

  if (cf.kind == ClosedForm::Kind::TriHarm5D_q11) {
    // λ from the unit-amplitude profile (1+r²)^{1/2}.
    ClosedForm unit = cf;
    unit.amplitude = 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double r : radii) {
      const double lambda = closed_form_top_laplacian(unit, r) * std::pow(1.0 + r * r, 5.5);
      lo = std::min(lo, lambda);
      hi = std::max(hi, lambda);
    }
    if (!radii.empty()) {
      if (hi - lo > 1e-10 * std::abs(hi))
        throw Error(ErrorCode::NonConstantLambda,
                    "Δ³(1+r²)^{1/2}(1+r²)^{11/2} varies between " + std::to_string(lo) + " and " + std::to_string(hi));
      const double lambda = 0.5 * (lo + hi);
      out.lambda = lambda;
      out.amplitude = std::pow(lambda, -1.0 / 12.0);
    }
  }
  return out;
}

}  // namespace polyrad
