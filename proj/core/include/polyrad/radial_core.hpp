#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace polyrad {

/// Sign of the right-hand side in Δ^m u = s·u^{-q}.
enum class Sign : int { Minus = -1, Plus = +1 };

inline double as_double(Sign s) noexcept { return static_cast<double>(static_cast<int>(s)); }

/// One instance of the radial problem Δ^m u = s·u^{-q} in ℝⁿ.
///
/// (m=3, s=+1) is the tri-harmonic equation Δ³u = u^{-q};
/// (m=2, s=-1) is the bi-harmonic equation Δ²u + u^{-q} = 0.
struct ProblemSpec {
  int n = 5;
  int m = 3;
  Sign s = Sign::Plus;
  double q = 11.0;

  /// Validates n ≥ 2, m ∈ {2,3}, q > 0; throws Error(InvalidArgument).
  static ProblemSpec make(int n, int m, Sign s, double q);

  static ProblemSpec triharmonic(int n, double q) { return make(n, 3, Sign::Plus, q); }
  static ProblemSpec biharmonic(int n, double q) { return make(n, 2, Sign::Minus, q); }

  /// Number of first-order unknowns (2m).
  std::size_t order() const noexcept { return static_cast<std::size_t>(2 * m); }

  bool operator==(const ProblemSpec&) const = default;
};

/// Shooting data at the origin: a = u(0), b = Δu(0), c = Δ²u(0) (m=3 only).
struct OriginData {
  double a = 1.0;
  double b = 0.0;
  std::optional<double> c;

  static OriginData make(const ProblemSpec& spec, double a, double b, std::optional<double> c = {});

  bool operator==(const OriginData&) const = default;
};

/// Radial state (u, u', Δu, (Δu)', Δ²u, (Δ²u)'). The last pair is zero for m=2.
struct State {
  double u = 0, du = 0, w = 0, dw = 0, v = 0, dv = 0;

  using Array = std::array<double, 6>;
  Array to_array() const noexcept { return {u, du, w, dw, v, dv}; }
  static State from_array(const Array& y) noexcept { return {y[0], y[1], y[2], y[3], y[4], y[5]}; }

  bool operator==(const State&) const = default;
};

/// Smooth radial source added to the top level of the system, as used by the
/// comparison harness: Δ^m u = s·u^{-q} + f(r). The derivative is needed for
/// the second-derivative jets behind dense output.
struct Forcing {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  explicit operator bool() const noexcept { return static_cast<bool>(value); }
  double operator()(double r) const { return value ? value(r) : 0.0; }
  double prime(double r) const { return derivative ? derivative(r) : 0.0; }
};

/// Δf = f'' + (n-1)/r·f' for a radial f; r must be positive.
double radial_laplacian(double f, double df, double d2f, double r, int n);

/// Derivative of the first-order system. Throws ExtinctState when u ≤ 0.
State rhs(const ProblemSpec& spec, double r, const State& y, const Forcing& forcing = {});

/// Second radial derivative of the state, d²y/dr², from the analytic Jacobian.
State rhs_prime(const ProblemSpec& spec, double r, const State& y, const State& dy,
                const Forcing& forcing = {});

/// Coefficients c_j of the regular expansion u(r) = Σ c_j r^{2j} (through the
/// first nonlinear correction).
std::vector<double> series_coefficients(const ProblemSpec& spec, const OriginData& origin,
                                        double forcing_at_zero = 0.0);

/// State of the truncated series at a small radius r > 0.
State series_origin(const ProblemSpec& spec, const OriginData& origin, double r,
                    double forcing_at_zero = 0.0);

/// Series start radius: 1e-3 times the smallest curvature length of the
/// expansion, capped at 1e-3.
double start_radius(const ProblemSpec& spec, const OriginData& origin);

/// Largest radius accepted by series_origin.
inline constexpr double kSeriesMaxRadius = 0.05;

struct ClosedForm {
  enum class Kind { TriHarm5D_q11, BiHarm3D_q7, PowerLaw };
  Kind kind = Kind::TriHarm5D_q11;
  double amplitude = 0.0;  // c_* / unused / A
  double shift = 0.0;      // unused / a0² / unused
  double exponent = 0.0;   // PowerLaw τ

  static ClosedForm triharmonic_5d();
  static ClosedForm biharmonic_3d();
  /// u = A r^τ with τ = 4/(q+1), A = K_q^{-1/(q+1)} for Δ²u = -u^{-q} in ℝ³, 1 < q < 3.
  static ClosedForm power_law(double q);

  ProblemSpec spec() const;
  /// Origin data matching the closed form (not defined for PowerLaw).
  OriginData origin() const;
};

/// λ in Δ³(1+r²)^{1/2} = λ(1+r²)^{-11/2} in ℝ⁵.
inline constexpr double kTriharmonicLambda = 945.0;

/// K_q = τ(2-τ)(τ+1)(τ-1) with τ = 4/(q+1).
double k_q(double q);

/// Exact state of a closed-form solution. PowerLaw rejects r ≤ 0.
State eval_closed_form(const ClosedForm& cf, double r);

/// Δ^m u evaluated analytically (the quantity compared against s·u^{-q}).
double closed_form_top_laplacian(const ClosedForm& cf, double r);

struct ClosedFormCheck {
  double max_residual = 0.0;       // max |Δ^m u · u^q - s|
  std::optional<double> lambda;    // TriHarm5D_q11 only
  std::optional<double> amplitude; // λ^{-1/12} for TriHarm5D_q11
};

/// Checks a closed form against the PDE on the given radii.
ClosedFormCheck verify_closed_form(const ClosedForm& cf, const ProblemSpec& spec,
                                   std::span<const double> radii);

}  // namespace polyrad
