#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyrad/integrator.hpp"

namespace polyrad {

enum class GrowthClass { Extinct, Power, LogCorrected, Linear, Quadratic, Quartic, Undetermined };

std::string_view to_string(GrowthClass c) noexcept;
std::optional<GrowthClass> growth_class_from_string(std::string_view s) noexcept;

struct ClassifierConfig {
  /// Half-width of the acceptance band around each target slope.
  double band = 0.15;
  /// Tail window is [tail_fraction·r_end, r_end].
  double tail_fraction = 0.25;
  std::size_t tail_samples = 64;
  /// ρ_min = rho_min_scale · max(1, Δu(0)).
  double rho_min_scale = 1e-6;
  /// A Quadratic call needs Δu to settle: |Δu'| must decay faster than
  /// r^{-plateau_decay} and the extrapolated remaining drift of Δu must stay
  /// below plateau_tol·|Δu|.
  double plateau_decay = 1.5;
  double plateau_tol = 0.05;
  /// Quartic needs Δ²u to have settled to this relative tolerance across the window.
  double quartic_settle_tol = 0.02;
};

struct GrowthReport {
  GrowthClass cls = GrowthClass::Undetermined;
  /// Extinct: r*; Power: amplitude A; LogCorrected: coefficient; Linear: α;
  /// Quadratic: ρ/2; Quartic: L. Unused otherwise.
  double constant = 0.0;
  /// Fitted log-log slope over the tail window.
  double exponent = 0.0;
  /// Theoretical slope for the reported class (4/(q+1), 1, 2 or 4).
  double target_exponent = 0.0;
  /// Paper-side reference constant when one exists (K_q amplitude, 2^{1/4}).
  std::optional<double> reference_constant;
  double tail_lo = 0.0;
  double tail_hi = 0.0;
  double fit_residual = 0.0;
  double slope_drift = 0.0;
  std::vector<double> slope_samples;
  Termination termination = Termination::ReachedRmax;
  std::string note;

  bool survives() const noexcept { return cls != GrowthClass::Extinct && cls != GrowthClass::Undetermined; }
  bool subquartic() const noexcept {
    return cls == GrowthClass::Linear || cls == GrowthClass::Quadratic || cls == GrowthClass::Power ||
           cls == GrowthClass::LogCorrected;
  }
};

GrowthReport classify(const Trajectory& traj, const ClassifierConfig& cfg = {});

struct AlphaIntegral {
  double value = 0.0;
  /// Quadrature error plus the tail remainder estimate.
  double error = 0.0;
  double partial = 0.0;
  double tail = 0.0;
  /// Local decay exponent k of the integrand, |g| ~ t^{-k}.
  double decay = 0.0;
};

/// α = -1/(n-1) ∫₀^∞ t²(Δ²u - (n-3)/t·(Δu)') dt for m = 3. Throws
/// NonDecayingIntegrand when the remainder exceeds 10% of the partial sum.
AlphaIntegral linear_alpha_from_integral(const Trajectory& traj);

struct QuarticLimit {
  double limit = 0.0;       // v(r_hi)/(8n(n+2))
  double u_over_r4 = 0.0;   // u(r_hi)/r_hi⁴
  double relative_gap = 0.0;
};

/// Quartic limit for m = 3, s = +1. Throws NotSettled if v still drifts more
/// than settle_tol between r_hi/2 and r_hi, WrongSpec for other problems.
QuarticLimit quartic_limit(const Trajectory& traj, double settle_tol = 0.02);

}  // namespace polyrad
