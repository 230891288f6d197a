#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyrad/classifier.hpp"
#include "polyrad/integrator.hpp"
#include "polyrad/invariants.hpp"

namespace polyrad {

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCell {
  std::size_t index = 0;
  ProblemSpec spec;
  OriginData origin;
};

struct SweepPlan {
  std::string name = "sweep";
  int n = 3;
  int m = 2;
  Sign s = Sign::Minus;
  std::vector<double> q_values;
  std::vector<double> a_values;
  std::vector<double> b_values;
  /// m = 3 only.
  std::vector<double> c_values;
  IntegrationConfig cfg;
  ClassifierConfig classifier;
  bool invariants = true;
  /// Planar bi-harmonic cells also get a death forecast.
  bool forecast = true;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Cells in q-major, then a, b, c order.
  std::vector<SweepCell> cells() const;
};

struct DeathForecast {
  /// Plateau of m(r) = ∫₀^r t·u^{-q} dt = -r·Δu'(r).
  double m_inf = 0.0;
  /// Relative drift of m over the last decade of the fit window.
  double m_drift = 0.0;
  bool mass_converged = false;
  /// Δu ≈ A - m̂·ln r on the tail.
  double fit_a = 0.0;
  /// ln of the radius where Δu crosses zero (finite whenever m̂ > 0).
  double log_r_w0 = 0.0;
  /// ln of the predicted death radius from the frozen-mass log potential.
  double log_r_death = 0.0;
  /// Spread of log_r_death under m̂·(1 ± m_drift).
  double log_r_death_error = 0.0;
  double r_anchor = 0.0;
  std::optional<double> observed;
  std::string method;

  double r_w0() const;
  double r_death_pred() const;
};

/// Death predictor for planar bi-harmonic trajectories. Throws WrongSpec for
/// other problems and MassNotConverged when the mass is not positive.
DeathForecast death_forecast(const Trajectory& traj);

struct CellResult {
  SweepCell cell;
  GrowthReport growth;
  InvariantReport invariants;
  std::optional<DeathForecast> forecast;
  TerminationInfo termination;
  std::size_t steps = 0;
  /// Non-empty when the cell failed; the sweep continues regardless.
  std::string error;
};

/// Runs every cell; results are indexed by cell and independent of scheduling.
std::vector<CellResult> run_sweep(const SweepPlan& plan);

// ---------------------------------------------------------------------------
// Shooting

enum class Side { Below, Above };

std::string_view to_string(Side s) noexcept;

struct SideResult {
  Side side = Side::Below;
  TerminationInfo termination;
  /// Smallest u'' seen along the way.
  double min_d2u = 0.0;
};

/// Which side of the linear-growth separatrix the data lies on.
/// m = 2, s = -1: Below when u' turns negative or dies, else by the sign of Δu(∞) ≈ Δu + r·Δu'.
/// m = 3, s = +1: Below when Δu < 0, Above when Δ²u > 0, else by Δ²u(∞) ≈ Δ²u + r·Δ²u'/(n-2).
SideResult side_of(const ProblemSpec& spec, const OriginData& origin, const IntegrationConfig& cfg);

enum class FreeParam { B, C };

struct BisectionResult {
  double param = 0.0;
  /// Final bracket, lo on the Below side.
  double below = 0.0;
  double above = 0.0;
  std::size_t iterations = 0;
  GrowthClass below_class = GrowthClass::Undetermined;
  GrowthClass above_class = GrowthClass::Undetermined;
  /// Classes of the initial bracket endpoints.
  GrowthClass lo_class = GrowthClass::Undetermined;
  GrowthClass hi_class = GrowthClass::Undetermined;
  Trajectory traj;
  GrowthReport growth;
};

/// Bisects the free parameter to machine precision (at most 200 steps) and
/// returns the Linear trajectory at the final bracket. Throws BracketInvalid
/// when both ends lie on the same side and NoLinearWindow when neither final
/// endpoint classifies Linear with α > 0.
BisectionResult bisect_separatrix(const ProblemSpec& spec, const OriginData& origin, FreeParam free, double lo,
                                  double hi, const IntegrationConfig& cfg, const ClassifierConfig& ccfg = {});

struct LinearSolution {
  double b = 0.0;
  double c = 0.0;
  std::size_t outer_iterations = 0;
  Trajectory traj;
  GrowthReport growth;
  std::optional<AlphaIntegral> alpha_integral;
};

/// Tri-harmonic linear-growth solution at fixed a: nested bisection with c*(b)
/// inside and the sign of min u'' on the overshoot side of c*(b) outside.
LinearSolution find_linear_solution(const ProblemSpec& spec, double a, std::pair<double, double> b_bracket,
                                    std::pair<double, double> c_bracket, const IntegrationConfig& cfg,
                                    const ClassifierConfig& ccfg = {});

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonResult {
  Trajectory u;  // forced
  Trajectory v;  // unforced
  double min_gap = 0.0;
  double min_gap_radius = 0.0;
  double common_until = 0.0;
  /// U > V at every sample where the leading-order gap f(0)r⁴/64 is resolvable.
  bool strict = false;
  std::string verdict;
};

/// Integrates V (Δ²V = -V^{-q}) and U (Δ²U = -U^{-q} + f) from the same origin
/// data. Throws HypothesisViolated if U drops below V by more than 1e-8·scale.
ComparisonResult comparison_harness(const ProblemSpec& spec, const OriginData& origin, const Forcing& forcing,
                                    const IntegrationConfig& cfg);

struct SuperSolutionResult {
  /// min over r > 0 of (z - u)/z with z = a + Δu(0)·r²/4.
  double min_margin = 0.0;
  double worst_radius = 0.0;
  bool strict = false;
};

SuperSolutionResult quadratic_supersolution_check(const Trajectory& traj);

}  // namespace polyrad
