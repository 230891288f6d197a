#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "polyrad/radial_core.hpp"

namespace polyrad {

struct IntegrationConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double r_max = 100.0;
  /// u ≤ extinction_threshold · u(0) declares death.
  double extinction_threshold = 1e-6;
  std::size_t max_steps = 4'000'000;
  /// Radius spacing of stored samples; 0 stores accepted steps only.
  double dense_output_stride = 0.1;
  /// Any |state component| above this stops with BlowUp.
  double blowup_threshold = 1e12;

  /// Throws InvalidArgument when a field is out of its admissible range.
  void validate(double r_start) const;
};

enum class Termination { ReachedRmax, Extinct, BlowUp, StepFailure, Stopped };

std::string_view to_string(Termination t) noexcept;

struct TerminationInfo {
  Termination cause = Termination::ReachedRmax;
  double radius = 0.0;
  /// [last alive, first dead] for Extinct; equal endpoints otherwise.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// Caller-defined tag when cause == Stopped.
  int stop_tag = 0;
};

/// An integrated radial solution. Each sample stores the state together with
/// its first and second radial derivatives, which is all the quintic Hermite
/// interpolant in resample() needs.
struct Trajectory {
  ProblemSpec spec;
  OriginData origin;
  std::vector<double> radii;
  std::vector<State> states;
  std::vector<State> slopes;
  std::vector<State> curvatures;
  TerminationInfo termination;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;

  bool empty() const noexcept { return radii.empty(); }
  std::size_t size() const noexcept { return radii.size(); }
  double r_start() const { return radii.front(); }
  double r_end() const { return radii.back(); }
  const State& back() const { return states.back(); }
  /// Radius up to which u stayed above the extinction threshold.
  double alive_until() const;
};

struct IntegrateOptions {
  Forcing forcing;
  /// Checked after every accepted step; a nonzero return stops the
  /// integration with Termination::Stopped and that tag.
  std::function<int(double r, const State& y)> stop;
  /// When false only the first and final samples are kept.
  bool record_samples = true;
};

/// Integrates outward from the series start at the origin.
Trajectory integrate(const ProblemSpec& spec, const OriginData& origin, const IntegrationConfig& cfg,
                     const IntegrateOptions& options = {});

/// Integrates outward from an arbitrary regular state at r_start > 0.
Trajectory integrate_from(const ProblemSpec& spec, const OriginData& origin, double r_start,
                          const State& start, const IntegrationConfig& cfg,
                          const IntegrateOptions& options = {});

/// Dense-output values at the requested radii (any order). Throws OutOfRange
/// for radii outside [r_start, r_end].
std::vector<State> resample(const Trajectory& traj, std::span<const double> radii);
State resample(const Trajectory& traj, double r);

struct AlongResult {
  double value = 0.0;
  double error = 0.0;
};

/// ∫ g(r, state(r)) dr over [lo, hi] ⊂ trajectory range: 8-point Gauss–Legendre
/// per sample interval on the interpolant, split additionally at `breaks`.
/// The error is estimated by comparing against a 4-point rule.
AlongResult integrate_along(const Trajectory& traj, const std::function<double(double, const State&)>& g,
                            double lo, double hi, std::span<const double> breaks = {});

/// Cumulative ∫_{r_start}^{r_i} g dr at every stored sample (first entry 0).
std::vector<double> cumulative_along(const Trajectory& traj,
                                     const std::function<double(double, const State&)>& g);

/// Trapezoid version of cumulative_along on the stored grid.
std::vector<double> cumulative_trapezoid(const Trajectory& traj,
                                         const std::function<double(double, const State&)>& g);

/// max |Q(r)|/r² for the q = 1 planar identity
/// Q = U·rW' − U'·rW + ∫₀^r tW² dt + r²/2. Throws WrongSpec otherwise.
double first_integral_residual(const Trajectory& traj, double r_limit = 20.0);

/// The same identity evaluated with a caller-supplied perturbation of W, used
/// to show the check detects corrupted trajectories.
double first_integral_residual_perturbed(const Trajectory& traj, double w_offset, double r_limit = 20.0);

}  // namespace polyrad
