#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "polyrad/classifier.hpp"
#include "polyrad/integrator.hpp"

namespace polyrad {

enum class CheckStatus { Pass, Fail, NotApplicable };

std::string_view to_string(CheckStatus s) noexcept;

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::NotApplicable;
  /// Smallest scaled margin seen (negative means violated beyond slack).
  double worst_margin = 0.0;
  double worst_radius = 0.0;
  std::size_t samples = 0;
  std::string note;
};

struct InvariantReport {
  std::vector<CheckResult> checks;

  bool all_pass() const noexcept;
  std::size_t count(CheckStatus s) const noexcept;
  const CheckResult* find(std::string_view name) const noexcept;
  void append(const InvariantReport& other);
};

struct InvariantConfig {
  /// Additive slack relative to the local magnitude of both sides.
  double slack = 1e-10;
};

/// Δu > 0 (and Δ²u < 0 for m = 3) at every sample.
InvariantReport check_subpolyharmonic(const Trajectory& traj, const GrowthReport& growth,
                                      const InvariantConfig& cfg = {});
/// Sign conditions on u', u'', u''', (Δu)', (Δ²u)'.
InvariantReport check_monotonicity(const Trajectory& traj, const GrowthReport& growth,
                                   const InvariantConfig& cfg = {});
/// Upper and lower growth bounds.
InvariantReport check_bounds(const Trajectory& traj, const GrowthReport& growth, const InvariantConfig& cfg = {});
/// Decay and growth estimates for Δ²u, Δu and u with constants from the r = 1 sphere.
InvariantReport check_lemma7_estimates(const Trajectory& traj, const GrowthReport& growth,
                                       const InvariantConfig& cfg = {});
/// For radial data the spherical mean of u^{-q} is ū^{-q} exactly, so the stored
/// slopes must agree with the right-hand side evaluated on the stored states.
InvariantReport check_radial_jensen(const Trajectory& traj, const Forcing& forcing = {});

/// All of the above.
InvariantReport check_all(const Trajectory& traj, const GrowthReport& growth, const InvariantConfig& cfg = {});

}  // namespace polyrad
