#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyrad/classifier.hpp"
#include "polyrad/integrator.hpp"

namespace polyrad {

/// Convolution kernels K(|x-y|): Dist = |x-y|, Newton1 = 1/|x-y|, Newton3 = 1/|x-y|³.
enum class KernelKind { Dist, Newton1, Newton3 };

std::string_view to_string(KernelKind k) noexcept;
std::optional<KernelKind> kernel_kind_from_string(std::string_view s) noexcept;
/// Power p in K = |x-y|^p.
int kernel_power(KernelKind k) noexcept;

/// Area of the unit sphere S^{n-1} ⊂ ℝⁿ, 2π^{n/2}/Γ(n/2).
double surface_area(int n);

struct MeanValue {
  double value = 0.0;
  double error = 0.0;
};

/// Mean of K(|x-y|) over |y| = s with |x| = r by angular Gauss–Kronrod.
/// Throws SingularDiagonal when r = s and the kernel is not integrable on the sphere.
MeanValue spherical_mean_quadrature(int n, KernelKind kind, double r, double s, double rel_tol = 1e-13);

/// Closed form of the same mean when one is known (n = 3 all kinds, n = 5 all kinds).
std::optional<double> spherical_mean_closed(int n, KernelKind kind, double r, double s);

/// Closed form when available, quadrature otherwise.
MeanValue spherical_mean_kernel(int n, KernelKind kind, double r, double s);

class KernelTable {
 public:
  KernelTable() = default;

  /// Tabulates the mean on the tensor grid rows × cols, split across `threads` workers.
  static KernelTable build(int n, KernelKind kind, std::vector<double> rows, std::vector<double> cols,
                           unsigned threads = 1, bool force_quadrature = false);

  /// Loads from `dir` when a cache file with the same key exists, otherwise builds
  /// and writes it.
  static KernelTable cached(const std::filesystem::path& dir, int n, KernelKind kind, std::vector<double> rows,
                            std::vector<double> cols, unsigned threads = 1, bool force_quadrature = false);

  int n() const noexcept { return n_; }
  KernelKind kind() const noexcept { return kind_; }
  bool quadrature() const noexcept { return quadrature_; }
  const std::vector<double>& rows() const noexcept { return rows_; }
  const std::vector<double>& cols() const noexcept { return cols_; }
  double value(std::size_t i, std::size_t j) const { return values_.at(i * cols_.size() + j); }
  double error(std::size_t i, std::size_t j) const { return errors_.at(i * cols_.size() + j); }
  bool from_cache() const noexcept { return from_cache_; }

  /// FNV-1a over the grid bytes, kind, dimension and evaluation method.
  std::uint64_t key() const noexcept;
  std::string cache_file_name() const;

  /// Hex-float CSV; exact round trip.
  void save(const std::filesystem::path& file) const;
  static KernelTable load(const std::filesystem::path& file);

  bool operator==(const KernelTable& o) const {
    return n_ == o.n_ && kind_ == o.kind_ && quadrature_ == o.quadrature_ && rows_ == o.rows_ &&
           cols_ == o.cols_ && same_bits(values_, o.values_) && same_bits(errors_, o.errors_);
  }

 private:
  static bool same_bits(const std::vector<double>& a, const std::vector<double>& b);

  int n_ = 0;
  KernelKind kind_ = KernelKind::Dist;
  bool quadrature_ = false;
  std::vector<double> rows_, cols_, values_, errors_;
  bool from_cache_ = false;
};

struct RadialProfile {
  std::vector<double> radii;
  std::vector<double> values;
  /// Quadrature plus tail-model error per radius.
  std::vector<double> errors;
  /// Contribution from beyond the trajectory's end per radius.
  std::vector<double> tails;
};

/// Tail model for u beyond the last alive sample, chosen from the growth class.
struct TailModel {
  GrowthClass cls = GrowthClass::Undetermined;
  double r_end = 0.0;
  double u = 0.0, du = 0.0, d2u = 0.0;
  /// Asymptotic growth exponent g in u ~ r^g.
  double growth = 0.0;

  static TailModel from(const Trajectory& traj, const GrowthReport& growth);
  double operator()(double r) const;
  /// Alternative extrapolation (pure power with the same value and log-slope) used
  /// for the tail error estimate.
  double alternative(double r) const;
};

/// F(r) = coefficient·Σ_{n-1}·∫₀^∞ s^{n-1}·mean(r,s)·u^{-q}(s) ds on `radii`.
/// Throws NonIntegrableTail if the growth class makes the integral diverge and
/// TailDominates if the tail exceeds 5% of a value.
RadialProfile radial_convolution(const Trajectory& traj, const GrowthReport& growth, KernelKind kind,
                                 double coefficient, const std::vector<double>& radii);

/// Same convolution for an explicit density f supported on [0, support].
double convolve_density(int n, KernelKind kind, const std::function<double(double)>& f, double support, double r,
                        double rel_tol = 1e-12);

struct RepresentationReport {
  double gamma = 0.0;
  double gamma_error = 0.0;
  double zeta = 0.0;
  double zeta_error = 0.0;
  /// Classifier slope α, for the α = ζ comparison.
  double alpha = 0.0;
  double residual = 0.0;
  double tail_truncation = 0.0;
  double coefficient = 0.0;
  std::vector<double> radii;
  std::vector<double> differences;  // u - K at radii
};

/// Representation coefficient 1/(64π²) (n = 5, m = 3) or 1/(8π) (n = 3, m = 2).
double representation_coefficient(const ProblemSpec& spec);

/// γ = median over the outer quarter of radii of u - K, ζ from the total mass.
RepresentationReport extract_gamma(const Trajectory& traj, const GrowthReport& growth);

struct PohozaevResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  /// |lhs - rhs| / max(|lhs|, |rhs|); zero when both sides vanish.
  double residual = 0.0;
  /// True when the left coefficient is exactly zero.
  bool coefficient_zero = false;
};

PohozaevResult pohozaev_check(const Trajectory& traj, const GrowthReport& growth, const RepresentationReport& rep);

/// Max relative defect between (n-1)·Newton1 and the finite-difference
/// Laplacian of the Dist convolution of a smooth compact density.
double laplacian_chain_defect(int n, const std::vector<double>& radii);

}  // namespace polyrad
