#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace polyrad::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

inline Result& operator+=(Result& lhs, const Result& rhs) {
  lhs.value += rhs.value;
  lhs.error += rhs.error;
  return lhs;
}

/// Adaptive 21-point Gauss–Kronrod on [a, b]; b may be +inf.
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 24) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  Result out;
  double l1 = 0.0;
  out.value = GK::integrate(f, a, b, max_depth, rel_tol, &out.error, &l1);
  return out;
}

/// Same rule applied panel by panel between consecutive break points, so that
/// kinks and integrable endpoint singularities sit on panel edges. The error
/// target is relative to the whole integral: a coarse pass sizes each panel and
/// negligible panels are refined only down to rel_tol·total.
template <class F>
Result gauss_kronrod_split(F&& f, std::span<const double> points, double rel_tol = 1e-12,
                           unsigned max_depth = 24) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  const std::size_t panels = points.empty() ? 0 : points.size() - 1;
  std::vector<double> l1(panels, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    if (!(points[i + 1] > points[i])) continue;
    double err = 0.0;
    GK::integrate(f, points[i], points[i + 1], 0, rel_tol, &err, &l1[i]);
    total += l1[i];
  }
  Result out;
  for (std::size_t i = 0; i < panels; ++i) {
    if (!(points[i + 1] > points[i])) continue;
    double tol = rel_tol;
    if (l1[i] > 0.0) tol = std::clamp(rel_tol * total / l1[i], rel_tol, 0.1);
    out += gauss_kronrod(f, points[i], points[i + 1], tol, max_depth);
  }
  return out;
}

/// Fixed 8-point Gauss–Legendre on one panel.
template <class F>
double gauss_legendre8(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

}  // namespace polyrad::quad
