#include "verify.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "polyrad/classifier.hpp"
#include "polyrad/integrator.hpp"
#include "polyrad/invariants.hpp"
#include "polyrad/kernels.hpp"
#include "polyrad/radial_core.hpp"

namespace polyrad::tools {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

IntegrationConfig tight(double r_max) {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.r_max = r_max;
  cfg.dense_output_stride = 0.5;
  return cfg;
}

double tracking_error(const Trajectory& t, const ClosedForm& cf) {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, rel(t.states[i].u, eval_closed_form(cf, t.radii[i]).u));
  return worst;
}

void closed_forms(std::vector<Finding>& out) {
  const std::string s = "closed-forms";
  {
    const auto cf = ClosedForm::triharmonic_5d();
    const std::array<double, 4> radii{0.5, 1.0, 2.0, 7.0};
    const auto chk = verify_closed_form(cf, cf.spec(), radii);
    const double lam = chk.lambda.value_or(0.0);
    out.push_back({s, "lambda", rel(lam, kTriharmonicLambda) < 1e-10,
                   "lambda = " + num(lam) + ", c_* = " + num(chk.amplitude.value_or(0.0))});
    const auto t = integrate(cf.spec(), cf.origin(), tight(100.0));
    const double err = tracking_error(t, cf);
    out.push_back({s, "tri-harmonic tracking", err < 1e-6, "max rel error to r=100: " + num(err)});
  }
  {
    const auto cf = ClosedForm::biharmonic_3d();
    std::vector<double> radii;
    for (int i = 0; i <= 200; ++i) radii.push_back(0.5 * i);
    const auto chk = verify_closed_form(cf, cf.spec(), radii);
    out.push_back({s, "bi-harmonic residual", chk.max_residual < 1e-10,
                   "a0^2 = " + num(cf.shift) + " (1/sqrt 15 = " + num(1.0 / std::sqrt(15.0)) +
                       "), residual " + num(chk.max_residual)});
    const auto t = integrate(cf.spec(), cf.origin(), tight(100.0));
    const double err = tracking_error(t, cf);
    out.push_back({s, "bi-harmonic tracking", err < 1e-6, "max rel error to r=100: " + num(err)});
  }
  for (double q : {1.5, 2.0, 2.5}) {
    const auto cf = ClosedForm::power_law(q);
    const double id = std::pow(cf.amplitude, q + 1.0) * k_q(q);
    const State y1 = eval_closed_form(cf, 1.0);
    const auto t = integrate_from(cf.spec(), OriginData{y1.u, y1.w, std::nullopt}, 1.0, y1, tight(100.0));
    const double err = tracking_error(t, cf);
    out.push_back({s, "power law q=" + num(q), std::abs(id - 1.0) < 1e-12 && err < 1e-6,
                   "A^{q+1} K_q = " + num(id) + ", tracking " + num(err)});
  }
}

void first_integral(std::vector<Finding>& out) {
  const auto spec = ProblemSpec::biharmonic(2, 1.0);
  const std::array<std::pair<double, double>, 3> seeds{{{1.0, 0.5}, {2.0, 1.0}, {0.5, 2.0}}};
  for (auto [a, b] : seeds) {
    const auto t = integrate(spec, OriginData{a, b, {}}, tight(20.0));
    const double res = first_integral_residual(t);
    out.push_back({"first-integral", "seed (" + num(a) + ", " + num(b) + ")", res < 1e-6, "residual " + num(res)});
  }
}

void kernels(std::vector<Finding>& out, const std::optional<std::filesystem::path>& cache) {
  const std::string s = "kernels";
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.1 + 0.37 * i);
  auto table = [&](int n, KernelKind k) {
    return cache ? KernelTable::cached(*cache, n, k, grid, grid, 1, true)
                 : KernelTable::build(n, k, grid, grid, 1, true);
  };
  {
    const auto t = table(5, KernelKind::Newton3);
    double worst = 0.0, sym = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j) {
        worst = std::max(worst, rel(t.value(i, j), std::pow(std::max(grid[i], grid[j]), -3.0)));
        sym = std::max(sym, rel(t.value(i, j), t.value(j, i)));
      }
    out.push_back({s, "newton3 mean value (n=5)", worst < 1e-10, "max rel error " + num(worst)});
    out.push_back({s, "newton3 symmetry", sym < 1e-12, "max asymmetry " + num(sym)});
  }
  {
    const auto t = table(3, KernelKind::Dist);
    double worst = 0.0, sym = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double big = std::max(grid[i], grid[j]), small = std::min(grid[i], grid[j]);
        worst = std::max(worst, rel(t.value(i, j), big + small * small / (3.0 * big)));
        sym = std::max(sym, rel(t.value(i, j), t.value(j, i)));
      }
    out.push_back({s, "dist closed form (n=3)", worst < 1e-10, "max rel error " + num(worst)});
    out.push_back({s, "dist symmetry", sym < 1e-12, "max asymmetry " + num(sym)});
  }
  {
    const double d5 = laplacian_chain_defect(5, {0.3, 0.8, 1.5, 3.0});
    const double d3 = laplacian_chain_defect(3, {0.3, 0.8, 1.5, 3.0});
    out.push_back({s, "laplacian chain", d5 < 1e-5 && d3 < 1e-5, "defect n=5 " + num(d5) + ", n=3 " + num(d3)});
  }
  {
    const double s3 = surface_area(3), s5 = surface_area(5);
    const double pi = std::acos(-1.0);
    out.push_back({s, "surface areas", rel(s3, 4.0 * pi) < 1e-15 && rel(s5, 8.0 * pi * pi / 3.0) < 1e-15,
                   "S2 = " + num(s3) + ", S4 = " + num(s5)});
  }
}

void invariants(std::vector<Finding>& out) {
  const std::string s = "invariants";
  auto run = [&](const std::string& name, const Trajectory& t) {
    const auto g = classify(t);
    const auto rep = check_all(t, g);
    std::string failed;
    for (const auto& c : rep.checks)
      if (c.status == CheckStatus::Fail) failed += c.name + " ";
    out.push_back({s, name, rep.all_pass(),
                   std::string(to_string(g.cls)) + ", " + std::to_string(rep.count(CheckStatus::Pass)) + " pass, " +
                       std::to_string(rep.count(CheckStatus::NotApplicable)) + " n/a" +
                       (failed.empty() ? "" : ", failed: " + failed)});
  };
  const auto c5 = ClosedForm::triharmonic_5d();
  run("tri-harmonic closed form", integrate(c5.spec(), c5.origin(), tight(100.0)));
  const auto c3 = ClosedForm::biharmonic_3d();
  run("bi-harmonic closed form", integrate(c3.spec(), c3.origin(), tight(100.0)));
  run("quartic n=5 q=2", integrate(ProblemSpec::triharmonic(5, 2.0), OriginData{1.0, 0.0, 1.0}, tight(100.0)));
  run("planar q=2", integrate(ProblemSpec::biharmonic(2, 2.0), OriginData{1.0, 0.1, {}}, tight(100.0)));
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"closed-forms", "first-integral", "kernels", "invariants", "all"};
  return names;
}

std::vector<Finding> run_suite(const std::string& suite, const std::optional<std::filesystem::path>& kernel_cache) {
  std::vector<Finding> out;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "closed-forms") known = true, closed_forms(out);
  if (all || suite == "first-integral") known = true, first_integral(out);
  if (all || suite == "kernels") known = true, kernels(out, kernel_cache);
  if (all || suite == "invariants") known = true, invariants(out);
  if (!known) throw std::invalid_argument("unknown suite '" + suite + "'");
  return out;
}

}  // namespace polyrad::tools
