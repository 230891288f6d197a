#include "polyrad/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "polyrad/error.hpp"
#include "polyrad/quadrature.hpp"

namespace polyrad {

std::string_view to_string(KernelKind k) noexcept {
  switch (k) {
    case KernelKind::Dist: return "dist";
    case KernelKind::Newton1: return "newton1";
    case KernelKind::Newton3: return "newton3";
  }
  return "?";
}

std::optional<KernelKind> kernel_kind_from_string(std::string_view s) noexcept {
  for (auto k : {KernelKind::Dist, KernelKind::Newton1, KernelKind::Newton3})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

int kernel_power(KernelKind k) noexcept {
  switch (k) {
    case KernelKind::Dist: return 1;
    case KernelKind::Newton1: return -1;
    case KernelKind::Newton3: return -3;
  }
  return 0;
}

double surface_area(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "surface_area: n must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

/// ∫₀^π sin^{n-2}θ dθ.
double angular_norm(int n) {
  return std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (n - 1)) / std::tgamma(0.5 * n);
}

bool singular_on_diagonal(int n, KernelKind kind) { return kernel_power(kind) + n - 1 <= 0; }

void check_radii(int n, KernelKind kind, double r, double s) {
  if (!(r >= 0.0) || !(s >= 0.0) || !std::isfinite(r) || !std::isfinite(s))
    throw Error(ErrorCode::InvalidArgument, "spherical mean: radii must be finite and non-negative");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "spherical mean: n must be at least 2");
  if (r == s && kernel_power(kind) < 0 && (r == 0.0 || singular_on_diagonal(n, kind))) {
    std::ostringstream os;
    os << to_string(kind) << " is not integrable on the sphere at r = s = " << r << " in dimension " << n;
    throw Error(ErrorCode::SingularDiagonal, os.str());
  }
}

}  // namespace

MeanValue spherical_mean_quadrature(int n, KernelKind kind, double r, double s, double rel_tol) {
  check_radii(n, kind, r, s);
  const double p = kernel_power(kind);
  if (r == 0.0 || s == 0.0) return {std::pow(std::max(r, s), p), 0.0};

  const double diff2 = (r - s) * (r - s);
  const double rs4 = 4.0 * r * s;
  auto f = [&](double t) {
    const double h = std::sin(0.5 * t);
    const double d2 = diff2 + rs4 * h * h;
    return std::pow(d2, 0.5 * p) * std::pow(std::sin(t), n - 2);
  };

  // Geometric panels resolve the near-diagonal peak at θ ~ |r-s|/√(rs).
  std::vector<double> pts{0.0};
  const double delta = std::abs(r - s) / std::sqrt(r * s);
  if (delta > 0.0 && delta < 0.5) {
    for (double t = delta; t < 1.0; t *= 4.0) pts.push_back(t);
  }
  pts.push_back(std::numbers::pi);
  const auto res = quad::gauss_kronrod_split(f, pts, rel_tol, 30);
  const double z = angular_norm(n);
  return {res.value / z, res.error / z};
}

std::optional<double> spherical_mean_closed(int n, KernelKind kind, double r, double s) {
  check_radii(n, kind, r, s);
  const double big = std::max(r, s);
  const double small = std::min(r, s);
  if (n == 3) {
    switch (kind) {
      case KernelKind::Dist: return big + small * small / (3.0 * big);
      case KernelKind::Newton1: return 1.0 / big;
      case KernelKind::Newton3: return 1.0 / (big * (big - small) * (big + small));
    }
  }
  if (n == 5) {
    const double x2 = (small / big) * (small / big);
    switch (kind) {
      case KernelKind::Dist: return big * (1.0 + 0.4 * x2 - x2 * x2 / 35.0);
      case KernelKind::Newton1: return (1.0 - 0.2 * x2) / big;
      case KernelKind::Newton3: return 1.0 / (big * big * big);
    }
  }
  return std::nullopt;
}

MeanValue spherical_mean_kernel(int n, KernelKind kind, double r, double s) {
  if (auto v = spherical_mean_closed(n, kind, r, s)) return {*v, 0.0};
  return spherical_mean_quadrature(n, kind, r, s);
}

// ---------------------------------------------------------------------------
// KernelTable

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_double(const std::string& tok, const std::filesystem::path& file, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    std::ostringstream os;
    os << file.string() << ":" << line << ": bad number '" << tok << "'";
    throw Error(ErrorCode::IoError, os.str());
  }
  return v;
}

constexpr const char* kTableMagic = "# polyrad kernel table v1";

}  // namespace

bool KernelTable::same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

KernelTable KernelTable::build(int n, KernelKind kind, std::vector<double> rows, std::vector<double> cols,
                               unsigned threads, bool force_quadrature) {
  KernelTable t;
  t.n_ = n;
  t.kind_ = kind;
  t.quadrature_ = force_quadrature;
  t.rows_ = std::move(rows);
  t.cols_ = std::move(cols);
  const std::size_t total = t.rows_.size() * t.cols_.size();
  t.values_.assign(total, 0.0);
  t.errors_.assign(total, 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double r = t.rows_[k / t.cols_.size()];
      const double s = t.cols_[k % t.cols_.size()];
      try {
        const MeanValue mv =
            force_quadrature ? spherical_mean_quadrature(n, kind, r, s) : spherical_mean_kernel(n, kind, r, s);
        t.values_[k] = mv.value;
        t.errors_[k] = mv.error;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularDiagonal) throw;
        t.values_[k] = std::numeric_limits<double>::infinity();
        t.errors_[k] = std::numeric_limits<double>::infinity();
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (threads == 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = std::min(total, w * chunk);
      const std::size_t e = std::min(total, b + chunk);
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return t;
}

std::uint64_t KernelTable::key() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const int kind = static_cast<int>(kind_);
  const int quad = quadrature_ ? 1 : 0;
  const std::size_t nr = rows_.size(), nc = cols_.size();
  h = fnv1a(h, kTableMagic, std::strlen(kTableMagic));
  h = fnv1a(h, &n_, sizeof n_);
  h = fnv1a(h, &kind, sizeof kind);
  h = fnv1a(h, &quad, sizeof quad);
  h = fnv1a(h, &nr, sizeof nr);
  h = fnv1a(h, &nc, sizeof nc);
  if (nr) h = fnv1a(h, rows_.data(), nr * sizeof(double));
  if (nc) h = fnv1a(h, cols_.data(), nc * sizeof(double));
  return h;
}

std::string KernelTable::cache_file_name() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "kernel-n%d-%s-%016llx.csv", n_, std::string(to_string(kind_)).c_str(),
                static_cast<unsigned long long>(key()));
  return buf;
}

void KernelTable::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  char keybuf[32];
  std::snprintf(keybuf, sizeof keybuf, "%016llx", static_cast<unsigned long long>(key()));
  out << kTableMagic << "\n";
  out << "# n=" << n_ << " kind=" << to_string(kind_) << " method=" << (quadrature_ ? "quadrature" : "auto")
      << " rows=" << rows_.size() << " cols=" << cols_.size() << " key=" << keybuf << "\n";
  out << "i,j,r,s,value,error\n";
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (std::size_t j = 0; j < cols_.size(); ++j)
      out << i << ',' << j << ',' << hexfloat(rows_[i]) << ',' << hexfloat(cols_[j]) << ','
          << hexfloat(value(i, j)) << ',' << hexfloat(error(i, j)) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + file.string());
}

KernelTable KernelTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != kTableMagic) throw Error(ErrorCode::IoError, file.string() + ":1: not a kernel table");
  std::getline(in, line);
  KernelTable t;
  std::size_t nr = 0, nc = 0;
  std::string kind, method, key;
  {
    std::istringstream hs(line.substr(std::min<std::size_t>(2, line.size())));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "n") t.n_ = std::stoi(v);
      else if (k == "kind") kind = v;
      else if (k == "method") method = v;
      else if (k == "rows") nr = std::stoul(v);
      else if (k == "cols") nc = std::stoul(v);
      else if (k == "key") key = v;
    }
  }
  const auto kk = kernel_kind_from_string(kind);
  if (!kk) throw Error(ErrorCode::IoError, file.string() + ":2: unknown kernel kind '" + kind + "'");
  t.kind_ = *kk;
  t.quadrature_ = method == "quadrature";
  std::getline(in, line);  // column header
  t.rows_.assign(nr, 0.0);
  t.cols_.assign(nc, 0.0);
  t.values_.assign(nr * nc, 0.0);
  t.errors_.assign(nr * nc, 0.0);
  std::size_t lineno = 3, seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<std::string, 6> tok;
    std::istringstream ls(line);
    for (auto& x : tok)
      if (!std::getline(ls, x, ',')) throw Error(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": short row");
    const std::size_t i = std::stoul(tok[0]), j = std::stoul(tok[1]);
    if (i >= nr || j >= nc) throw Error(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": index out of range");
    t.rows_[i] = parse_double(tok[2], file, lineno);
    t.cols_[j] = parse_double(tok[3], file, lineno);
    t.values_[i * nc + j] = parse_double(tok[4], file, lineno);
    t.errors_[i * nc + j] = parse_double(tok[5], file, lineno);
    ++seen;
  }
  if (seen != nr * nc) throw Error(ErrorCode::IoError, file.string() + ": expected " + std::to_string(nr * nc) + " rows");
  char keybuf[32];
  std::snprintf(keybuf, sizeof keybuf, "%016llx", static_cast<unsigned long long>(t.key()));
  if (key != keybuf) throw Error(ErrorCode::IoError, file.string() + ": key mismatch");
  t.from_cache_ = true;
  return t;
}

KernelTable KernelTable::cached(const std::filesystem::path& dir, int n, KernelKind kind, std::vector<double> rows,
                                std::vector<double> cols, unsigned threads, bool force_quadrature) {
  KernelTable probe;
  probe.n_ = n;
  probe.kind_ = kind;
  probe.quadrature_ = force_quadrature;
  probe.rows_ = rows;
  probe.cols_ = cols;
  const auto file = dir / probe.cache_file_name();
  if (std::filesystem::exists(file)) {
    try {
      KernelTable t = load(file);
      if (t.rows_ == probe.rows_ && t.cols_ == probe.cols_ && t.n_ == n && t.kind_ == kind) return t;
    } catch (const Error&) {
      // Unreadable or stale entries are rebuilt below.
    }
  }
  KernelTable t = build(n, kind, std::move(rows), std::move(cols), threads, force_quadrature);
  std::filesystem::create_directories(dir);
  t.save(file);
  return t;
}

// ---------------------------------------------------------------------------
// Convolutions

TailModel TailModel::from(const Trajectory& traj, const GrowthReport& growth) {
  TailModel m;
  m.cls = growth.cls;
  if (traj.empty() || traj.termination.cause == Termination::Extinct || !growth.survives())
    throw Error(ErrorCode::NonIntegrableTail,
                "tail extrapolation needs a surviving trajectory, got " + std::string(to_string(growth.cls)));
  m.r_end = traj.r_end();
  const State& y = traj.back();
  const int n = traj.spec.n;
  m.u = y.u;
  m.du = y.du;
  m.d2u = y.w - (n - 1) * y.du / m.r_end;
  switch (growth.cls) {
    case GrowthClass::Linear: m.growth = 1.0; break;
    case GrowthClass::Quadratic: m.growth = 2.0; break;
    case GrowthClass::Quartic: m.growth = 4.0; break;
    default: m.growth = m.r_end * m.du / m.u; break;
  }
  return m;
}

double TailModel::operator()(double r) const {
  const double d = r - r_end;
  switch (cls) {
    case GrowthClass::Linear: return u + du * d;
    case GrowthClass::Quadratic: return u + du * d + 0.5 * d2u * d * d;
    default: return alternative(r);
  }
}

double TailModel::alternative(double r) const { return u * std::pow(r / r_end, r_end * du / u); }

namespace {

struct Split {
  double value = 0.0;
  double error = 0.0;
  double tail = 0.0;
};

/// ∫₀^∞ f(s, u(s)) ds: series head, trajectory body, modelled tail.
Split integrate_radial(const Trajectory& traj, const TailModel& tail, const std::function<double(double, double)>& f,
                       double break_at, bool with_tail = true) {
  Split out;
  const double r0 = traj.r_start();
  auto head = [&](double s) { return f(s, series_origin(traj.spec, traj.origin, s).u); };
  out.value += quad::gauss_legendre8(head, 0.0, r0);

  std::array<double, 1> br{break_at};
  const bool use_break = break_at > r0 && break_at < tail.r_end;
  const auto body = integrate_along(
      traj, [&](double s, const State& y) { return f(s, y.u); }, r0, tail.r_end,
      use_break ? std::span<const double>(br) : std::span<const double>());
  out.value += body.value;
  out.error += body.error;

  if (with_tail) {
    auto fm = [&](double s) { return f(s, tail(s)); };
    auto fa = [&](double s) { return f(s, tail.alternative(s)); };
    const auto t1 = quad::gauss_kronrod(fm, tail.r_end, std::numeric_limits<double>::infinity(), 1e-11);
    const auto t2 = quad::gauss_kronrod(fa, tail.r_end, std::numeric_limits<double>::infinity(), 1e-11);
    out.tail = t1.value;
    out.value += t1.value;
    out.error += t1.error + std::abs(t1.value - t2.value);
  }
  return out;
}

void require_integrable(const ProblemSpec& spec, const TailModel& tail, double kernel_growth, const char* what) {
  if (!(spec.q * tail.growth > spec.n + kernel_growth)) {
    std::ostringstream os;
    os << what << ": s^{n-1} s^" << kernel_growth << " u^{-q} is not integrable at infinity (q = " << spec.q
       << ", growth exponent " << tail.growth << ", n = " << spec.n << ")";
    throw Error(ErrorCode::NonIntegrableTail, os.str());
  }
}

}  // namespace

RadialProfile radial_convolution(const Trajectory& traj, const GrowthReport& growth, KernelKind kind,
                                 double coefficient, const std::vector<double>& radii) {
  const TailModel tail = TailModel::from(traj, growth);
  const auto& spec = traj.spec;
  require_integrable(spec, tail, kernel_power(kind), "radial_convolution");
  const int n = spec.n;
  const double scale = coefficient * surface_area(n);

  RadialProfile prof;
  prof.radii = radii;
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radial_convolution: radii must be positive");
    auto f = [&](double s, double u) {
      return std::pow(s, n - 1) * spherical_mean_kernel(n, kind, r, s).value * std::pow(u, -spec.q);
    };
    const Split sp = integrate_radial(traj, tail, f, r);
    const double value = scale * sp.value;
    const double t = scale * sp.tail;
    if (std::abs(t) > 0.05 * std::abs(value)) {
      std::ostringstream os;
      os << "radial_convolution: tail " << t << " exceeds 5% of " << value << " at r = " << r;
      throw Error(ErrorCode::TailDominates, os.str());
    }
    prof.values.push_back(value);
    prof.errors.push_back(std::abs(scale) * sp.error);
    prof.tails.push_back(t);
  }
  return prof;
}

double convolve_density(int n, KernelKind kind, const std::function<double(double)>& f, double support, double r,
                        double rel_tol) {
  auto g = [&](double s) { return std::pow(s, n - 1) * spherical_mean_kernel(n, kind, r, s).value * f(s); };
  std::vector<double> pts{0.0};
  if (r > 0.0 && r < support) pts.push_back(r);
  pts.push_back(support);
  return surface_area(n) * quad::gauss_kronrod_split(g, pts, rel_tol).value;
}

double representation_coefficient(const ProblemSpec& spec) {
  constexpr double pi = std::numbers::pi;
  if (spec.n == 5 && spec.m == 3 && spec.s == Sign::Plus) return 1.0 / (64.0 * pi * pi);
  if (spec.n == 3 && spec.m == 2 && spec.s == Sign::Minus) return 1.0 / (8.0 * pi);
  throw Error(ErrorCode::WrongSpec, "representation formula is available for n=5 tri-harmonic and n=3 bi-harmonic");
}

RepresentationReport extract_gamma(const Trajectory& traj, const GrowthReport& growth) {
  const auto& spec = traj.spec;
  RepresentationReport rep;
  rep.coefficient = representation_coefficient(spec);
  if (growth.cls != GrowthClass::Linear)
    throw Error(ErrorCode::NotApplicable,
                "extract_gamma needs a Linear trajectory, got " + std::string(to_string(growth.cls)));
  const double q_min = spec.n == 5 ? 6.0 : 4.0;
  if (!(spec.q > q_min)) {
    std::ostringstream os;
    os << "representation needs q > " << q_min << ", got " << spec.q;
    throw Error(ErrorCode::NonIntegrableTail, os.str());
  }
  rep.alpha = growth.constant;

  const double r_hi = 0.5 * traj.r_end();
  const double r_lo = std::max(0.1, 10.0 * traj.r_start());
  constexpr std::size_t kRadii = 48;
  for (std::size_t i = 0; i < kRadii; ++i)
    rep.radii.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (kRadii - 1)));

  const RadialProfile k = radial_convolution(traj, growth, KernelKind::Dist, rep.coefficient, rep.radii);
  const std::vector<State> states = resample(traj, rep.radii);
  for (std::size_t i = 0; i < kRadii; ++i) rep.differences.push_back(states[i].u - k.values[i]);

  const std::size_t outer = kRadii - kRadii / 4;
  std::vector<double> tail_diffs(rep.differences.begin() + static_cast<std::ptrdiff_t>(outer), rep.differences.end());
  std::sort(tail_diffs.begin(), tail_diffs.end());
  const std::size_t mid = tail_diffs.size() / 2;
  rep.gamma = tail_diffs.size() % 2 ? tail_diffs[mid] : 0.5 * (tail_diffs[mid - 1] + tail_diffs[mid]);
  std::vector<double> dev;
  double kerr = 0.0;
  for (std::size_t i = outer; i < kRadii; ++i) {
    dev.push_back(std::abs(rep.differences[i] - rep.gamma));
    kerr = std::max(kerr, k.errors[i]);
  }
  std::sort(dev.begin(), dev.end());
  rep.gamma_error = kerr + dev[dev.size() / 2];

  for (std::size_t i = 0; i < kRadii; ++i)
    rep.residual = std::max(rep.residual, std::abs(rep.differences[i] - rep.gamma) / states[i].u);

  const TailModel tail = TailModel::from(traj, growth);
  const double scale = rep.coefficient * surface_area(spec.n);
  const Split mass = integrate_radial(
      traj, tail, [&](double s, double u) { return std::pow(s, spec.n - 1) * std::pow(u, -spec.q); }, 0.0);
  rep.zeta = scale * mass.value;
  rep.zeta_error = scale * mass.error;
  rep.tail_truncation = scale * mass.tail;
  return rep;
}

PohozaevResult pohozaev_check(const Trajectory& traj, const GrowthReport& growth, const RepresentationReport& rep) {
  const auto& spec = traj.spec;
  if (spec.n != 5 || spec.m != 3 || spec.s != Sign::Plus)
    throw Error(ErrorCode::WrongSpec, "pohozaev_check is stated for the 5D tri-harmonic problem");
  if (growth.cls != GrowthClass::Linear)
    throw Error(ErrorCode::NotApplicable, "pohozaev_check needs a Linear trajectory");
  if (!(spec.q > 6.0)) throw Error(ErrorCode::NonIntegrableTail, "pohozaev_check needs q > 6");
  const double q = spec.q;
  const TailModel tail = TailModel::from(traj, growth);
  const double area = surface_area(5);
  const Split i1 = integrate_radial(
      traj, tail, [&](double s, double u) { return s * s * s * s * std::pow(u, 1.0 - q); }, 0.0);
  const Split i0 = integrate_radial(
      traj, tail, [&](double s, double u) { return s * s * s * s * std::pow(u, -q); }, 0.0);

  PohozaevResult out;
  const double coef = (11.0 - q) / (2.0 * (q - 1.0));
  out.coefficient_zero = coef == 0.0;
  out.lhs = coef * area * i1.value;
  out.lhs_error = std::abs(coef) * area * i1.error;
  out.rhs = -0.5 * rep.gamma * area * i0.value;
  out.rhs_error = 0.5 * area * (rep.gamma_error * i0.value + std::abs(rep.gamma) * i0.error);
  const double denom = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.residual = denom > 0.0 ? std::abs(out.lhs - out.rhs) / denom : 0.0;
  return out;
}

double laplacian_chain_defect(int n, const std::vector<double>& radii) {
  auto density = [](double s) {
    const double t = 1.0 - s * s;
    return t > 0.0 ? t * t * t * t * t : 0.0;
  };
  double worst = 0.0;
  for (double r : radii) {
    const double h = 2e-3 * r;
    auto F = [&](double x) { return convolve_density(n, KernelKind::Dist, density, 1.0, x, 1e-14); };
    const double fp = F(r + h), f0 = F(r), fm = F(r - h);
    const double lap = (fp - 2.0 * f0 + fm) / (h * h) + (n - 1) / r * (fp - fm) / (2.0 * h);
    const double g = (n - 1) * convolve_density(n, KernelKind::Newton1, density, 1.0, r, 1e-14);
    worst = std::max(worst, std::abs(lap - g) / std::abs(g));
  }
  return worst;
}

}  // namespace polyrad
