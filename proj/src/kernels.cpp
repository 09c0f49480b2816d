#include "rmtlab/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rmtlab/equilibrium.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/special_functions.hpp"

namespace rmtlab {

namespace {

using ld = long double;
using MatrixLd = Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic>;

int i_order(const ModelParams& p, int j) { return p.kappa + j - 1; }
int k_order(const ModelParams& p, int k) { return p.nu - p.kappa + k - 1; }

bool same_model(const ModelParams& a, const ModelParams& b) {
  return a.alpha == b.alpha && a.beta == b.beta && a.kappa == b.kappa && a.nu == b.nu && a.n == b.n;
}

}  // namespace

std::string to_string(KernelRoute r) { return r == KernelRoute::finite_n ? "finite_n" : "hard_edge_limit"; }

double phi(const ModelParams& params, int j, double x) {
  validate(params);
  if (!(x > 0)) throw std::invalid_argument("phi: x must be positive");
  const int a = i_order(params, j);
  return std::pow(x, 0.5 * a) * bessel_i(a, 2 * params.alpha * std::sqrt(x));
}

double psi(const ModelParams& params, int k, double x) {
  validate(params);
  if (!(x > 0)) throw std::invalid_argument("psi: x must be positive");
  const int b = k_order(params, k);
  return std::pow(x, 0.5 * b) * bessel_k(b, 2 * params.beta * std::sqrt(x));
}

double gram_entry(const ModelParams& params, int j, int k) {
  validate(params);
  if (j < 1 || k < 1) throw std::invalid_argument("gram_entry: indices start at 1");
  const int a = i_order(params, j), b = k_order(params, k);
  const int power = params.nu + j + k - 1;
  const double gap = 2 * (params.beta - params.alpha);
  // With x = t^2 the integrand is 2 t^(nu+j+k-1) I_a(2 alpha t) K_b(2 beta t),
  // written with scaled Bessel functions and the net e^(-2(beta-alpha)t).
  auto f = [&](double t) {
    // Below this the integrand is O(t^(2j+2kappa-1)) and the scaled K_b
    // alone could leave the double range.
    if (t < 1e-12) return 0.0;
    const double e = power * std::log(t) - gap * t;
    if (e < -745) return 0.0;
    const double ia = bessel_i_scaled(a, 2 * params.alpha * t);
    const double kb = bessel_k_scaled(b, 2 * params.beta * t);
    return 2 * std::exp(e) * ia * kb;
  };
  const double L = (params.nu + j + k + 1) / gap;
  quad::Options opt;
  opt.abs_tol = 0;
  opt.rel_tol = 1e-13;
  opt.throw_on_failure = false;
  const quad::Result head = quad::adaptive(f, 0.0, L, opt);
  const quad::Result tail = quad::tail_mapped(f, L, +1, L, 2, opt);
  const double v = head.value + tail.value;
  if (!(std::isfinite(v) && v > 0))
    throw QuadratureFailure("gram_entry: non-positive or non-finite entry (" + std::to_string(j) + ", " +
                            std::to_string(k) + ")");
  if (head.error + tail.error > 1e-12 * v)
    throw QuadratureFailure("gram_entry: error estimate " + std::to_string(head.error + tail.error) +
                            " too large for entry (" + std::to_string(j) + ", " + std::to_string(k) + ")");
  return v;
}

GramMatrix gram_matrix(const ModelParams& params) {
  validate(params);
  const int n = params.n;
  if (n > kMaxGramSize)
    throw IllConditioned("gram_matrix: n = " + std::to_string(n) + " exceeds the conditioning budget of " +
                         std::to_string(kMaxGramSize));
  GramMatrix g;
  g.params = params;
  g.n = n;
  g.entries.resize(n * n);
  MatrixLd m(n, n);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k) {
      g.entries[(j - 1) * n + (k - 1)] = gram_entry(params, j, k);
      m(j - 1, k - 1) = g.entries[(j - 1) * n + (k - 1)];
    }
  MatrixLd s = m;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) s(j, k) /= std::sqrt(m(j, j) * m(k, k));
  Eigen::JacobiSVD<MatrixLd> svd(s);
  const auto& sv = svd.singularValues();
  g.condition_estimate = static_cast<double>(sv(0) / sv(n - 1));
  if (!(g.condition_estimate <= kMaxGramCondition)) {
    std::ostringstream os;
    os << "gram_matrix: condition estimate " << g.condition_estimate << " exceeds " << kMaxGramCondition;
    throw IllConditioned(os.str());
  }
  const MatrixLd inv = m.fullPivLu().inverse();
  g.inverse.resize(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) g.inverse[j * n + k] = inv(j, k);
  return g;
}

KernelEval finite_n_kernel(const ModelParams& params, const GramMatrix& gram, double x, double y) {
  validate(params);
  if (!same_model(params, gram.params)) throw std::invalid_argument("finite_n_kernel: Gram matrix built for other parameters");
  if (!(x > 0 && y > 0)) throw std::invalid_argument("finite_n_kernel: x and y must be positive");
  const int n = params.n;
  const ld sx = std::sqrt(static_cast<ld>(x)), sy = std::sqrt(static_cast<ld>(y));
  // Scaled basis values; the exponentials are applied once at the end.
  std::vector<ld> ph(n), ps(n);
  for (int j = 1; j <= n; ++j) {
    const int a = i_order(params, j), b = k_order(params, j);
    ph[j - 1] = std::pow(static_cast<ld>(x), 0.5L * a) * bessel_i_scaled(a, static_cast<double>(2 * params.alpha * sx));
    ps[j - 1] = std::pow(static_cast<ld>(y), 0.5L * b) * bessel_k_scaled(b, static_cast<double>(2 * params.beta * sy));
  }
  ld sum = 0;
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k) sum += ph[j - 1] * gram.inv(k, j) * ps[k - 1];
  const ld v = sum * std::exp(2 * params.alpha * sx - 2 * params.beta * sy);
  KernelEval e;
  e.x = x;
  e.y = y;
  e.value = static_cast<double>(v);
  e.route = KernelRoute::finite_n;
  if (!std::isfinite(e.value)) throw Overflow("finite_n_kernel: value out of range");
  return e;
}

HardEdgeValue hard_edge_kernel(int nu1, int nu2, double x, double y) {
  if (nu1 < 0 || nu2 < 0) throw std::invalid_argument("hard_edge_kernel: nu1, nu2 must be nonnegative");
  if (!(x > 0 && y > 0)) throw std::invalid_argument("hard_edge_kernel: x and y must be positive");
  const MeijerSpec s1{1, {0.0, -static_cast<double>(nu1), -static_cast<double>(nu2)}};
  const MeijerSpec s2{2, {static_cast<double>(nu1), static_cast<double>(nu2), 0.0}};
  constexpr double kUmin = 1e-15;
  // Below this argument the m = 1 residue series loses nothing to
  // cancellation worth counting; above it the contour takes over.
  constexpr double kSeriesMax = 50.0;
  const MeijerContour g2(s2, kUmin * y, y);
  std::unique_ptr<MeijerContour> g1c;
  if (x > kSeriesMax) g1c = std::make_unique<MeijerContour>(s1, kSeriesMax, x);
  auto g1 = [&](double z) { return z <= kSeriesMax ? meijer_g03_series(s1, z) : (*g1c)(z).value; };
  auto f = [&](double u) { return g1(u * x) * g2(u * y).value; };

  auto gauss = [&](int n) {
    const quad::Rule r = quad::gauss_legendre(n);
    double s = 0;
    for (int i = 0; i < n; ++i) {
      const double w = r.x[i];
      s += r.w[i] * 3 * w * w * f(w * w * w);
    }
    return s;
  };
  HardEdgeValue hv;
  const double g64 = gauss(64);
  hv.value = gauss(128);
  hv.gauss_doubling = std::abs(hv.value - g64);

  // u = 1/(1 + exp(-pi sinh s)) clusters nodes at both ends; the trapezoid
  // rule in s converges geometrically.
  auto trap = [&](double h) {
    double s = 0;
    for (int k = -static_cast<int>(4.0 / h); k <= static_cast<int>(4.0 / h); ++k) {
      const double t = k * h;
      const double e = std::exp(-std::numbers::pi * std::sinh(t));
      const double u = 1 / (1 + e);
      if (u < kUmin) continue;
      const double du = std::numbers::pi * std::cosh(t) * e / ((1 + e) * (1 + e));
      if (du == 0) continue;
      s += du * f(u);
    }
    return s * h;
  };
  double h = 0.25, prev = trap(h);
  for (int it = 0; it < 6; ++it) {
    h /= 2;
    const double cur = trap(h);
    const bool done = std::abs(cur - prev) <= 1e-11 * std::abs(cur);
    prev = cur;
    if (done) break;
  }
  hv.trapezoid = prev;
  const double scale = std::abs(hv.value);
  if (hv.gauss_doubling > 1e-7 * scale || std::abs(hv.trapezoid - hv.value) > 1e-7 * scale) {
    std::ostringstream os;
    os << "hard_edge_kernel: quadratures disagree (gauss " << hv.value << ", half-node gauss " << g64
       << ", trapezoid " << hv.trapezoid << ")";
    throw QuadratureFailure(os.str());
  }
  return hv;
}

std::vector<GlobalRow> check_global_limit(const ModelParams& params, const std::vector<double>& grid) {
  validate(params);
  const GramMatrix g = gram_matrix(params);
  const Equilibrium eq(params);
  const double n = params.n;
  std::vector<GlobalRow> rows;
  for (double x : grid) {
    if (!(x > 0 && x < eq.ends().p)) throw std::invalid_argument("check_global_limit: grid points must lie in (0, p)");
    GlobalRow r;
    r.x = x;
    r.scaled = n * finite_n_kernel(params, g, n * n * x, n * n * x).value;
    r.density = eq.density(Measure::mu2, x);
    r.deviation = std::abs(r.scaled - r.density);
    rows.push_back(r);
  }
  return rows;
}

std::vector<HardEdgeRow> check_hard_edge(const ModelParams& params, const std::vector<std::pair<double, double>>& pairs) {
  validate(params);
  const GramMatrix g = gram_matrix(params);
  const double s = params.n * params.d();
  const double kh = 0.5 * params.kappa;
  std::vector<HardEdgeRow> rows;
  for (const auto& [x, y] : pairs) {
    if (!(x > 0 && y > 0)) throw std::invalid_argument("check_hard_edge: points must be positive");
    HardEdgeRow r;
    r.x = x;
    r.y = y;
    r.scaled = std::pow(x / y, kh) * finite_n_kernel(params, g, y / s, x / s).value / s;
    r.limit = std::pow(y / x, kh) * hard_edge_kernel(params.nu, params.kappa, y, x).value;
    r.deviation = std::abs(r.scaled - r.limit);
    rows.push_back(r);
  }
  return rows;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace rmtlab
