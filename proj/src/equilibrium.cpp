#include "rmtlab/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rmtlab/quadrature.hpp"

namespace rmtlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

// A stretch of support with the substitution power to use at each end
// (1 = regular end). An infinite lower end is handled by a tail map.
struct Seg {
  double lo, hi;
  int mlo, mhi;
};

// One mapped piece: either y = anchor + (other - anchor) s^m on s in [0,1],
// or the tail y = start - scale (w^-2 - 1) on w in (0, 1].
struct Piece {
  bool tail;
  double anchor, other;
  int m;
  double y(double s) const {
    if (tail) return anchor - other * (1.0 / (s * s) - 1.0);
    return anchor + (other - anchor) * std::pow(s, m);
  }
  double jac(double s) const {
    if (tail) return 2.0 * other / (s * s * s);
    return m * std::pow(s, m - 1) * std::abs(other - anchor);
  }
};

std::vector<Seg> support_segments(Measure m, const EndpointData& e) {
  switch (m) {
    case Measure::mu2: return {{0.0, e.p, 6, 2}};
    case Measure::mu3: return {{-kInf, 0.0, 1, 6}};
    case Measure::mu1: return {{-kInf, -e.q, 1, 2}, {-e.q, 0.0, 1, 2}};
    case Measure::sigma: return {{-kInf, 0.0, 1, 2}};
    case Measure::sigma_minus_mu1: return {{-kInf, -e.q, 1, 2}};
  }
  return {};
}

std::vector<Seg> clip(std::vector<Seg> segs, double lo, double hi) {
  std::vector<Seg> out;
  for (Seg s : segs) {
    if (lo > s.lo) {
      s.lo = lo;
      s.mlo = 1;
    }
    if (hi < s.hi) {
      s.hi = hi;
      s.mhi = 1;
    }
    if (s.lo < s.hi) out.push_back(s);
  }
  return out;
}

std::vector<Seg> split_at(std::vector<Seg> segs, double x) {
  std::vector<Seg> out;
  for (const Seg& s : segs) {
    if (s.lo < x && x < s.hi) {
      out.push_back({s.lo, x, s.mlo, 2});
      out.push_back({x, s.hi, 2, s.mhi});
    } else {
      if (s.lo == x) {
        Seg t = s;
        t.mlo = std::max(t.mlo, 2);
        out.push_back(t);
      } else if (s.hi == x) {
        Seg t = s;
        t.mhi = std::max(t.mhi, 2);
        out.push_back(t);
      } else {
        out.push_back(s);
      }
    }
  }
  return out;
}

std::vector<Piece> pieces_of(const std::vector<Seg>& segs, double scale) {
  std::vector<Piece> out;
  for (const Seg& s : segs) {
    if (std::isinf(s.lo)) {
      const double len = std::max(scale, std::abs(s.hi));
      out.push_back({false, s.hi, s.hi - len, s.mhi});
      out.push_back({true, s.hi - len, len, 2});
    } else {
      const double mid = 0.5 * (s.lo + s.hi);
      out.push_back({false, s.lo, mid, s.mlo});
      out.push_back({false, s.hi, mid, s.mhi});
    }
  }
  return out;
}

double clamp_density(double v) { return v < 0 && v > -1e-12 ? 0.0 : v; }

}  // namespace

std::string to_string(Measure m) {
  switch (m) {
    case Measure::mu1: return "mu1";
    case Measure::mu2: return "mu2";
    case Measure::mu3: return "mu3";
    case Measure::sigma: return "sigma";
    case Measure::sigma_minus_mu1: return "sigma_minus_mu1";
  }
  return "unknown";
}

Measure measure_from_string(const std::string& s) {
  for (Measure m : {Measure::mu1, Measure::mu2, Measure::mu3, Measure::sigma, Measure::sigma_minus_mu1})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown measure '" + s + "'");
}

double density_sigma(const ModelParams& params, double x) {
  if (!(x < 0)) throw OutsideSupport("sigma lives on (-inf, 0); got x = " + std::to_string(x));
  return params.alpha / (kPi * std::sqrt(-x));
}

double balayage_point_density(double c, double z, double x) {
  if (!(z > -c) || !(x <= -c)) throw std::invalid_argument("balayage_point_density needs z > -c >= x");
  return std::sqrt(z + c) / (kPi * std::sqrt(std::abs(x + c)) * (z - x));
}

Equilibrium::Equilibrium(const ModelParams& params)
    : pre_(params), tail_start_(25.0 * std::max(pre_.ends().p, pre_.ends().q)) {
  tail1_ = build_tail(1);
  tail4_ = build_tail(4);
}

long double Equilibrium::TailSeries::value_re(long double s) const {
  const long double s2 = s * s;
  long double acc = 0;
  for (auto it = even.rbegin(); it != even.rend(); ++it) acc = acc * s2 + *it;
  return acc * s2;
}

Equilibrium::TailSeries Equilibrium::build_tail(int sheet) const {
  // sqrt(t) = r + eta with r = alpha (sheet 1) or beta (sheet 4) solves
  //   eta (2r + eta)((r + eta)^2 - other) = i sgn d s (r + eta),
  // the square root of the preimage equation, which is regular at s = 0.
  constexpr int K = 30;
  const ModelParams& prm = params();
  const long double r = sheet == 1 ? prm.alpha : prm.beta;
  const long double other = sheet == 1 ? static_cast<long double>(prm.beta) * prm.beta
                                       : static_cast<long double>(prm.alpha) * prm.alpha;
  const long double d = static_cast<long double>(prm.beta) * prm.beta - static_cast<long double>(prm.alpha) * prm.alpha;
  using Ser = std::array<cld, K + 1>;
  auto mul = [](const Ser& u, const Ser& v) {
    Ser w{};
    for (int i = 0; i <= K; ++i)
      for (int j = 0; i + j <= K; ++j) w[i + j] += u[i] * v[j];
    return w;
  };
  auto coefficients = [&](long double sgn) {
    Ser c{};
    const long double lin = 2 * r * (r * r - other);
    for (int k = 1; k <= K; ++k) {
      Ser two_r_eta = c, r_eta = c;
      two_r_eta[0] += 2 * r;
      r_eta[0] += r;
      Ser b = mul(r_eta, r_eta);
      b[0] -= other;
      Ser g = mul(mul(c, two_r_eta), b);
      // Order k of the right-hand side comes from (r + eta) at order k-1.
      g[k] -= cld(0, sgn * d) * r_eta[k - 1];
      c[k] = -g[k] / lin;
    }
    return c;
  };
  // Pick the sign that reproduces the boundary value from the + side.
  const double x0 = -tail_start_;
  const long double s0 = 1.0L / std::sqrt(-(long double)x0);
  const cld root_t = std::sqrt(pre_(sheet, x0, Side::plus).t) - r;
  TailSeries best;
  long double best_err = std::numeric_limits<long double>::infinity();
  for (long double sgn : {1.0L, -1.0L}) {
    Ser c = coefficients(sgn);
    cld eta = 0;
    for (int k = K; k >= 1; --k) eta = (eta + c[k]) * s0;
    const long double err = std::abs(eta - root_t);
    if (err < best_err) {
      best_err = err;
      best.even.clear();
      for (int k = 2; k <= K; k += 2) best.even.push_back(c[k].real());
    }
  }
  if (!(best_err < 1e-12L * std::abs(root_t)))
    throw ConsistencyFailure("tail expansion does not match the preimage at x = " + std::to_string(x0));
  return best;
}

double Equilibrium::density(Measure m, double x) const {
  const EndpointData& e = ends();
  const ModelParams& prm = params();
  auto outside = [&](const char* where) {
    std::ostringstream os;
    os << to_string(m) << " has support " << where << "; got x = " << x;
    throw OutsideSupport(os.str());
  };
  if (!std::isfinite(x)) outside("bounded away from infinity");
  const long double alpha = prm.alpha, beta = prm.beta;
  switch (m) {
    case Measure::sigma:
      return density_sigma(prm, x);
    case Measure::mu2: {
      if (!(x > 0 && x <= e.p)) outside("(0, p]");
      if (x == e.p) return 0.0;
      const TPoint tp = pre_(2, x, Side::plus);
      const long double a = alpha * alpha, b = beta * beta;
      // Im((t - a)(t - b))/d = Im t (2 Re t - a - b)/d.
      const long double v = tp.t.imag() * (2 * tp.t.real() - a - b) / (b - a);
      return clamp_density(static_cast<double>(v / std::numbers::pi_v<long double>));
    }
    case Measure::sigma_minus_mu1: {
      if (!(x < 0)) outside("(-inf, -q]");
      if (x >= -e.q) return 0.0;
      if (x < -tail_start_) {
        const long double sx = 1.0L / std::sqrt(-(long double)x);
        return static_cast<double>((prm.alpha + tail1_.value_re(sx)) * sx / std::numbers::pi_v<long double>);
      }
      const TPoint tp = pre_(1, x, Side::plus);
      const long double v = std::sqrt(tp.t).real() / (std::numbers::pi_v<long double> * std::sqrt(-(long double)x));
      return clamp_density(static_cast<double>(v));
    }
    case Measure::mu1: {
      if (!(x < 0)) outside("(-inf, 0)");
      if (x >= -e.q) return density_sigma(prm, x);
      if (x < -tail_start_) {
        const long double sx = 1.0L / std::sqrt(-(long double)x);
        return clamp_density(static_cast<double>(-tail1_.value_re(sx) * sx / std::numbers::pi_v<long double>));
      }
      const TPoint tp = pre_(1, x, Side::plus);
      const cld a_minus_t = tp.anchor == alpha * alpha ? -tp.offset : cld(alpha * alpha) - tp.t;
      const long double v = (a_minus_t / (alpha + std::sqrt(tp.t))).real() /
                            (std::numbers::pi_v<long double> * std::sqrt(-(long double)x));
      return clamp_density(static_cast<double>(v));
    }
    case Measure::mu3: {
      if (!(x < 0)) outside("(-inf, 0)");
      if (x < -tail_start_) {
        const long double sx = 1.0L / std::sqrt(-(long double)x);
        return clamp_density(static_cast<double>(tail4_.value_re(sx) * sx / std::numbers::pi_v<long double>));
      }
      const TPoint tp = pre_(4, x, Side::plus);
      const cld t_minus_b = tp.anchor == beta * beta ? tp.offset : tp.t - cld(beta * beta);
      const long double v = (t_minus_b / (std::sqrt(tp.t) + beta)).real() /
                            (std::numbers::pi_v<long double> * std::sqrt(-(long double)x));
      return clamp_density(static_cast<double>(v));
    }
  }
  return 0.0;
}

double Equilibrium::integrate(Measure m, const std::function<double(double)>& g, const std::vector<double>& log_points,
                              double lo, double hi, double rel_tol) const {
  const EndpointData& e = ends();
  std::vector<Seg> segs = clip(support_segments(m, e), lo, hi);
  for (double x : log_points) segs = split_at(segs, x);
  quad::Options opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-15;
  opt.max_panels = 2000;
  double total = 0.0;
  for (const Piece& pc : pieces_of(segs, std::max(e.p, e.q))) {
    auto f = [&](double s) {
      const double y = pc.y(s);
      if (pc.tail && std::isinf(y)) return 0.0;
      const double w = pc.jac(s);
      if (w == 0.0) return 0.0;
      return g(y) * density(m, y) * w;
    };
    // Absolute tolerance relative to the whole integral is unknown up
    // front; judge each piece on its own scale.
    total += quad::adaptive(f, 0.0, 1.0, opt).value;
  }
  return total;
}

double Equilibrium::mass(Measure m) const {
  if (m == Measure::sigma || m == Measure::sigma_minus_mu1)
    throw std::domain_error(to_string(m) + " has infinite mass");
  return integrate(m, [](double) { return 1.0; });
}

double Equilibrium::mass_on(Measure m, double lo, double hi) const {
  return integrate(m, [](double) { return 1.0; }, {}, lo, hi);
}

double Equilibrium::log_potential(Measure m, double x) const {
  if (m == Measure::sigma || m == Measure::sigma_minus_mu1)
    throw std::domain_error("logarithmic potential of " + to_string(m) + " diverges");
  // The mapped node can round onto x itself; that single point carries no mass.
  return integrate(m, [x](double y) { return y == x ? 0.0 : -std::log(std::abs(x - y)); }, {x});
}

DensityTable Equilibrium::quadrature_table(Measure m, int panels) const {
  if (m == Measure::sigma || m == Measure::sigma_minus_mu1)
    throw std::domain_error(to_string(m) + " has infinite mass; no full-support quadrature table");
  const EndpointData& e = ends();
  DensityTable tab;
  tab.params = params();
  tab.measure = m;
  tab.quadrature_nodes = true;
  const double h = 1.0 / panels;
  for (const Piece& pc : pieces_of(support_segments(m, e), std::max(e.p, e.q))) {
    for (int k = 0; k < panels; ++k) {
      const double c = (k + 0.5) * h, half = 0.5 * h;
      for (int j = 0; j < 21; ++j) {
        const double node = j < 10 ? -quad::detail::xgk[j] : (j == 10 ? 0.0 : quad::detail::xgk[20 - j]);
        const int idx = j <= 10 ? j : 20 - j;
        const double s = c + half * node;
        const double wk = quad::detail::wgk[idx] * half;
        const double wg = (idx % 2 == 1) ? quad::detail::wg[idx / 2] * half : 0.0;
        const double y = pc.y(s);
        const double jac = pc.jac(s);
        tab.rows.push_back({y, density(m, y), wk * jac, wg * jac});
      }
    }
  }
  std::sort(tab.rows.begin(), tab.rows.end(), [](const DensityRow& u, const DensityRow& v) { return u.x < v.x; });
  tab.exponent_fits = exponent_fits(m);
  return tab;
}

double Equilibrium::fit_exponent(Measure m, double edge, int direction, double lo, double hi) const {
  const int n = 12;
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double delta = lo * std::pow(hi / lo, i / (n - 1.0));
    const double lx = std::log(delta);
    const double ly = std::log(density(m, edge + direction * delta));
    // Heavier weight on the points closest to the edge, where the leading
    // power dominates the correction terms.
    const double w = std::cbrt(lo / delta);
    sw += w;
    sx += w * lx;
    sy += w * ly;
    sxx += w * lx * lx;
    sxy += w * lx * ly;
  }
  return (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
}

std::map<std::string, double> Equilibrium::exponent_fits(Measure m) const {
  const EndpointData& e = ends();
  std::map<std::string, double> fits;
  // Near 0 the preimage on the meeting sheets is t ~ (d^2/x)^(1/3); the
  // cube-root expansion only dominates once x is well below d^2/b^3, which
  // can be far smaller than p when alpha and beta are close.
  const ModelParams& P = params();
  const double x0 = std::min(e.p, P.d() * P.d() / (P.b() * P.b() * P.b()));
  switch (m) {
    case Measure::mu2:
      fits["near_zero"] = fit_exponent(m, 0.0, +1, 1e-9 * x0, 1e-6 * x0);
      fits["near_finite_endpoint"] = fit_exponent(m, e.p, -1, 1e-7 * e.p, 1e-4 * e.p);
      break;
    case Measure::mu3:
      // The leading correction here is relative |x|^(1/6), not |x|^(1/3), so
      // the window has to sit much closer to 0 than for mu2.
      fits["near_zero"] = fit_exponent(m, 0.0, -1, 1e-18 * x0, 1e-15 * x0);
      break;
    case Measure::sigma_minus_mu1:
      fits["near_finite_endpoint"] = fit_exponent(m, -e.q, -1, 1e-7 * e.q, 1e-4 * e.q);
      break;
    case Measure::mu1:
    case Measure::sigma:
      fits["near_zero"] = fit_exponent(m, 0.0, -1, 1e-9 * e.q, 1e-6 * e.q);
      break;
  }
  return fits;
}

DensityTable Equilibrium::tabulate(Measure m, int npoints) const {
  if (npoints < 2) throw std::invalid_argument("tabulate: need at least 2 points");
  const EndpointData& e = ends();
  const double far = 1e4 * std::max(e.q, 1.0);
  DensityTable tab;
  tab.params = params();
  tab.measure = m;
  std::vector<double> xs(npoints);
  for (int i = 0; i < npoints; ++i) {
    const double u = (i + 0.5) / npoints;
    switch (m) {
      case Measure::mu2:
        xs[i] = 0.5 * e.p * (1.0 - std::cos(kPi * u));
        break;
      case Measure::sigma_minus_mu1:
        xs[i] = -e.q - (far - e.q) * u * u;
        break;
      default:
        // Log-spaced in |x| from 1e-8 far out to far.
        xs[i] = -far * std::pow(1e-8, 1.0 - u);
        break;
    }
  }
  std::sort(xs.begin(), xs.end());
  for (double x : xs) tab.rows.push_back({x, density(m, x), 0.0, 0.0});
  tab.exponent_fits = exponent_fits(m);
  return tab;
}

double density(const ModelParams& params, Measure m, double x) { return Equilibrium(params).density(m, x); }

double density_mu3_balayage(const ModelParams& params, double x, const DensityTable& mu2_table) {
  if (!(x < 0)) throw OutsideSupport("balayage density of mu3 needs x < 0");
  if (mu2_table.measure != Measure::mu2 || !mu2_table.quadrature_nodes)
    throw std::invalid_argument("density_mu3_balayage needs a mu2 quadrature table");
  (void)params;
  double sk = 0, sg = 0;
  for (const DensityRow& r : mu2_table.rows) {
    const double f = std::sqrt(r.x) / (r.x - x) * r.density;
    sk += r.weight * f;
    sg += r.weight_gauss * f;
  }
  if (std::abs(sk - sg) > 1e-6 * std::abs(sk))
    throw QuadratureFailure("balayage integral: Kronrod and Gauss sums disagree at x = " + std::to_string(x));
  return sk / (2 * kPi * std::sqrt(-x));
}

double mass(const DensityTable& table, const ModelParams& params) {
  (void)params;
  if (!table.quadrature_nodes) throw std::invalid_argument("mass needs a table of integration nodes");
  double sk = 0, sg = 0;
  for (const DensityRow& r : table.rows) {
    sk += r.weight * r.density;
    sg += r.weight_gauss * r.density;
  }
  if (std::abs(sk - sg) > 1e-8 * std::abs(sk))
    throw QuadratureFailure("mass: Kronrod and Gauss sums disagree (" + std::to_string(sk) + " vs " +
                            std::to_string(sg) + ")");
  return sk;
}

double log_potential(const DensityTable& table, double x) {
  Equilibrium eq(table.params);
  const EndpointData& e = eq.ends();
  bool off_support = false;
  const double gap = 0.05 * std::max(e.p, e.q);
  switch (table.measure) {
    case Measure::mu2: off_support = x < -gap || x > e.p + gap; break;
    case Measure::mu1:
    case Measure::mu3: off_support = x > gap; break;
    default: break;
  }
  if (table.quadrature_nodes && off_support) {
    double s = 0;
    for (const DensityRow& r : table.rows) s -= r.weight * r.density * std::log(std::abs(x - r.x));
    return s;
  }
  return eq.log_potential(table.measure, x);
}

VariationalReport variational_report(const ModelParams& params) {
  Equilibrium eq(params);
  const EndpointData& e = eq.ends();
  const double c = 2 * (params.beta - params.alpha);
  auto U = [&](Measure m, double x) { return eq.log_potential(m, x); };
  auto F = [&](double x) {
    return 2 * U(Measure::mu2, x) - U(Measure::mu1, x) - U(Measure::mu3, x) + c * std::sqrt(x);
  };
  VariationalReport rep;
  double lo = kInf, hi = -kInf, sum = 0;
  for (int i = 1; i <= 30; ++i) {
    const double x = e.p * i / 31.0;
    const double f = F(x);
    rep.support_values.push_back({x, f});
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    sum += f;
  }
  rep.ell = sum / 30;
  rep.spread_on_support = hi - lo;
  std::ostringstream v;
  if (!(rep.spread_on_support < 1e-4 * std::abs(rep.ell))) {
    v << "effective potential not constant on (0, p): spread " << rep.spread_on_support;
    rep.violations.push_back(v.str());
  }
  for (int i = 1; i <= 10; ++i) {
    const double x = e.p * (1.0 + 4.0 * i / 11.0);
    const double margin = F(x) - rep.ell;
    rep.inequality_margins.push_back({x, margin});
    if (!(margin > 0)) {
      std::ostringstream os;
      os << "effective potential inequality fails at x = " << x << " (margin " << margin << ")";
      rep.violations.push_back(os.str());
    }
  }
  for (int i = 1; i <= 10; ++i) {
    const double x = -e.q * i / 11.0;
    const double margin = U(Measure::mu2, x) - 2 * U(Measure::mu1, x);
    rep.inequality_margins.push_back({x, margin});
    if (!(margin > 0)) {
      std::ostringstream os;
      os << "2U(mu1) - U(mu2) < 0 fails at x = " << x << " (value " << -margin << ")";
      rep.violations.push_back(os.str());
    }
  }
  for (int i = 1; i <= 10; ++i) {
    const double x = -10 * e.q * i / 11.0;
    const double r = 2 * U(Measure::mu3, x) - U(Measure::mu2, x);
    rep.mu3_equality_residuals.push_back({x, r});
    if (!(std::abs(r) < 1e-4)) {
      std::ostringstream os;
      os << "2U(mu3) - U(mu2) = 0 fails at x = " << x << " (value " << r << ")";
      rep.violations.push_back(os.str());
    }
  }
  return rep;
}

VariationalReport verify_variational(const ModelParams& params) {
  VariationalReport rep = variational_report(params);
  if (!rep.violations.empty()) throw ViolationDetected(rep.violations.front());
  return rep;
}

}  // namespace rmtlab
