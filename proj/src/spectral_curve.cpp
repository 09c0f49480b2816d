#include "rmtlab/spectral_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rmtlab/polynomial.hpp"

namespace rmtlab {

namespace {

long double d1_ld(const ModelParams& params, long double x) {
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const long double d = b - a;
  return -27.0L * d * d + 4.0L * x * (a + b) * (a * a - 34.0L * a * b + b * b) +
         16.0L * x * x * a * b * d * d;
}

// Sum of the absolute values of the three terms of D1, for relative residuals.
long double d1_scale(const ModelParams& params, long double x) {
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const long double d = b - a;
  return 27.0L * d * d + std::abs(4.0L * x * (a + b) * (a * a - 34.0L * a * b + b * b)) +
         16.0L * x * x * a * b * d * d;
}

long double z_of_real_t(const ModelParams& params, long double t) {
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const long double d = b - a;
  const long double u = (t - a) * (t - b);
  return t * d * d / (u * u);
}

std::vector<cld> quartic_coeffs(const ModelParams& params, cld z) {
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  return {cld(1), cld(0), -(a + b) / z, (a - b) / (z * z), a * b / (z * z)};
}

using Roots = std::array<cld, 4>;

void newton_polish(const std::vector<cld>& c, Roots& r) {
  for (cld& x : r) {
    for (int it = 0; it < 3; ++it) {
      PolyEval pe = horner(c, x);
      if (pe.derivative == cld(0)) break;
      cld step = pe.value / pe.derivative;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      x -= step;
      if (std::abs(step) <= 4 * std::numeric_limits<long double>::epsilon() * std::abs(x)) break;
    }
  }
}

Roots solve_unlabelled(const ModelParams& params, cld z, const Roots* seeds) {
  auto c = quartic_coeffs(params, z);
  std::vector<cld> s;
  if (seeds) s.assign(seeds->begin(), seeds->end());
  std::vector<cld> v = polynomial_roots(c, s);
  Roots r{v[0], v[1], v[2], v[3]};
  newton_polish(c, r);
  return r;
}

long double min_separation(const Roots& r) {
  long double m = std::numeric_limits<long double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) m = std::min(m, std::abs(r[i] - r[j]));
  return m;
}

// Best matching of `fresh` onto `ref` by total squared distance; returns the
// relabelled roots and the largest single displacement.
Roots match(const Roots& ref, const Roots& fresh, long double& max_move) {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<int, 4> best = perm;
  long double best_cost = std::numeric_limits<long double>::infinity();
  do {
    long double cost = 0;
    for (int k = 0; k < 4; ++k) cost += std::norm(fresh[perm[k]] - ref[k]);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Roots out;
  max_move = 0;
  for (int k = 0; k < 4; ++k) {
    out[k] = fresh[best[k]];
    max_move = std::max(max_move, std::abs(out[k] - ref[k]));
  }
  return out;
}

// Labels from the leading behaviour sqrt(z) xi -> (alpha, -alpha, -beta, beta).
Roots label_at_anchor(const ModelParams& params, cld z, const Roots& r) {
  const cld sz = std::sqrt(z);
  const Roots target{cld(params.alpha) / sz, cld(-params.alpha) / sz, cld(-params.beta) / sz,
                     cld(params.beta) / sz};
  long double unused;
  return match(target, r, unused);
}

// Continue labelled roots along w(s), s in [0, 1].
template <class Path>
Roots continue_along(const ModelParams& params, Path&& w, Roots roots) {
  long double s = 0;
  long double h = 1.0L / 64;
  int guard = 0;
  while (s < 1) {
    if (++guard > 200000) throw NoConvergence("solve_branches: continuation step budget exhausted");
    const long double s_next = std::min<long double>(1, s + h);
    Roots fresh = solve_unlabelled(params, w(s_next), &roots);
    long double move;
    Roots labelled = match(roots, fresh, move);
    const long double sep = min_separation(labelled);
    if (move < 0.3L * sep) {
      roots = labelled;
      s = s_next;
      if (move < 0.05L * sep) h = std::min<long double>(h * 2, 1.0L / 64);
    } else {
      h *= 0.5L;
      if (h < 1e-14L)
        throw NearBranchPoint("solve_branches: continuation path passes too close to a branch point");
    }
  }
  return roots;
}

Roots solve_labelled(const ModelParams& params, cld z) {
  const EndpointData e = endpoints(params);
  const long double big = 1e6L * std::max(1.0, e.p);
  const long double r = std::abs(z);
  const long double th = std::arg(z);
  const long double pi = std::numbers::pi_v<long double>;
  if (r >= big) return label_at_anchor(params, z, solve_unlabelled(params, z, nullptr));

  // Leg 1 runs radially at an angle kept away from the real axis, leg 2 turns
  // along |w| = |z| to the target angle. Neither crosses a cut.
  long double th1 = th;
  if (th != 0) {
    const long double lim = 0.5L;
    if (std::abs(th) < lim) th1 = std::copysign(lim, th);
    if (std::abs(th) > pi - lim) th1 = std::copysign(pi - lim, th);
  }
  const cld anchor = std::polar(big, th1);
  Roots roots = label_at_anchor(params, anchor, solve_unlabelled(params, anchor, nullptr));
  const long double lr0 = std::log(big), lr1 = std::log(r);
  roots = continue_along(
      params, [&](long double s) { return std::polar(std::exp(lr0 + (lr1 - lr0) * s), th1); }, roots);
  if (th1 != th)
    roots = continue_along(params, [&](long double s) { return std::polar(r, th1 + (th - th1) * s); }, roots);
  return roots;
}

}  // namespace

double discriminant_d1(const ModelParams& params, double z) {
  return static_cast<double>(d1_ld(params, z));
}

EndpointData endpoints(const ModelParams& params) {
  validate(params);
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const long double d = b - a;
  // p and -q are the roots of A x^2 + B x + C with A > 0 > C. Take the
  // non-cancelling root from the quadratic formula and the other from the
  // product of the roots.
  const long double A = 16.0L * a * b * d * d;
  const long double B = 4.0L * (a + b) * (a * a - 34.0L * a * b + b * b);
  const long double C = -27.0L * d * d;
  const long double disc = std::sqrt(B * B - 4.0L * A * C);
  long double p, mq;
  if (B >= 0) {
    mq = (-B - disc) / (2.0L * A);
    p = C / (A * mq);
  } else {
    p = (-B + disc) / (2.0L * A);
    mq = C / (A * p);
  }
  const long double s = std::sqrt(a * a + 14.0L * a * b + b * b);
  const long double tp = (a + b + s) / 6.0L;
  const long double tm = -2.0L * a * b / (a + b + s);

  // Closed forms in the coupling constants.
  const long double s3 = s * s * s;
  const long double mix = 33.0L * a * b * (a + b);
  const long double p_closed = (-a * a * a - b * b * b + mix + s3) / (8.0L * a * b * d * d);
  const long double q_closed = (a * a * a + b * b * b - mix + s3) / (8.0L * a * b * d * d);

  EndpointData e;
  e.p = static_cast<double>(p);
  e.q = static_cast<double>(-mq);
  e.t_plus = static_cast<double>(tp);
  e.t_minus = static_cast<double>(tm);
  auto& res = e.residuals;
  res["d1_at_p"] = static_cast<double>(std::abs(d1_ld(params, p)) / d1_scale(params, p));
  res["d1_at_minus_q"] = static_cast<double>(std::abs(d1_ld(params, mq)) / d1_scale(params, mq));
  res["closed_form_p"] = static_cast<double>(std::abs(p_closed - p) / p);
  res["closed_form_q"] = static_cast<double>(std::abs(q_closed + mq) / -mq);
  res["z_at_t_plus"] = static_cast<double>(std::abs(z_of_real_t(params, tp) - p) / p);
  res["z_at_t_minus"] = static_cast<double>(std::abs(z_of_real_t(params, tm) - mq) / -mq);
  for (const auto& [name, value] : res)
    if (!(value <= 1e-10)) throw ConsistencyFailure("endpoint check " + name + " = " + std::to_string(value));
  if (!(e.p > 0 && e.q > 0 && tm < 0 && 0 < a && a < tp && tp < b))
    throw ConsistencyFailure("endpoint ordering t- < 0 < alpha^2 < t+ < beta^2 violated");
  return e;
}

double quartic_residual(const ModelParams& params, cdouble z, cdouble xi) {
  const cld zz(z), x(xi);
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const cld x2 = x * x;
  const cld t0 = x2 * x2;
  const cld t1 = -(a + b) / zz * x2;
  const cld t2 = (a - b) / (zz * zz) * x;
  const cld t3 = a * b / (zz * zz);
  const long double scale = std::max({std::abs(t0), std::abs(t1), std::abs(t2), std::abs(t3)});
  if (scale == 0) return 0.0;
  return static_cast<double>(std::abs(t0 + t1 + t2 + t3) / scale);
}

BranchSet solve_branches(const ModelParams& params, cdouble z, Side side) {
  validate(params);
  if (z == cdouble(0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw NearBranchPoint("solve_branches: z = 0 is a branch point");
  BranchSet out;
  out.z = z;
  Roots roots;
  if (z.imag() == 0.0 && side != Side::none) {
    const double x = z.real();
    const double eps = 1e-8 * (1.0 + std::abs(x));
    const double sgn = side == Side::plus ? 1.0 : -1.0;
    Roots r1 = solve_labelled(params, cld(x, sgn * eps));
    Roots r2 = solve_labelled(params, cld(x, 2 * sgn * eps));
    for (int k = 0; k < 4; ++k) roots[k] = 2.0L * r1[k] - r2[k];
  } else {
    if (z.imag() == 0.0) {
      const EndpointData e = endpoints(params);
      if (z.real() <= e.p)
        throw std::invalid_argument("solve_branches: real z <= p lies on a cut; a side is required");
    }
    roots = solve_labelled(params, cld(z));
  }
  long double scale = 0;
  for (const cld& r : roots) scale = std::max(scale, std::abs(r));
  if (min_separation(roots) < 1e-8L * scale)
    throw NearBranchPoint("solve_branches: roots closer than 1e-8 relative; use the t-parametrisation");
  for (int k = 0; k < 4; ++k) out.xi[k] = cdouble(roots[k]);
  return out;
}

VietaResiduals vieta_residuals(const ModelParams& params, const BranchSet& bs) {
  const long double a = static_cast<long double>(params.alpha) * params.alpha;
  const long double b = static_cast<long double>(params.beta) * params.beta;
  const cld z(bs.z);
  std::array<cld, 4> x;
  for (int k = 0; k < 4; ++k) x[k] = cld(bs.xi[k]);
  cld e1 = 0, e2 = 0, e3 = 0, e4 = x[0] * x[1] * x[2] * x[3];
  for (int i = 0; i < 4; ++i) {
    e1 += x[i];
    for (int j = i + 1; j < 4; ++j) {
      e2 += x[i] * x[j];
      for (int k = j + 1; k < 4; ++k) e3 += x[i] * x[j] * x[k];
    }
  }
  VietaResiduals v;
  v.sum_abs = static_cast<double>(std::abs(e1));
  const cld e2_ref = -(a + b) / z;
  const cld e3_ref = -(a - b) / (z * z);
  const cld e4_ref = a * b / (z * z);
  v.pair_sum_rel = static_cast<double>(std::abs(e2 - e2_ref) / std::abs(e2_ref));
  v.triple_sum_rel = static_cast<double>(std::abs(e3 - e3_ref) / std::abs(e3_ref));
  v.product_rel = static_cast<double>(std::abs(e4 - e4_ref) / std::abs(e4_ref));
  for (int k = 0; k < 4; ++k)
    v.max_quartic_residual = std::max(v.max_quartic_residual, quartic_residual(params, bs.z, bs.xi[k]));
  return v;
}

}  // namespace rmtlab
