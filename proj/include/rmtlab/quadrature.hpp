#pragma once

// Adaptive Gauss-Kronrod integration (21-point Kronrod, embedded 10-point
// Gauss) with power and tail substitutions for endpoint singularities.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmtlab/errors.hpp"

namespace rmtlab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

struct Options {
  double abs_tol = 1e-15;
  double rel_tol = 1e-13;
  int max_panels = 4000;
  // When false, an unmet tolerance is reported through Result::error
  // instead of throwing QuadratureFailure.
  bool throw_on_failure = true;
};

namespace detail {

inline constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for xgk[1], xgk[3], ..., xgk[9].
inline constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error;
};

}  // namespace detail

// Single 21-point panel. `gauss` is the embedded 10-point estimate.
struct PanelResult {
  double kronrod;
  double gauss;
  double abs_kronrod;
  double error;
};

template <class F>
PanelResult gk21(F&& f, double a, double b) {
  using namespace detail;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * wgk[10];
  double rg = 0.0;
  double rabs = std::abs(rk);
  double fv[21];
  fv[10] = fc;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * xgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    fv[j] = f1;
    fv[20 - j] = f2;
    rk += wgk[j] * (f1 + f2);
    rabs += wgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) rg += wg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * rk;
  double asc = wgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) asc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[20 - j] - mean));
  PanelResult r;
  r.kronrod = rk * h;
  r.gauss = rg * h;
  r.abs_kronrod = rabs * std::abs(h);
  asc *= std::abs(h);
  double err = std::abs(r.kronrod - r.gauss);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (r.abs_kronrod > std::numeric_limits<double>::min() / (50 * eps))
    err = std::max(50 * eps * r.abs_kronrod, err);
  r.error = err;
  return r;
}

// Globally adaptive bisection on [a, b].
template <class F>
Result adaptive(F&& f, double a, double b, const Options& opt = {}) {
  using detail::Panel;
  Result out;
  if (a == b) return out;
  std::vector<Panel> heap;
  auto cmp = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  auto push = [&](double lo, double hi) {
    PanelResult r = gk21(f, lo, hi);
    out.evaluations += 21;
    heap.push_back({lo, hi, r.kronrod, r.error});
    std::push_heap(heap.begin(), heap.end(), cmp);
  };
  push(a, b);
  double total = heap.front().value;
  double err = heap.front().error;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) break;
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      // Cannot split further; keep it and stop refining.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), cmp);
      break;
    }
    push(worst.a, mid);
    push(mid, worst.b);
    total = 0.0;
    err = 0.0;
    for (const Panel& p : heap) {
      total += p.value;
      err += p.error;
    }
  }
  out.value = total;
  out.error = err;
  if (!std::isfinite(total))
    throw QuadratureFailure("non-finite integrand on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  // Panels that cannot be split any further leave a small residual; only a
  // clear miss is treated as a failure.
  if (opt.throw_on_failure && err > 100.0 * std::max(opt.abs_tol, opt.rel_tol * std::abs(total)))
    throw QuadratureFailure("tolerance not met on [" + std::to_string(a) + ", " + std::to_string(b) +
                            "], error estimate " + std::to_string(err));
  return out;
}

// Integral of f over the segment from `anchor` to `other` using
// y = anchor + (other - anchor) s^m, which removes a |y - anchor|^(k/m - 1)
// type singularity at the anchor.
template <class F>
Result power_mapped(F&& f, double anchor, double other, int m, const Options& opt = {}) {
  const double len = other - anchor;
  auto g = [&](double s) {
    const double sm1 = std::pow(s, m - 1);
    return f(anchor + len * sm1 * s) * m * sm1 * std::abs(len);
  };
  return adaptive(g, 0.0, 1.0, opt);
}

// Integral of f from `start` out to +infinity (direction > 0) or -infinity
// (direction < 0) with y = start + direction * scale * (w^-m - 1).
// m = 2 turns |y|^(-3/2) decay into a bounded integrand.
template <class F>
Result tail_mapped(F&& f, double start, int direction, double scale, int m = 2, const Options& opt = {}) {
  auto g = [&](double w) {
    const double wm = std::pow(w, -m);
    const double y = start + direction * scale * (wm - 1.0);
    // Deep in the tail a vanishing integrand times an overflowing Jacobian
    // would give 0 * inf.
    if (!std::isfinite(y)) return 0.0;
    const double fy = f(y);
    return fy == 0.0 ? 0.0 : fy * m * scale * wm / w;
  };
  return adaptive(g, 0.0, 1.0, opt);
}

// n-point Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on
// P_n from the Chebyshev-like initial guesses.
struct Rule {
  std::vector<double> x, w;
};

inline Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(3.141592653589793238L * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const long double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-19L) break;
    }
    const long double w = 1 / ((1 - z * z) * dp * dp);
    r.x[i] = static_cast<double>((1 - z) / 2);
    r.x[n - 1 - i] = static_cast<double>((1 + z) / 2);
    r.w[i] = r.w[n - 1 - i] = static_cast<double>(w);
  }
  return r;
}

inline Result operator+(Result x, const Result& y) {
  x.value += y.value;
  x.error += y.error;
  x.evaluations += y.evaluations;
  return x;
}

}  // namespace rmtlab::quad
