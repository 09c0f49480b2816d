#include "rmtlab/uniformization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmtlab {

namespace {

struct Consts {
  long double a, b, d;
};

Consts consts(const ModelParams& p) {
  const long double a = static_cast<long double>(p.alpha) * p.alpha;
  const long double b = static_cast<long double>(p.beta) * p.beta;
  return {a, b, b - a};
}

// Roots of x (t - a)^2 (t - b)^2 - d^2 t, divided through by x.
std::array<cld, 4> preimage_roots(const Consts& k, cld x) {
  const long double s = k.a + k.b;
  std::vector<cld> c{cld(1), cld(-2 * s), cld(s * s + 2 * k.a * k.b),
                     -(2 * k.a * k.b * s) - k.d * k.d / x, cld(k.a * k.a * k.b * k.b)};
  std::vector<cld> r = polynomial_roots(c);
  return {r[0], r[1], r[2], r[3]};
}

// Newton on x (tau + c - a)^2 (tau + c - b)^2 - d^2 (tau + c) in the offset
// tau = t - c from the anchor c nearest to the seed.
TPoint polish(const Consts& k, cld x, cld seed) {
  const long double anchors[3] = {0.0L, k.a, k.b};
  long double c = 0;
  for (long double an : anchors)
    if (std::abs(seed - an) < std::abs(seed - c)) c = an;
  const long double ca = c - k.a, cb = c - k.b;
  cld tau = seed - c;
  const long double d2 = k.d * k.d;
  for (int it = 0; it < 80; ++it) {
    const cld A = (c == k.a) ? tau : ca + tau;
    const cld B = (c == k.b) ? tau : cb + tau;
    const cld g = x * A * A * B * B - d2 * (tau + c);
    const cld dg = x * (2.0L * A * B * B + 2.0L * A * A * B) - d2;
    if (dg == cld(0)) break;
    const cld step = g / dg;
    tau -= step;
    if (std::abs(step) <= 8 * std::numeric_limits<long double>::epsilon() * std::abs(tau)) break;
  }
  return {tau + c, tau, c};
}

bool on_cut(int sheet, double x, double p, double q) {
  switch (sheet) {
    case 1: return x <= -q;
    case 2: return x <= -q || (0 < x && x <= p);
    case 3: return x <= p;
    case 4: return x <= 0;
  }
  return false;
}

cld conj_l(cld v) { return std::conj(v); }

}  // namespace

cdouble h_of_t(const ModelParams& params, cdouble t) {
  const Consts k = consts(params);
  const cld tt(t);
  return cdouble((tt - k.a) * (tt - k.b) / k.d);
}

cdouble z_of_t(const ModelParams& params, cdouble t) {
  const Consts k = consts(params);
  const cld tt(t);
  if (std::abs(tt - k.a) < 1e-12L || std::abs(tt - k.b) < 1e-12L)
    throw PoleAtInfinitySheet("z_of_t: t at a preimage of infinity");
  const cld u = (tt - k.a) * (tt - k.b);
  return cdouble(tt * k.d * k.d / (u * u));
}

cdouble dz_dt(const ModelParams& params, cdouble t) {
  const Consts k = consts(params);
  const cld tt(t);
  const cld hh = 3.0L * tt * tt - (k.a + k.b) * tt - k.a * k.b;
  const cld u = (tt - k.a) * (tt - k.b);
  return cdouble(-k.d * k.d * hh / (u * u * u));
}

double curve_identity_check(const ModelParams& params, cdouble t) {
  return quartic_residual(params, z_of_t(params, t), h_of_t(params, t));
}

TPoint real_preimage(const ModelParams& params, int sheet, double x, Side side) {
  return RealPreimages(params)(sheet, x, side);
}

RealPreimages::RealPreimages(const ModelParams& params) : params_(validate(params)), ends_(endpoints(params)) {}

TPoint RealPreimages::operator()(int sheet, double x, Side side) const {
  if (sheet < 1 || sheet > 4) throw std::invalid_argument("real_preimage: sheet must be 1..4");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("real_preimage: x must be finite and nonzero");
  const EndpointData& e = ends_;
  const Consts k = consts(params_);
  const bool cut = on_cut(sheet, x, e.p, e.q);
  if (cut && side == Side::none)
    throw std::invalid_argument("real_preimage: x lies on a cut of sheet " + std::to_string(sheet) +
                                "; a side is required");
  // Branch values map to the double roots.
  if (x == e.p && (sheet == 2 || sheet == 3)) return {cld(e.t_plus), cld(e.t_plus), 0.0L};
  if (x == -e.q && (sheet == 1 || sheet == 2)) return {cld(e.t_minus), cld(e.t_minus), 0.0L};

  std::array<cld, 4> r = preimage_roots(k, cld(x));
  auto by_abs_imag = [](const cld& u, const cld& v) { return std::abs(u.imag()) < std::abs(v.imag()); };
  cld pick;
  if (x >= e.p) {
    // Four real preimages, one in each of (0,a), (a,t+), (t+,b), (b,inf).
    for (cld& v : r) v = cld(v.real(), 0);
    std::sort(r.begin(), r.end(), [](const cld& u, const cld& v) { return u.real() < v.real(); });
    pick = r[sheet - 1];
  } else if (x > 0) {
    std::sort(r.begin(), r.end(), by_abs_imag);
    const cld lo = std::min(r[0].real(), r[1].real()), hi = std::max(r[0].real(), r[1].real());
    const cld upper = r[2].imag() > 0 ? r[2] : r[3];
    // On the + side: sheet 2 from the lower half plane, sheet 3 from the upper.
    switch (sheet) {
      case 1: pick = lo; break;
      case 4: pick = hi; break;
      case 2: pick = conj_l(upper); break;
      case 3: pick = upper; break;
    }
  } else if (x > -e.q) {
    std::sort(r.begin(), r.end(), by_abs_imag);
    const cld lo = std::min(r[0].real(), r[1].real()), hi = std::max(r[0].real(), r[1].real());
    const cld upper = r[2].imag() > 0 ? r[2] : r[3];
    switch (sheet) {
      case 1: pick = hi; break;
      case 2: pick = lo; break;
      case 3: pick = upper; break;
      case 4: pick = conj_l(upper); break;
    }
  } else {
    // Two conjugate pairs. The one with smaller Re sqrt(t) carries sheets 1
    // and 2 (near alpha^2), the other sheets 3 and 4 (near beta^2).
    std::array<cld, 2> up;
    int m = 0;
    std::sort(r.begin(), r.end(), [](const cld& u, const cld& v) { return u.imag() > v.imag(); });
    up[m++] = r[0];
    up[m++] = r[1];
    if (std::sqrt(up[0]).real() > std::sqrt(up[1]).real()) std::swap(up[0], up[1]);
    switch (sheet) {
      case 1: pick = up[0]; break;
      case 2: pick = conj_l(up[0]); break;
      case 3: pick = up[1]; break;
      case 4: pick = conj_l(up[1]); break;
    }
  }
  TPoint tp = polish(k, cld(x), pick);
  if (pick.imag() == 0) {
    tp.t = cld(tp.t.real(), 0);
    tp.offset = cld(tp.offset.real(), 0);
  }
  if (side == Side::minus) {
    tp.t = std::conj(tp.t);
    tp.offset = std::conj(tp.offset);
  }
  return tp;
}

cdouble t_of_z(const ModelParams& params, int sheet, cdouble z, Side side) {
  validate(params);
  if (sheet < 1 || sheet > 4) throw std::invalid_argument("t_of_z: sheet must be 1..4");
  if (z.imag() == 0.0) return cdouble(real_preimage(params, sheet, z.real(), side).t);
  const Consts k = consts(params);
  const EndpointData e = endpoints(params);

  auto labelled_from_branches = [&](cdouble w) -> cld {
    BranchSet bs = solve_branches(params, w);
    std::array<cld, 4> r = preimage_roots(k, cld(w));
    const cdouble target = bs.xi[sheet - 1];
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      const double dist = std::abs(h_of_t(params, cdouble(r[j])) - target);
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    return polish(k, cld(w), r[best]).t;
  };

  try {
    return cdouble(labelled_from_branches(z));
  } catch (const NearBranchPoint&) {
  }
  // Near p or -q: label at a point pushed away from the branch point, then
  // follow the straight segment back in the t-plane, where nothing branches.
  const double bp = std::abs(z - e.p) < std::abs(z + e.q) ? e.p : -e.q;
  cdouble dir = z - bp;
  if (std::abs(dir) == 0) dir = cdouble(0, 1);
  dir /= std::abs(dir);
  const double step = 1e-3 * std::max(e.p, e.q);
  const cdouble start = cdouble(bp) + dir * step;
  cld t = labelled_from_branches(start);
  const int nsteps = 32;
  for (int i = 1; i <= nsteps; ++i) {
    const cld w = cld(start) + (cld(z) - cld(start)) * (static_cast<long double>(i) / nsteps);
    t = polish(k, w, t).t;
  }
  const cld zt(z_of_t(params, cdouble(t)));
  if (std::abs(zt - cld(z)) > 1e-8L * std::abs(cld(z)))
    throw NoConvergence("t_of_z: continuation from a regular point did not converge");
  return cdouble(t);
}

std::string to_string(Contour c) {
  switch (c) {
    case Contour::g1plus: return "g1plus";
    case Contour::g1minus: return "g1minus";
    case Contour::g2plus: return "g2plus";
    case Contour::g2minus: return "g2minus";
    case Contour::g3plus: return "g3plus";
    case Contour::g3minus: return "g3minus";
  }
  return "unknown";
}

Contour contour_from_string(const std::string& s) {
  for (Contour c : {Contour::g1plus, Contour::g1minus, Contour::g2plus, Contour::g2minus, Contour::g3plus,
                    Contour::g3minus})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown contour '" + s + "'");
}

namespace {

// Fractions u_0 < ... < u_{n-1} = 1 whose gaps grow by `ratio`. With many
// points the first gap is pinned at 1e-8 and the gaps stop growing at a cap
// chosen so the fractions still end at 1.
std::vector<double> clustered_fractions(int n, double ratio) {
  double g0 = (ratio - 1.0) / (std::pow(ratio, n) - 1.0);
  double cap = 1.0;
  if (g0 < 1e-8) {
    g0 = 1e-8;
    auto total = [&](double c) {
      double s = 0, g = g0;
      for (int i = 0; i < n; ++i) {
        s += std::min(g, c);
        g *= ratio;
      }
      return s;
    };
    double lo = g0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) < 1.0 ? lo : hi) = mid;
    }
    cap = hi;
  }
  std::vector<double> u(n);
  double s = 0, g = g0;
  for (int i = 0; i < n; ++i) {
    s += std::min(g, cap);
    g *= ratio;
    u[i] = std::min(s, 1.0);
  }
  u.back() = 1.0;
  return u;
}

}  // namespace

std::vector<double> contour_grid(const ModelParams& params, Contour which, int npoints) {
  if (npoints < 2) throw std::invalid_argument("contour_grid: need at least 2 points");
  const EndpointData e = endpoints(params);
  const double far = 1e4 * std::max(e.q, 1.0);
  std::vector<double> x(npoints);
  switch (which) {
    case Contour::g2plus:
    case Contour::g2minus: {
      // Clustered at p down to p/2, then log-spaced toward 0+ where t runs
      // off to infinity.
      const int n1 = npoints / 2, n2 = npoints - n1;
      std::vector<double> u1 = clustered_fractions(n1, 1.3);
      for (int i = 0; i < n1; ++i) x[i] = e.p * (1.0 - 0.5 * u1[i]);
      for (int i = 0; i < n2; ++i) x[n1 + i] = 0.5 * e.p * std::pow(2e-6, (i + 1.0) / n2);
      break;
    }
    case Contour::g1plus:
    case Contour::g1minus: {
      const int n1 = npoints / 2, n2 = npoints - n1;
      std::vector<double> u1 = clustered_fractions(n1, 1.3);
      for (int i = 0; i < n1; ++i) x[i] = -e.q * (1.0 + u1[i]);
      for (int i = 0; i < n2; ++i) x[n1 + i] = -2.0 * e.q * std::pow(far / (2.0 * e.q), (i + 1.0) / n2);
      break;
    }
    case Contour::g3plus:
    case Contour::g3minus: {
      // From x = -far (t next to beta^2) toward 0-, log-spaced in |x|.
      const double lo = std::log(1e-6 * std::min(e.q, 1.0)), hi = std::log(far);
      for (int i = 0; i < npoints; ++i) x[i] = -std::exp(hi + (lo - hi) * i / (npoints - 1.0));
      break;
    }
  }
  return x;
}

ContourTrace trace_gamma(const ModelParams& params, Contour which, const std::vector<double>& grid) {
  validate(params);
  const EndpointData e = endpoints(params);
  const Consts k = consts(params);
  const bool upper = which == Contour::g1plus || which == Contour::g2plus || which == Contour::g3plus;
  const bool g3 = which == Contour::g3plus || which == Contour::g3minus;
  const bool g2 = which == Contour::g2plus || which == Contour::g2minus;
  const double sgn = upper ? 1.0 : -1.0;
  ContourTrace out{which, {}};
  out.points.reserve(grid.size());

  // Root of the preimage quartic at x nearest to `from`. Accepted when it is
  // clearly nearer than every other root and on the traced side.
  auto nearest = [&](cld from, double x, cld& t) {
    const std::array<cld, 4> r = preimage_roots(k, cld(x));
    std::array<long double, 4> dist;
    for (int j = 0; j < 4; ++j) dist[j] = std::abs(r[j] - from);
    const int best = static_cast<int>(std::min_element(dist.begin(), dist.end()) - dist.begin());
    long double second = std::numeric_limits<long double>::infinity();
    for (int j = 0; j < 4; ++j)
      if (j != best) second = std::min(second, dist[j]);
    t = r[best];
    return dist[best] < 0.25L * second && t.imag() * sgn > 0;
  };
  // Continuation from (x0, t0) to x1. The root nearest the tangent predictor
  // is taken when it lies within half the predicted move; otherwise the step
  // is bisected.
  auto advance = [&](auto&& self, double x0, cld t0, double x1, int depth) -> cld {
    const cld pred = t0 + cld(x1 - x0) / cld(dz_dt(params, cdouble(t0)));
    cld t;
    if (nearest(pred, x1, t) && std::abs(t - pred) <= 0.5L * std::abs(pred - t0)) return t;
    // Geometric midpoint across decades, where t moves like a power of x.
    const double ratio = x1 / x0;
    const double mid = ratio > 2 || (ratio > 0 && ratio < 0.5) ? std::copysign(std::sqrt(x0 * x1), x0) : 0.5 * (x0 + x1);
    if (depth >= 30 || mid == x0 || mid == x1)
      throw NoConvergence("trace_gamma: continuation step is ambiguous at x = " + std::to_string(x1));
    const cld tm = self(self, x0, t0, mid, depth + 1);
    return self(self, mid, tm, x1, depth + 1);
  };

  double prev_x = 0;
  cld prev = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    bool inside = false;
    switch (which) {
      case Contour::g1plus: case Contour::g1minus: inside = x < -e.q; break;
      case Contour::g2plus: case Contour::g2minus: inside = 0 < x && x < e.p; break;
      case Contour::g3plus: case Contour::g3minus: inside = x < 0; break;
    }
    if (!inside || !std::isfinite(x))
      throw std::invalid_argument("trace_gamma: grid point " + std::to_string(x) + " outside the open interval");
    cld t;
    if (i > 0) {
      t = advance(advance, prev_x, prev, x, 0);
    } else if (g3) {
      nearest(cld(k.b, sgn * std::sqrt(static_cast<double>(k.b) / std::abs(x))), x, t);
    } else {
      const double tc = g2 ? e.t_plus : e.t_minus;
      const double zc = g2 ? e.p : -e.q;
      // z(tc + iy) ~ zc - z''(tc) y^2 / 2 near the critical point. The seed is
      // placed just inside the interval and continued out to x.
      const double hstep = 1e-4 * std::max(1.0, std::abs(tc));
      const double zpp = ((z_of_t(params, tc + hstep) + z_of_t(params, tc - hstep)).real() - 2 * zc) /
                         (hstep * hstep);
      const double d = std::min(std::abs(x - zc), 1e-6 * std::max(1.0, std::abs(zc)));
      const double xs = zc + std::copysign(d, x - zc);
      cld ts;
      nearest(cld(tc, sgn * std::sqrt(2 * std::abs(xs - zc) / std::abs(zpp))), xs, ts);
      t = advance(advance, xs, ts, x, 0);
    }
    t = polish(k, cld(x), t).t;
    if (!(t.imag() * sgn > 0))
      throw SideFlip("trace_gamma: traced point left its half plane at x = " + std::to_string(x));
    const cdouble zt = z_of_t(params, cdouble(t));
    const double res = std::abs(zt - x) / std::max(1.0, std::abs(x));
    if (!(res < 1e-9)) throw NoConvergence("trace_gamma: Newton residual too large at x = " + std::to_string(x));
    out.points.push_back({x, cdouble(t), res});
    prev_x = x;
    prev = t;
  }
  return out;
}

}  // namespace rmtlab
