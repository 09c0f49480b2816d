#include "rmtlab/special_functions.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/errors.hpp"

namespace rmtlab {

namespace {

using ld = long double;
using cld = std::complex<long double>;

constexpr ld kEulerGamma = 0.577215664901532860606512090082402431L;
constexpr ld kPiL = 3.141592653589793238462643383279502884L;

void check_args(const char* fn, int order, double x) {
  if (order < 0) throw std::invalid_argument(std::string(fn) + ": order must be nonnegative");
  if (!(x > 0) || !std::isfinite(x)) throw std::invalid_argument(std::string(fn) + ": x must be positive and finite");
}

// e^-x I_n(x) from the ascending series, summed in long double so the
// unscaled partial sums stay in range up to x ~ 1e4.
ld i_scaled_series(int n, ld x) {
  const ld y = x * x / 4;
  ld term = 1, sum = 1;
  for (int k = 1; k < 100000; ++k) {
    term *= y / (static_cast<ld>(k) * (n + k));
    sum += term;
    if (term < 1e-21L * sum && k > x) break;
  }
  return sum * std::exp(n * std::log(x / 2) - std::lgamma(static_cast<ld>(n) + 1) - x);
}

// Large-argument expansion of e^-x I_n(x); used only where the correction
// terms are tiny from the first one on.
ld i_scaled_asymptotic(int n, ld x) {
  const ld mu = 4.0L * n * n;
  ld term = 1, sum = 1;
  for (int k = 1; k < 60; ++k) {
    const ld next = -term * (mu - (2 * k - 1) * (2 * k - 1)) / (k * 8 * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-21L * std::abs(sum)) break;
  }
  return sum / std::sqrt(2 * kPiL * x);
}

// Same series for x beyond the long double range of e^x: terms are summed
// relative to the largest one, at k* with k*(n + k*) ~ x^2/4, walking out in
// both directions.
ld i_scaled_series_peak(int n, ld x) {
  const ld y = x * x / 4;
  const long kp = std::lround((-n + std::sqrt(static_cast<ld>(n) * n + 4 * y)) / 2);
  ld sum = 1, term = 1;
  for (long k = kp + 1;; ++k) {
    term *= y / (static_cast<ld>(k) * (n + k));
    sum += term;
    if (term < 1e-21L * sum) break;
  }
  term = 1;
  for (long k = kp; k > 0; --k) {
    term *= static_cast<ld>(k) * (n + k) / y;
    sum += term;
    if (term < 1e-21L * sum) break;
  }
  const ld log_peak = kp * std::log(y) - std::lgamma(static_cast<ld>(kp) + 1) - std::lgamma(static_cast<ld>(n + kp) + 1);
  return sum * std::exp(log_peak + n * std::log(x / 2) - x);
}

ld i_scaled(int n, ld x) {
  if (x > 1e4L && x > 100.0L * n * n) return i_scaled_asymptotic(n, x);
  if (x > 1e4L) return i_scaled_series_peak(n, x);
  return i_scaled_series(n, x);
}

// e^x K_0(x), e^x K_1(x).
void k01_scaled(ld x, ld& k0, ld& k1) {
  if (x <= 2) {
    // K_0 = -(ln(x/2) + gamma) I_0 + sum H_k (x^2/4)^k / k!^2
    // K_1 = 1/x + ln(x/2) I_1 - (x/4) sum (psi(k+1) + psi(k+2)) (x^2/4)^k / (k!(k+1)!)
    const ld y = x * x / 4, lg = std::log(x / 2);
    ld t0 = 1, i0 = 1, s0 = 0, h = 0;
    ld t1 = 1, i1 = 1, s1 = -2 * kEulerGamma + 1;  // psi(1) + psi(2)
    for (int k = 1; k < 200; ++k) {
      h += 1.0L / k;
      t0 *= y / (static_cast<ld>(k) * k);
      i0 += t0;
      s0 += h * t0;
      t1 *= y / (static_cast<ld>(k) * (k + 1));
      i1 += t1;
      s1 += (2 * (h - kEulerGamma) + 1.0L / (k + 1)) * t1;
      if (t0 < 1e-22L && t1 < 1e-22L) break;
    }
    k0 = (-(lg + kEulerGamma) * i0 + s0) * std::exp(x);
    k1 = (1 / x + lg * (x / 2) * i1 - (x / 4) * s1) * std::exp(x);
    return;
  }
  // Steed's method on Temme's second continued fraction.
  const ld eps = 1e-20L;
  const ld a1 = 0.25L;
  ld b = 2 * (1 + x), d = 1 / b, h = d, delh = d;
  ld q1 = 0, q2 = 1, q = a1, c = a1, a = -a1, s = 1 + q * delh;
  for (int i = 2; i < 100000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const ld qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2;
    d = 1 / (b + a * d);
    delh = (b * d - 1) * delh;
    h += delh;
    const ld dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h *= a1;
  k0 = std::sqrt(kPiL / (2 * x)) / s;
  k1 = k0 * (x + 0.5L - h) / x;
}

ld k_scaled(int n, ld x) {
  ld km, k;
  k01_scaled(x, km, k);
  if (n == 0) return km;
  for (int j = 1; j < n; ++j) {
    const ld kp = km + (2 * j / x) * k;
    km = k;
    k = kp;
  }
  return k;
}

double to_double_checked(ld v, const char* fn, double x) {
  if (!(std::abs(v) <= DBL_MAX)) throw Overflow(std::string(fn) + " overflows at x = " + std::to_string(x));
  if (v != 0 && std::abs(v) < DBL_MIN) throw Underflow(std::string(fn) + " underflows at x = " + std::to_string(x));
  return static_cast<double>(v);
}

// Stirling series for log Gamma(w), Re w >= 15.
cld stirling(cld w) {
  static const ld bern[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30, 5.0L / 66, -691.0L / 2730, 7.0L / 6, -3617.0L / 510,
                            43867.0L / 798, -174611.0L / 330};
  cld v = (w - 0.5L) * std::log(w) - w + 0.5L * std::log(2 * kPiL);
  const cld w2 = 1.0L / (w * w);
  cld pw = 1.0L / w;
  for (int k = 1; k <= 10; ++k) {
    v += bern[k - 1] / (2.0L * k * (2 * k - 1)) * pw;
    pw *= w2;
  }
  return v;
}

cld log_gamma_ld(cld s) {
  if (s.imag() == 0 && s.real() <= 0 && s.real() == std::floor(s.real()))
    throw PoleHit("log_gamma_complex: pole at s = " + std::to_string(static_cast<double>(s.real())));
  cld shift = 0;
  cld w = s;
  while (w.real() < 15) {
    shift += std::log(w);
    w += 1.0L;
  }
  return stirling(w) - shift;
}

// 1/Gamma(x) for real x, zero at the poles.
ld rgamma(ld x) {
  if (x <= 0 && x == std::floor(x)) return 0;
  return std::exp(-log_gamma_ld(cld(x))).real();
}

void check_spec(const MeijerSpec& spec, double zeta) {
  if (spec.m < 1 || spec.m > 3) throw std::invalid_argument("meijer_g03: m must be 1, 2 or 3");
  for (double b : spec.b)
    if (!std::isfinite(b)) throw std::invalid_argument("meijer_g03: parameters must be finite");
  if (!(zeta > 0) || !std::isfinite(zeta)) throw std::invalid_argument("meijer_g03: zeta must be positive");
}

// log of prod_{j<=m} Gamma(b_j + u) / prod_{j>m} Gamma(1 - b_j - u) zeta^-u.
// A denominator pole makes the integrand vanish.
bool log_integrand(const MeijerSpec& spec, ld log_zeta, cld u, cld& out) {
  cld v = -u * log_zeta;
  for (int j = 0; j < 3; ++j) {
    if (j < spec.m) {
      v += log_gamma_ld(cld(spec.b[j]) + u);
    } else {
      const cld s = cld(1.0L - spec.b[j]) - u;
      if (s.imag() == 0 && s.real() <= 0 && s.real() == std::floor(s.real())) return false;
      v -= log_gamma_ld(s);
    }
  }
  out = v;
  return true;
}

}  // namespace

double bessel_i(int order, double x) {
  check_args("bessel_i", order, x);
  const ld s = i_scaled(order, x);
  // Stay in long double until the final range check.
  return to_double_checked(s * std::exp(static_cast<ld>(x)), "bessel_i", x);
}

double bessel_i_scaled(int order, double x) {
  check_args("bessel_i_scaled", order, x);
  return static_cast<double>(i_scaled(order, x));
}

double bessel_k(int order, double x) {
  check_args("bessel_k", order, x);
  return to_double_checked(k_scaled(order, x) * std::exp(-static_cast<ld>(x)), "bessel_k", x);
}

double bessel_k_scaled(int order, double x) {
  check_args("bessel_k_scaled", order, x);
  return to_double_checked(k_scaled(order, x), "bessel_k_scaled", x);
}

BesselPair bessel_pair(int a, double z) {
  if (a < 0) throw std::invalid_argument("bessel_pair: a must be nonnegative");
  if (!(z > 0)) throw std::invalid_argument("bessel_pair: z must be positive");
  const ld r = std::sqrt(static_cast<ld>(z)), x = 2 * r;
  const ld pa = std::pow(static_cast<ld>(z), a / 2.0L), pa1 = pa * r;
  const ld ei = std::exp(x), ek = std::exp(-x);
  BesselPair bp;
  bp.y1 = to_double_checked(pa1 * i_scaled(a + 1, x) * ei, "bessel_pair", z);
  bp.y1p = to_double_checked(pa * i_scaled(a, x) * ei, "bessel_pair", z);
  bp.y2 = to_double_checked(pa1 * k_scaled(a + 1, x) * ek, "bessel_pair", z);
  bp.y2p = to_double_checked(-pa * k_scaled(a, x) * ek, "bessel_pair", z);
  return bp;
}

double wronskian_residual(int a, double z) {
  if (a < 0) throw std::invalid_argument("wronskian_residual: a must be nonnegative");
  if (!(z > 0)) throw std::invalid_argument("wronskian_residual: z must be positive");
  // With the exponentials cancelled: W = -z^(a+1/2) (I_(a+1) K_a + I_a K_(a+1))(2 sqrt z).
  const ld x = 2 * std::sqrt(static_cast<ld>(z));
  const ld w = x * (i_scaled(a + 1, x) * k_scaled(a, x) + i_scaled(a, x) * k_scaled(a + 1, x));
  return static_cast<double>(std::abs(w - 1));
}

std::complex<double> log_gamma_complex(std::complex<double> s) {
  if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
    throw std::invalid_argument("log_gamma_complex: argument must be finite");
  const cld v = log_gamma_ld(cld(s.real(), s.imag()));
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

double meijer_g03_series(const MeijerSpec& spec, double zeta) {
  check_spec(spec, zeta);
  if (spec.m != 1) throw std::invalid_argument("meijer_g03_series: only m = 1 has a log-free residue series");
  const ld b1 = spec.b[0], A = 1 + b1 - spec.b[1], B = 1 + b1 - spec.b[2];
  const ld lz = std::log(static_cast<ld>(zeta));
  ld sum = 0, prev = INFINITY;
  for (int k = 0; k < 10000; ++k) {
    const ld g = rgamma(A + k) * rgamma(B + k);
    const ld mag = std::exp(k * lz - std::lgamma(static_cast<ld>(k) + 1));
    const ld term = (k % 2 ? -1 : 1) * mag * g;
    sum += term;
    // Stop once the terms are decreasing and negligible.
    if (k > 2 && std::abs(term) < 1e-20L * std::abs(sum) && std::abs(term) <= prev) break;
    prev = std::abs(term);
  }
  return static_cast<double>(sum * std::exp(b1 * lz));
}

MeijerContour::MeijerContour(const MeijerSpec& spec, double zeta_min, double zeta_max, const MeijerOptions& opt)
    : spec_(spec), zeta_min_(zeta_min), zeta_max_(zeta_max) {
  check_spec(spec, zeta_min);
  check_spec(spec, zeta_max);
  if (zeta_min > zeta_max) throw std::invalid_argument("MeijerContour: empty zeta range");
  double min_b = spec.b[0];
  for (int j = 0; j < spec.m; ++j) min_b = std::min(min_b, spec.b[j]);
  const ld c = 1 + std::max(0.0, -min_b) + opt.contour_offset;
  // On the parabola the modulus of zeta^-u varies along the contour, so its
  // width follows the largest zeta.
  const bool parabola = spec.m == 1;
  const ld mu = 0.25L / (1 + std::cbrt(static_cast<ld>(zeta_max)));
  auto node = [&](ld t, cld& u, cld& la) {
    u = parabola ? cld(c - mu * t * t, t) : cld(c, t);
    const cld du = parabola ? cld(-2 * mu * t, 1) : cld(0, 1);
    if (!log_integrand(spec, 0, u, la)) return false;
    la += std::log(du / cld(0, 1));
    return true;
  };
  std::vector<ld> probes{std::log(static_cast<ld>(zeta_min))};
  if (zeta_max > zeta_min) {
    probes.push_back(0.5L * (probes[0] + std::log(static_cast<ld>(zeta_max))));
    probes.push_back(std::log(static_cast<ld>(zeta_max)));
  }
  auto term = [](const cld& u, const cld& la, ld lz) {
    const cld e = la - u * lz;
    return e.real() < -11000 ? 0.0L : std::exp(e).real();
  };
  auto mag = [&](ld t) {
    cld u, la;
    if (!node(t, u, la)) return 0.0L;
    ld m = 0;
    for (ld lz : probes) m = std::max(m, std::abs(std::exp(la - u * lz)));
    return m;
  };
  // Truncation: start from 40 + 10 log(1 + zeta) and extend until the
  // integrand is negligible relative to its running maximum.
  ld T = 40 + 10 * std::log1p(static_cast<ld>(zeta_max));
  ld peak = 0;
  ld scanned = 0;
  auto scan = [&] {
    for (ld t = scanned; t <= T; t += 0.25L) peak = std::max(peak, mag(t));
    scanned = T;
  };
  scan();
  int grow = 0;
  while (!(mag(T) <= 1e-18L * peak && mag(T + 0.5L) <= 1e-18L * peak)) {
    if (++grow > 12)
      throw ContourQuadratureDivergence("meijer_g03: integrand does not decay along the contour (m = " +
                                        std::to_string(spec.m) + ", |f(" + std::to_string(static_cast<double>(T)) +
                                        ")| = " + std::to_string(static_cast<double>(mag(T))) + ")");
    T *= 1.5L;
    scan();
  }
  // Trapezoid rule with halving, checked at the probe arguments. For an
  // analytic integrand the error squares at each halving until rounding.
  h_ = 0.5L;
  int n = static_cast<int>(std::ceil(T / h_));
  auto add_node = [&](ld t, ld w) {
    cld u, la;
    if (!node(t, u, la)) return;
    u_.push_back(u);
    log_a_.push_back(la + std::log(w));
  };
  add_node(0, 0.5L);
  for (int k = 1; k <= n; ++k) add_node(k * h_, 1);
  auto sums = [&](std::vector<ld>& s, std::vector<ld>& l1) {
    s.assign(probes.size(), 0);
    l1.assign(probes.size(), 0);
    for (std::size_t i = 0; i < u_.size(); ++i)
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const ld v = term(u_[i], log_a_[i], probes[p]);
        s[p] += v;
        l1[p] += std::abs(v);
      }
  };
  std::vector<ld> prev, l1, cur;
  sums(prev, l1);
  for (auto& v : prev) v *= h_;
  const ld eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 12; ++it) {
    for (int k = 0; k < n; ++k) add_node((k + 0.5L) * h_, 1);
    h_ /= 2;
    n *= 2;
    sums(cur, l1);
    bool done = it >= 1;
    rel_diff_ = 0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      cur[p] *= h_;
      const ld diff = std::abs(cur[p] - prev[p]);
      rel_diff_ = std::max(rel_diff_, static_cast<double>(diff / (l1[p] * h_)));
      if (diff > std::max(static_cast<ld>(opt.tol) * std::abs(cur[p]), 64 * eps * l1[p] * h_)) done = false;
    }
    prev = cur;
    if (done) break;
  }
}

MeijerValue MeijerContour::operator()(double zeta) const {
  if (!(zeta >= zeta_min_ * (1 - 1e-12) && zeta <= zeta_max_ * (1 + 1e-12)))
    throw std::out_of_range("MeijerContour: zeta outside the range the nodes were built for");
  const ld lz = std::log(static_cast<ld>(zeta));
  ld s = 0, l1 = 0;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    const cld e = log_a_[i] - u_[i] * lz;
    if (e.real() < -11000) continue;
    const ld v = std::exp(e).real();
    s += v;
    l1 += std::abs(v);
  }
  MeijerValue mv;
  mv.value = static_cast<double>(s * h_ / kPiL);
  mv.error = static_cast<double>((rel_diff_ + 64 * std::numeric_limits<double>::epsilon()) * l1 * h_ / kPiL);
  mv.nodes = static_cast<int>(u_.size());
  return mv;
}

MeijerValue meijer_g03(const MeijerSpec& spec, double zeta, const MeijerOptions& opt) {
  return MeijerContour(spec, zeta, zeta, opt)(zeta);
}

}  // namespace rmtlab
