#include "rmtlab/polynomial.hpp"

#include <cmath>
#include <limits>

#include "rmtlab/errors.hpp"

namespace rmtlab {

PolyEval horner(const std::vector<cld>& c, cld z) {
  cld v = c[0];
  cld dv = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    dv = dv * z + v;
    v = v * z + c[i];
  }
  return {v, dv};
}

std::vector<cld> polynomial_roots(const std::vector<cld>& c, const std::vector<cld>& seeds) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1 || c[0] == cld(0)) throw NoConvergence("polynomial_roots: degenerate leading coefficient");
  std::vector<cld> z(n);
  if (static_cast<int>(seeds.size()) == n) {
    z = seeds;
    // Coincident seeds stall the Aberth correction; nudge them apart.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (z[i] == z[j]) z[i] *= cld(1.0L + 1e-6L, 1e-6L);
  } else {
    // Start on a circle whose radius is the geometric mean root modulus.
    long double r = std::pow(std::abs(c[n] / c[0]), 1.0L / n);
    if (!(r > 0) || !std::isfinite(r)) r = 1.0L;
    for (int k = 0; k < n; ++k) {
      const long double th = 2.0L * 3.14159265358979323846L * k / n + 0.4L;
      z[k] = std::polar(r, th);
    }
  }
  const long double eps = std::numeric_limits<long double>::epsilon();
  // Rounding-level bound on |p(z)| from Horner's rule.
  auto noise = [&](cld zk) {
    const long double r = std::abs(zk);
    long double scale = 0, pw = 1;
    for (int i = n; i >= 0; --i) {
      scale += std::abs(c[i]) * pw;
      pw *= r;
    }
    return eps * scale;
  };
  // A root is frozen once its residual is at rounding level or its step is
  // negligible; clustered roots reach the first long before the second.
  std::vector<char> done(n, 0);
  for (int iter = 0; iter < 500; ++iter) {
    int open = 0;
    for (int k = 0; k < n; ++k) {
      if (done[k]) continue;
      PolyEval pe = horner(c, z[k]);
      if (std::abs(pe.value) <= 4 * noise(z[k])) {
        done[k] = 1;
        continue;
      }
      cld ratio = pe.value / pe.derivative;
      cld s = 0;
      for (int j = 0; j < n; ++j)
        if (j != k) s += 1.0L / (z[k] - z[j]);
      cld w = ratio / (1.0L - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
      z[k] -= w;
      if (std::abs(w) <= 16 * eps * std::abs(z[k])) done[k] = 1;
      else ++open;
    }
    if (open == 0) break;
  }
  for (int k = 0; k < n; ++k)
    if (std::abs(horner(c, z[k]).value) > 1e3L * noise(z[k]))
      throw NoConvergence("polynomial_roots: Aberth iteration did not converge");
  return z;
}

}  // namespace rmtlab
