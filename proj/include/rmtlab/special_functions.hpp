#pragma once

#include <array>
#include <complex>
#include <vector>

namespace rmtlab {

// Modified Bessel functions of integer order. bessel_i throws Overflow when
// the value leaves the double range; bessel_k throws Underflow when it drops
// below the smallest normal double.
double bessel_i(int order, double x);
double bessel_k(int order, double x);

// e^-x I_n(x) and e^x K_n(x); finite for every x > 0.
double bessel_i_scaled(int order, double x);
double bessel_k_scaled(int order, double x);

// y1(z) = z^((a+1)/2) I_(a+1)(2 sqrt z), y2(z) = z^((a+1)/2) K_(a+1)(2 sqrt z)
// with y1' = z^(a/2) I_a(2 sqrt z) and y2' = -z^(a/2) K_a(2 sqrt z).
struct BesselPair {
  double y1, y1p, y2, y2p;
};
BesselPair bessel_pair(int a, double z);

// |y1 y2' - y1' y2 + z^a/2| / (z^a/2).
double wronskian_residual(int a, double z);

// log Gamma continued analytically from the positive axis, cut along the
// negative real axis. PoleHit at 0, -1, -2, ...
std::complex<double> log_gamma_complex(std::complex<double> s);

// G^{m,0}_{0,3}(-; b1, b2, b3 | zeta).
struct MeijerSpec {
  int m = 1;
  std::array<double, 3> b{0.0, 0.0, 0.0};
};

struct MeijerOptions {
  // Shift of the contour to the right of its default position.
  double contour_offset = 0.0;
  double tol = 1e-12;
};

struct MeijerValue {
  double value = 0.0;
  double error = 0.0;
  int nodes = 0;
};

// Mellin-Barnes integral. m = 2, 3 on the vertical line Re u = c; m = 1 on a
// left-opening parabola through c, since on a vertical line the integrand
// grows like e^(pi |Im u| / 2). Throws ContourQuadratureDivergence when the
// integrand does not decay along the contour.
MeijerValue meijer_g03(const MeijerSpec& spec, double zeta, const MeijerOptions& opt = {});

// Node table of the same contour integral for all zeta in [zeta_min,
// zeta_max]. The Gamma factors do not depend on zeta, so each evaluation is
// one weighted sum of exponentials.
class MeijerContour {
 public:
  MeijerContour(const MeijerSpec& spec, double zeta_min, double zeta_max, const MeijerOptions& opt = {});
  MeijerValue operator()(double zeta) const;
  int nodes() const { return static_cast<int>(u_.size()); }

 private:
  MeijerSpec spec_;
  double zeta_min_, zeta_max_;
  long double h_ = 0;
  double rel_diff_ = 0;
  std::vector<std::complex<long double>> u_, log_a_;
};

// Residue series, m = 1 only:
//   zeta^b1 sum_k (-zeta)^k / (k! Gamma(1 + b1 - b2 + k) Gamma(1 + b1 - b3 + k)).
double meijer_g03_series(const MeijerSpec& spec, double zeta);

}  // namespace rmtlab
