#pragma once

#include <array>
#include <complex>
#include <map>
#include <string>

#include "rmtlab/model.hpp"

namespace rmtlab {

using cdouble = std::complex<double>;

// Which one-sided limit to take on a real cut.
enum class Side { none, plus, minus };

// Right end p of supp(mu2) = [0, p], left end -q of the saturated region
// (-q, 0) of mu1, and the real critical points t+ > 0 > t- of the rational
// parametrisation.
struct EndpointData {
  double p = 0.0;
  double q = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;
  std::map<std::string, double> residuals;
};

// D1(z) = -27 d^2 + 4 z (a + b)(a^2 - 34 a b + b^2) + 16 z^2 a b d^2 with
// a = alpha^2, b = beta^2, d = b - a. Its two real roots are p and -q.
double discriminant_d1(const ModelParams& params, double z);

// Throws ConsistencyFailure if any internal cross-check is out of bounds.
EndpointData endpoints(const ModelParams& params);

// The four solutions of
//   xi^4 - (a + b)/z xi^2 + (a - b)/z^2 xi + a b/z^2 = 0
// labelled by sheet: near infinity xi1 ~ alpha/sqrt(z), xi2 ~ -alpha/sqrt(z),
// xi3 ~ -beta/sqrt(z), xi4 ~ beta/sqrt(z).
struct BranchSet {
  cdouble z;
  std::array<cdouble, 4> xi;
};

// Sheet-labelled roots at z, by continuation from a large-|z| anchor.
// For real z lying on a cut of some sheet a side must be given; the result
// is then the boundary value from that side. Throws NearBranchPoint when two
// roots nearly coincide.
BranchSet solve_branches(const ModelParams& params, cdouble z, Side side = Side::none);

// |quartic(z, xi)| divided by the largest term magnitude.
double quartic_residual(const ModelParams& params, cdouble z, cdouble xi);

struct VietaResiduals {
  double sum_abs = 0.0;           // |xi1 + xi2 + xi3 + xi4|
  double pair_sum_rel = 0.0;      // sum_{j<k} xi_j xi_k against -(a + b)/z
  double triple_sum_rel = 0.0;    // sum_{j<k<l} xi_j xi_k xi_l against -(a - b)/z^2
  double product_rel = 0.0;       // xi1 xi2 xi3 xi4 against a b / z^2
  double max_quartic_residual = 0.0;
};
VietaResiduals vieta_residuals(const ModelParams& params, const BranchSet& bs);

}  // namespace rmtlab
