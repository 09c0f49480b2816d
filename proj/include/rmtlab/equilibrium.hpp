#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rmtlab/uniformization.hpp"

namespace rmtlab {

// mu1 and mu3 live on (-inf, 0] with masses 1/2, mu2 on [0, p] with mass 1.
// sigma is the upper constraint alpha/(pi sqrt|x|) dx on (-inf, 0).
enum class Measure { mu1, mu2, mu3, sigma, sigma_minus_mu1 };

std::string to_string(Measure m);
Measure measure_from_string(const std::string& s);

struct DensityRow {
  double x = 0.0;
  double density = 0.0;
  // Quadrature weights when the rows are integration nodes, zero otherwise.
  double weight = 0.0;
  double weight_gauss = 0.0;
};

struct DensityTable {
  ModelParams params;
  Measure measure = Measure::mu2;
  std::vector<DensityRow> rows;
  std::map<std::string, double> exponent_fits;
  bool quadrature_nodes = false;
};

struct VariationalReport {
  double ell = 0.0;
  double spread_on_support = 0.0;
  std::vector<std::pair<double, double>> support_values;       // (x, F(x)) on (0, p)
  std::vector<std::pair<double, double>> inequality_margins;   // x > p and x in (-q, 0)
  std::vector<std::pair<double, double>> mu3_equality_residuals;  // (x, 2U3 - U2) on (-10q, 0)
  std::vector<std::string> violations;
};

double density_sigma(const ModelParams& params, double x);

// Point density d(balayage of delta_z onto (-inf, -c])/dx.
double balayage_point_density(double c, double z, double x);

// Densities, integrals and potentials of the vector equilibrium measure.
// Densities come from boundary values of h at real preimages:
//   dmu2/dx      = Im h(t)/pi,                     t on sheet 2, + side
//   d(s-mu1)/dx  = Re sqrt(t)/(pi sqrt|x|),        t on sheet 1, + side
//   dmu3/dx      = Re((t - b)/(sqrt t + beta))/(pi sqrt|x|), t on sheet 4, + side
// with the offsets t - a, t - b taken from the anchored Newton solve so the
// far tails keep full relative accuracy.
class Equilibrium {
 public:
  explicit Equilibrium(const ModelParams& params);

  const ModelParams& params() const { return pre_.params(); }
  const EndpointData& ends() const { return pre_.ends(); }

  // Throws OutsideSupport off the closed support.
  double density(Measure m, double x) const;

  // Integral of g against the measure over its support intersected with
  // [lo, hi]. `log_points` are points where g has an integrable singularity.
  double integrate(Measure m, const std::function<double(double)>& g, const std::vector<double>& log_points = {},
                   double lo = -std::numeric_limits<double>::infinity(),
                   double hi = std::numeric_limits<double>::infinity(), double rel_tol = 1e-12) const;

  // Total mass; std::domain_error for the infinite measures sigma and
  // sigma - mu1.
  double mass(Measure m) const;
  double mass_on(Measure m, double lo, double hi) const;

  // U(x) = integral of log(1/|x - y|) dmu(y).
  double log_potential(Measure m, double x) const;

  // Integration nodes and weights covering the whole support.
  DensityTable quadrature_table(Measure m, int panels = 24) const;

  // Display grid of npoints rows plus local exponent fits. Unbounded
  // supports are cut at |x| = 1e4 max(q, 1).
  DensityTable tabulate(Measure m, int npoints) const;

  // Weighted least-squares log-log slope of the density on 12 log-spaced
  // distances in [lo, hi] from `edge`, stepping in `direction`.
  double fit_exponent(Measure m, double edge, int direction, double lo, double hi) const;

  std::map<std::string, double> exponent_fits(Measure m) const;

 private:
  // Beyond |x| = tail_start_ the offsets sqrt(t) - alpha (sheet 1) and
  // sqrt(t) - beta (sheet 4) are summed from their expansions in
  // s = |x|^(-1/2): odd coefficients are imaginary, even ones real, so the
  // densities come from a real even series with no cancellation.
  struct TailSeries {
    std::vector<long double> even;  // real parts of c_2, c_4, ...
    long double value_re(long double s) const;
  };
  TailSeries build_tail(int sheet) const;

  RealPreimages pre_;
  double tail_start_;
  TailSeries tail1_, tail4_;
};

double density(const ModelParams& params, Measure m, double x);

// mu3 density as the balayage of mu2 onto (-inf, 0]:
//   (1/(2 pi sqrt|x|)) * integral of sqrt(s)/(s - x) dmu2(s).
// The table must hold integration nodes for mu2. Throws QuadratureFailure if
// the Kronrod and embedded Gauss sums differ by more than 1e-6 relative.
double density_mu3_balayage(const ModelParams& params, double x, const DensityTable& mu2_table);

// Sum of weights times density; needs a table of integration nodes.
double mass(const DensityTable& table, const ModelParams& params);

// Logarithmic potential of the tabulated measure. Off the support this is
// the node sum; on the support the density is re-integrated adaptively
// around the logarithmic singularity.
double log_potential(const DensityTable& table, double x);

// Full report; never throws on a failed condition.
VariationalReport variational_report(const ModelParams& params);

// Same report; throws ViolationDetected naming the first failed condition.
VariationalReport verify_variational(const ModelParams& params);

}  // namespace rmtlab
