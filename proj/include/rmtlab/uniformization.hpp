#pragma once

#include <string>
#include <vector>

#include "rmtlab/polynomial.hpp"
#include "rmtlab/spectral_curve.hpp"

namespace rmtlab {

// h(t) = (t - a)(t - b)/d, so that xi = h(t) solves the quartic at z = z(t).
cdouble h_of_t(const ModelParams& params, cdouble t);

// z(t) = t/h(t)^2. Throws PoleAtInfinitySheet within 1e-12 of a or b.
cdouble z_of_t(const ModelParams& params, cdouble t);

// z'(t) = -d^2 (3t^2 - (a + b)t - a b)/((t - a)^3 (t - b)^3).
cdouble dz_dt(const ModelParams& params, cdouble t);

// Quartic residual at (z(t), h(t)), normalised by the largest term.
double curve_identity_check(const ModelParams& params, cdouble t);

// A preimage t with z(t) = x for real x, carried together with its offset
// from the nearest of {0, a, b}. The offset is accurate to full relative
// precision even when t sits next to a pole of z.
struct TPoint {
  cld t;
  cld offset;         // t - anchor
  long double anchor; // one of 0, a, b
};

// Sheet-k preimage of the real point x. On a cut of sheet k the side picks
// the boundary value (Side::none is rejected there); off the cuts the side
// is ignored.
TPoint real_preimage(const ModelParams& params, int sheet, double x, Side side);

// Same as real_preimage with the endpoint data computed once; use this for
// repeated evaluation.
class RealPreimages {
 public:
  explicit RealPreimages(const ModelParams& params);
  TPoint operator()(int sheet, double x, Side side) const;
  const ModelParams& params() const { return params_; }
  const EndpointData& ends() const { return ends_; }

 private:
  ModelParams params_;
  EndpointData ends_;
};

// The unique t in the sheet-k domain with z(t) = z. Real z follow the same
// side rules as real_preimage. Throws NoConvergence if no seed converges.
cdouble t_of_z(const ModelParams& params, int sheet, cdouble z, Side side = Side::none);

enum class Contour { g1plus, g1minus, g2plus, g2minus, g3plus, g3minus };

std::string to_string(Contour c);
Contour contour_from_string(const std::string& s);

struct ContourPoint {
  double x;
  cdouble t;
  double z_residual;  // |z(t) - x| / max(1, |x|)
};

struct ContourTrace {
  Contour which;
  std::vector<ContourPoint> points;
};

// Default grid on the interval of `which`, ordered from the finite branch
// point outward and clustered there (successive gaps grow by 1.3 until they
// reach a cap).
std::vector<double> contour_grid(const ModelParams& params, Contour which, int npoints);

// Newton continuation of z(t) = x along the grid. Throws SideFlip if a
// point lands in the wrong half plane, NoConvergence if the nearest root is
// ambiguous or Newton fails.
ContourTrace trace_gamma(const ModelParams& params, Contour which, const std::vector<double>& grid);

}  // namespace rmtlab
