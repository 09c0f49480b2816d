#pragma once

#include <complex>
#include <vector>

namespace rmtlab {

using cld = std::complex<long double>;

// Value and derivative of c[0] z^n + c[1] z^(n-1) + ... + c[n].
struct PolyEval {
  cld value;
  cld derivative;
};
PolyEval horner(const std::vector<cld>& c, cld z);

// All roots by simultaneous Aberth-Ehrlich iteration in extended precision.
// `seeds`, if non-empty, must hold one starting point per root; this is what
// continuation callers use to keep the roots in a stable order.
// Throws NoConvergence if the iteration stalls.
std::vector<cld> polynomial_roots(const std::vector<cld>& c, const std::vector<cld>& seeds = {});

}  // namespace rmtlab
