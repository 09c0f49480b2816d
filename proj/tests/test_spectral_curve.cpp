#include <cmath>
#include <random>

#include "doctest.h"
#include "rmtlab/spectral_curve.hpp"

using namespace rmtlab;

namespace {

// Independent root finder for the oracle: plain bisection on a sign change.
double bisect(const ModelParams& prm, double lo, double hi) {
  double flo = discriminant_d1(prm, lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = discriminant_d1(prm, mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

const ModelParams P12{1.0, 2.0, 0, 0, 4};

}  // namespace

TEST_CASE("discriminant factor at zero and its leading coefficient") {
  CHECK(discriminant_d1(P12, 0.0) == doctest::Approx(-243.0));
  // Second difference isolates 2 * 16 a b d^2.
  const double c2 = (discriminant_d1(P12, 1.0) - 2 * discriminant_d1(P12, 0.0) + discriminant_d1(P12, -1.0)) / 2;
  CHECK(c2 == doctest::Approx(16.0 * 1 * 4 * 9));
}

TEST_CASE("endpoints for alpha=1, beta=2") {
  EndpointData e = endpoints(P12);
  CHECK(e.p == doctest::Approx(4.231639838222845).epsilon(1e-14));
  CHECK(e.q == doctest::Approx(0.09969539377840143).epsilon(1e-14));
  CHECK(e.t_plus == doctest::Approx((5 + std::sqrt(73.0)) / 6).epsilon(1e-15));
  CHECK(e.t_minus == doctest::Approx((5 - std::sqrt(73.0)) / 6).epsilon(1e-14));
  const double hp = 3 * e.t_plus * e.t_plus - 5 * e.t_plus - 4;
  CHECK(std::abs(hp) < 1e-13);
  CHECK(std::abs(bisect(P12, 0.0, 10.0) - e.p) < 1e-10 * e.p);
  CHECK(std::abs(bisect(P12, -10.0, 0.0) + e.q) < 1e-10 * e.q);
  for (const auto& [name, r] : e.residuals) CHECK_MESSAGE(r < 1e-10, name);
}

TEST_CASE("endpoint sweep and scale invariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.02, 5.0);
  for (int i = 0; i < 40; ++i) {
    double x = u(rng), y = u(rng);
    if (std::abs(x - y) < 1e-3) continue;
    ModelParams prm{std::min(x, y), std::max(x, y), 0, 0, 2};
    EndpointData e = endpoints(prm);
    CHECK(e.p > 0);
    CHECK(e.q > 0);
    CHECK(std::abs(bisect(prm, 0.0, 100 * e.p) - e.p) < 1e-10 * e.p);
    CHECK(std::abs(bisect(prm, -100 * e.q, 0.0) + e.q) < 1e-10 * e.q);
    EndpointData s = endpoints({2 * prm.alpha, 2 * prm.beta, 0, 0, 2});
    CHECK(s.p == doctest::Approx(e.p / 4).epsilon(1e-13));
    CHECK(s.q == doctest::Approx(e.q / 4).epsilon(1e-13));
  }
}

TEST_CASE("discriminant does not vanish inside the gaps") {
  EndpointData e = endpoints(P12);
  for (int k = 1; k < 50; ++k) {
    const double eps = 1e-6;
    CHECK(discriminant_d1(P12, -e.q + eps + (e.q - 2 * eps) * k / 50.0) != 0.0);
    CHECK(discriminant_d1(P12, eps + (e.p - 2 * eps) * k / 50.0) < 0.0);
    CHECK(discriminant_d1(P12, e.p + eps + 9 * e.p * k / 50.0) > 0.0);
  }
}

TEST_CASE("leading asymptotics label the sheets") {
  const double z = 1e6;
  BranchSet bs = solve_branches(P12, z);
  const double sz = std::sqrt(z);
  CHECK(std::abs(bs.xi[0] * sz - 1.0) < 1e-3);
  CHECK(std::abs(bs.xi[1] * sz + 1.0) < 1e-3);
  CHECK(std::abs(bs.xi[2] * sz + 2.0) < 1e-3);
  CHECK(std::abs(bs.xi[3] * sz - 2.0) < 1e-3);
  // Next order: xi1 = alpha/sqrt(z) - 1/(2z) + ...
  CHECK(std::abs((bs.xi[0] - 1.0 / sz) * z + 0.5) < 1e-2);
}

TEST_CASE("Vieta suite at random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double r = std::pow(10.0, 3 * u(rng));
    cdouble z = std::polar(r, 3.1 * u(rng));
    BranchSet bs = solve_branches(P12, z);
    VietaResiduals v = vieta_residuals(P12, bs);
    CHECK(v.sum_abs < 1e-9);
    CHECK(v.pair_sum_rel < 1e-9);
    CHECK(v.product_rel < 1e-8);
    CHECK(v.max_quartic_residual < 1e-12);
  }
}

TEST_CASE("conjugate boundary values on the middle cut") {
  BranchSet plus = solve_branches(P12, 2.0, Side::plus);
  BranchSet minus = solve_branches(P12, 2.0, Side::minus);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(plus.xi[k] - std::conj(minus.xi[k])) < 1e-9);
  // Sheets 1 and 4 are analytic on (0, p), sheets 2 and 3 carry the jump.
  CHECK(std::abs(plus.xi[0].imag()) < 1e-9);
  CHECK(std::abs(plus.xi[3].imag()) < 1e-9);
  CHECK(plus.xi[1].imag() > 0.01);
  CHECK(std::abs(plus.xi[1] - std::conj(plus.xi[2])) < 1e-9);
}

TEST_CASE("labels are stable under tiny perturbation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    cdouble z = std::polar(std::pow(10.0, 2 * u(rng)), 3.1 * u(rng));
    BranchSet a = solve_branches(P12, z);
    BranchSet b = solve_branches(P12, z * (1.0 + 1e-9));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(a.xi[k] - b.xi[k]) < 1e-6 * std::abs(a.xi[k]));
  }
}

TEST_CASE("real point on a cut requires a side") {
  CHECK_THROWS_AS(solve_branches(P12, 1.0), std::invalid_argument);
  CHECK_NOTHROW(solve_branches(P12, 10.0));
  CHECK_THROWS_AS(solve_branches(P12, 0.0), NearBranchPoint);
}
