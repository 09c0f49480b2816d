#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "rmtlab/equilibrium.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/spectral_curve.hpp"

using namespace rmtlab;

namespace {

constexpr double kPi = std::numbers::pi;

const ModelParams P12{1.0, 2.0, 0, 0, 4};

const ModelParams kSweep[] = {{1.0, 2.0, 0, 0, 4}, {0.5, 3.0, 0, 0, 4}, {2.0, 2.1, 0, 0, 4}, {0.1, 1.0, 0, 0, 4}};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Cauchy transform of a measure at complex z, split into real and imaginary
// integrals.
std::complex<double> cauchy(const Equilibrium& eq, Measure m, std::complex<double> z) {
  auto re = [z](double s) { return (1.0 / (s - z)).real(); };
  auto im = [z](double s) { return (1.0 / (s - z)).imag(); };
  return {eq.integrate(m, re), eq.integrate(m, im)};
}

}  // namespace

TEST_CASE("constraint density") {
  CHECK(density_sigma(P12, -1.0) == doctest::Approx(1 / kPi).epsilon(1e-15));
  CHECK(density_sigma(P12, -4.0) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-15));
  CHECK_THROWS_AS(density_sigma(P12, 0.5), OutsideSupport);
  // Its Cauchy transform at z = 1 is -alpha / sqrt(z).
  Equilibrium eq(P12);
  const double c = eq.integrate(Measure::sigma, [](double s) { return 1.0 / (s - 1.0); });
  CHECK(c == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("densities agree with boundary values of the quartic roots") {
  Equilibrium eq(P12);
  const EndpointData& e = eq.ends();
  for (int i = 1; i <= 9; ++i) {
    const double x = e.p * i / 10.0;
    const BranchSet br = solve_branches(P12, x, Side::plus);
    CHECK(eq.density(Measure::mu2, x) == doctest::Approx(br.xi[1].imag() / kPi).epsilon(1e-8));
  }
  for (double f : {1.5, 3.0, 10.0, 100.0}) {
    const double x = -f * e.q;
    const BranchSet br = solve_branches(P12, x, Side::plus);
    CHECK(eq.density(Measure::sigma_minus_mu1, x) == doctest::Approx(-br.xi[0].imag() / kPi).epsilon(1e-8));
  }
  for (double f : {0.01, 0.5, 2.0, 50.0}) {
    const double x = -f * e.q;
    const BranchSet br = solve_branches(P12, x, Side::plus);
    const double want = -(br.xi[3].imag() + P12.beta / std::sqrt(-x)) / kPi;
    CHECK(eq.density(Measure::mu3, x) == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("mu1 saturates the constraint on (-q, 0)") {
  Equilibrium eq(P12);
  for (double f : {0.001, 0.3, 0.9}) {
    const double x = -f * eq.ends().q;
    CHECK(eq.density(Measure::mu1, x) == density_sigma(P12, x));
    CHECK(eq.density(Measure::sigma_minus_mu1, x) == 0.0);
  }
}

TEST_CASE("Cauchy transforms of mu2 and sigma - mu1") {
  Equilibrium eq(P12);
  for (std::complex<double> z : {std::complex<double>(10.0, 0.0), std::complex<double>(1.0, 2.0),
                                 std::complex<double>(-3.0, 0.5)}) {
    const BranchSet br = solve_branches(P12, z);
    const std::complex<double> c2 = cauchy(eq, Measure::mu2, z);
    CHECK(std::abs(c2 - (br.xi[0] + br.xi[1])) < 1e-9 * std::abs(c2));
    const std::complex<double> c1 = cauchy(eq, Measure::sigma_minus_mu1, z);
    CHECK(std::abs(c1 + br.xi[0]) < 1e-9 * std::abs(c1));
  }
}

TEST_CASE("out of support and infinite masses") {
  Equilibrium eq(P12);
  CHECK_THROWS_AS(eq.density(Measure::mu2, -0.1), OutsideSupport);
  CHECK_THROWS_AS(eq.density(Measure::mu2, eq.ends().p * 1.01), OutsideSupport);
  CHECK_THROWS_AS(eq.density(Measure::mu3, 0.1), OutsideSupport);
  CHECK_THROWS_AS(eq.density(Measure::sigma_minus_mu1, 1.0), OutsideSupport);
  CHECK(eq.density(Measure::mu2, eq.ends().p) == 0.0);
  CHECK_THROWS_AS(eq.mass(Measure::sigma), std::domain_error);
  CHECK_THROWS_AS(eq.log_potential(Measure::sigma_minus_mu1, 1.0), std::domain_error);
}

TEST_CASE("balayage of a point mass") {
  CHECK(balayage_point_density(0.0, 1.0, -1.0) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-15));
  CHECK_THROWS_AS(balayage_point_density(1.0, -2.0, -3.0), std::invalid_argument);
  for (double c : {0.0, 0.7}) {
    for (double z : {0.3, 5.0}) {
      auto f = [&](double x) { return balayage_point_density(c, z, x); };
      // sqrt substitution at -c, then the w^-2 tail.
      const double near = quad::power_mapped(f, -c, -c - 1.0, 2).value;
      const double far = quad::tail_mapped(f, -c - 1.0, -1, 1.0).value;
      CHECK(near + far == doctest::Approx(1.0).epsilon(1e-8));
      // Potential of the swept mass equals that of the point mass on the set.
      for (double x0 : {-c - 0.5, -c - 4.0}) {
        auto g = [&](double x) { return x == x0 ? 0.0 : -std::log(std::abs(x0 - x)) * f(x); };
        const double mid = 0.5 * (x0 - c);
        const double u = quad::power_mapped(g, -c, mid, 2).value + quad::power_mapped(g, x0, mid, 2).value +
                         quad::power_mapped(g, x0, x0 - 1.0, 2).value +
                         quad::tail_mapped(g, x0 - 1.0, -1, 1.0).value;
        CHECK(u == doctest::Approx(-std::log(z - x0)).epsilon(1e-8));
      }
    }
  }
  // |x|^(-3/2) decay.
  const double r = balayage_point_density(0.0, 1.0, -1e8) / balayage_point_density(0.0, 1.0, -1e6);
  CHECK(std::log(r) / std::log(100.0) == doctest::Approx(-1.5).epsilon(1e-6));
}

TEST_CASE("masses") {
  for (const ModelParams& prm : kSweep) {
    CAPTURE(prm.alpha);
    CAPTURE(prm.beta);
    Equilibrium eq(prm);
    CHECK(std::abs(eq.mass(Measure::mu2) - 1.0) < 1e-8);
    CHECK(std::abs(eq.mass(Measure::mu3) - 0.5) < 1e-6);
    CHECK(std::abs(2 * eq.mass(Measure::mu1) - 1.0) < 1e-4);
    const DensityTable t2 = eq.quadrature_table(Measure::mu2);
    const DensityTable t3 = eq.quadrature_table(Measure::mu3);
    CHECK(std::abs(mass(t2, prm) - 1.0) < 1e-8);
    CHECK(std::abs(mass(t3, prm) - 0.5) < 1e-6);
    for (const DensityTable* t : {&t2, &t3})
      for (std::size_t i = 0; i < t->rows.size(); ++i) {
        CHECK(t->rows[i].density >= -1e-12);
        if (i > 0) CHECK(t->rows[i - 1].x <= t->rows[i].x);
      }
  }
}

TEST_CASE("sigma - mu1 mass near -q vanishes like a 3/2 power") {
  Equilibrium eq(P12);
  const double q = eq.ends().q;
  double prev = eq.mass_on(Measure::sigma_minus_mu1, -q - 1.0, -q);
  CHECK(prev > 0);
  for (double w : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double m = eq.mass_on(Measure::sigma_minus_mu1, -q - w, -q);
    CHECK(m > 0);
    CHECK(m < prev);
    prev = m;
  }
  const double m3 = eq.mass_on(Measure::sigma_minus_mu1, -q - 1e-3 * q, -q);
  const double m5 = eq.mass_on(Measure::sigma_minus_mu1, -q - 1e-5 * q, -q);
  CHECK(std::log(m3 / m5) / std::log(100.0) == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("local exponents across the parameter sweep") {
  for (const ModelParams& prm : kSweep) {
    CAPTURE(prm.alpha);
    CAPTURE(prm.beta);
    Equilibrium eq(prm);
    auto f2 = eq.exponent_fits(Measure::mu2);
    CHECK(f2.at("near_zero") == doctest::Approx(-2.0 / 3).epsilon(0.01 / (2.0 / 3)));
    CHECK(f2.at("near_finite_endpoint") == doctest::Approx(0.5).epsilon(0.02));
    CHECK(eq.exponent_fits(Measure::mu3).at("near_zero") == doctest::Approx(-2.0 / 3).epsilon(0.01 / (2.0 / 3)));
    CHECK(eq.exponent_fits(Measure::sigma_minus_mu1).at("near_finite_endpoint") ==
          doctest::Approx(0.5).epsilon(0.04));
    CHECK(eq.exponent_fits(Measure::mu1).at("near_zero") == doctest::Approx(-0.5).epsilon(1e-6));
  }
}

TEST_CASE("tabulated grids") {
  Equilibrium eq(P12);
  for (Measure m : {Measure::mu1, Measure::mu2, Measure::mu3, Measure::sigma, Measure::sigma_minus_mu1}) {
    const DensityTable t = eq.tabulate(m, 200);
    CHECK(t.rows.size() == 200);
    CHECK_FALSE(t.quadrature_nodes);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CHECK(t.rows[i].density >= -1e-12);
      if (i > 0) CHECK(t.rows[i - 1].x < t.rows[i].x);
    }
  }
  CHECK_THROWS_AS(eq.tabulate(Measure::mu2, 1), std::invalid_argument);
}

TEST_CASE("mu3 as the balayage of mu2") {
  for (const ModelParams& prm : kSweep) {
    CAPTURE(prm.alpha);
    CAPTURE(prm.beta);
    Equilibrium eq(prm);
    const double q = eq.ends().q;
    const DensityTable t2 = eq.quadrature_table(Measure::mu2);
    for (int i = 0; i < 40; ++i) {
      const double x = -q * std::pow(10.0, -3.0 + 6.0 * (i + 0.5) / 40);
      CAPTURE(x);
      CHECK(rel(density_mu3_balayage(prm, x, t2), eq.density(Measure::mu3, x)) < 1e-6);
    }
  }
  // Decay exponent from two decades far out.
  Equilibrium eq(P12);
  const DensityTable t2 = eq.quadrature_table(Measure::mu2);
  const double x1 = -1e4 * eq.ends().p, x2 = 100 * x1;
  const double slope = std::log(density_mu3_balayage(P12, x2, t2) / density_mu3_balayage(P12, x1, t2)) / std::log(100.0);
  CHECK(slope == doctest::Approx(-1.5).epsilon(0.05 / 1.5));
}

TEST_CASE("far tail expansion matches the preimage route") {
  for (const ModelParams& prm : kSweep) {
    Equilibrium eq(prm);
    RealPreimages pre(prm);
    const double L = std::max(eq.ends().p, eq.ends().q);
    // Just past the switch-over both routes are accurate.
    for (double f : {26.0, 40.0}) {
      const double x = -f * L;
      const std::complex<long double> t1 = pre(1, x, Side::plus).t, t4 = pre(4, x, Side::plus).t;
      const double s1 = static_cast<double>(std::sqrt(t1).real() / (kPi * std::sqrt(-x)));
      const double m3 = static_cast<double>(((t4 - (long double)prm.b()) / (std::sqrt(t4) + (long double)prm.beta)).real() /
                                            (kPi * std::sqrt(-x)));
      CHECK(rel(eq.density(Measure::sigma_minus_mu1, x), s1) < 1e-9);
      CHECK(rel(eq.density(Measure::mu3, x), m3) < 1e-6);
    }
  }
}

TEST_CASE("logarithmic potentials") {
  Equilibrium eq(P12);
  const EndpointData& e = eq.ends();
  const double X = 1e4 * e.p;
  CHECK(std::abs(eq.log_potential(Measure::mu2, X) + std::log(X)) < 1e-3);
  for (double f : {2.0, 10.0}) {
    const double x = -f * e.q;
    CHECK(std::abs(2 * eq.log_potential(Measure::mu1, x) - eq.log_potential(Measure::mu2, x)) < 1e-4);
  }
  // Table route: node sum off the support, adaptive on it.
  const DensityTable t2 = eq.quadrature_table(Measure::mu2);
  for (double x : {-3.0, 1.0, 2 * e.p})
    CHECK(log_potential(t2, x) == doctest::Approx(eq.log_potential(Measure::mu2, x)).epsilon(1e-10));
}

TEST_CASE("derivative of the restricted constraint potential") {
  // U of sigma restricted to [-1, 0): the derivative off the support is the
  // Cauchy transform integral of 1/(s - x).
  Equilibrium eq(P12);
  auto U = [&](double x) {
    return eq.integrate(Measure::sigma, [x](double s) { return -std::log(std::abs(x - s)); }, {}, -1.0, 0.0);
  };
  for (double x : {0.5, 2.0}) {
    const double c = eq.integrate(Measure::sigma, [x](double s) { return 1.0 / (s - x); }, {}, -1.0, 0.0);
    const double h = 1e-4;
    const double fd = (U(x + h) - U(x - h)) / (2 * h);
    CHECK(std::abs(fd - c) < 1e-5);
  }
}

TEST_CASE("variational conditions") {
  for (const ModelParams& prm : kSweep) {
    CAPTURE(prm.alpha);
    CAPTURE(prm.beta);
    const VariationalReport rep = variational_report(prm);
    CHECK(rep.violations.empty());
    CHECK(rep.support_values.size() == 30);
    CHECK(rep.spread_on_support < 1e-4 * std::abs(rep.ell));
    for (const auto& [x, m] : rep.inequality_margins) CHECK(m > 0);
    for (const auto& [x, r] : rep.mu3_equality_residuals) CHECK(std::abs(r) < 1e-4);
  }
  CHECK_NOTHROW(verify_variational(P12));
}
