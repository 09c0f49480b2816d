// Acceptance run: one PASS/FAIL line per criterion, exit status = number of
// failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/equilibrium.hpp"
#include "rmtlab/kernels.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/simulator.hpp"
#include "rmtlab/special_functions.hpp"
#include "rmtlab/spectral_curve.hpp"
#include "rmtlab/uniformization.hpp"

using namespace rmtlab;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) detail << "; ";
      else detail.str("");
      ok = false;
      detail << what;
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const ModelParams kSweep[] = {make_params(1, 2), make_params(0.5, 3), make_params(2, 2.1), make_params(0.1, 1)};

// Sign-change bisection on D1, independent of the closed forms.
double bisect_d1(const ModelParams& prm, double lo, double hi) {
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

void endpoint_consistency(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  double worst_root = 0, worst_image = 0;
  int pairs = 0;
  while (pairs < 20) {
    const double x = u(rng), y = u(rng);
    if (std::abs(x - y) < 1e-2) continue;
    const ModelParams prm = make_params(std::min(x, y), std::max(x, y));
    const EndpointData e = endpoints(prm);
    worst_root = std::max({worst_root, rel(bisect_d1(prm, 0.0, 100 * e.p), e.p),
                           rel(-bisect_d1(prm, -100 * e.q, 0.0), e.q)});
    worst_image = std::max({worst_image, rel(z_of_t(prm, e.t_plus).real(), e.p),
                            rel(-z_of_t(prm, e.t_minus).real(), e.q)});
    ++pairs;
  }
  o.require(worst_root < 1e-10, "closed form vs bisection " + fmt(worst_root));
  o.require(worst_image < 1e-10, "z(t+-) vs endpoints " + fmt(worst_image));
  if (o.ok) o.detail << "20 pairs, root rel " << fmt(worst_root) << ", z(t+-) rel " << fmt(worst_image);
}

void curve_identity(Outcome& o) {
  const ModelParams prm = make_params(1, 2);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_t = 0;
  for (int i = 0; i < 100; ++i) {
    const cdouble t = std::polar(std::pow(10.0, 2 * u(rng)), 3.1 * u(rng));
    if (std::abs(t - prm.a()) < 1e-3 || std::abs(t - prm.b()) < 1e-3) continue;
    worst_t = std::max(worst_t, curve_identity_check(prm, t));
  }
  VietaResiduals worst{};
  for (int i = 0; i < 200; ++i) {
    const cdouble z = std::polar(std::pow(10.0, 3 * u(rng)), 3.1 * u(rng));
    const VietaResiduals v = vieta_residuals(prm, solve_branches(prm, z));
    worst.sum_abs = std::max(worst.sum_abs, v.sum_abs);
    worst.pair_sum_rel = std::max(worst.pair_sum_rel, v.pair_sum_rel);
    worst.triple_sum_rel = std::max(worst.triple_sum_rel, v.triple_sum_rel);
    worst.product_rel = std::max(worst.product_rel, v.product_rel);
    worst.max_quartic_residual = std::max(worst.max_quartic_residual, v.max_quartic_residual);
  }
  o.require(worst_t < 1e-11, "curve residual " + fmt(worst_t));
  o.require(worst.sum_abs < 1e-9 && worst.pair_sum_rel < 1e-9 && worst.triple_sum_rel < 1e-8 &&
                worst.product_rel < 1e-8 && worst.max_quartic_residual < 1e-12,
            "Vieta residuals sum " + fmt(worst.sum_abs) + " pair " + fmt(worst.pair_sum_rel) + " triple " +
                fmt(worst.triple_sum_rel) + " product " + fmt(worst.product_rel) + " quartic " +
                fmt(worst.max_quartic_residual));
  if (o.ok)
    o.detail << "curve residual " << fmt(worst_t) << " at 100 t; Vieta at 200 z, quartic residual "
             << fmt(worst.max_quartic_residual);
}

void normalization(Outcome& o) {
  double worst2 = 0, worst3 = 0, lowest = 0;
  for (const ModelParams& prm : kSweep) {
    const Equilibrium eq(prm);
    worst2 = std::max(worst2, std::abs(eq.mass(Measure::mu2) - 1.0));
    worst3 = std::max(worst3, std::abs(eq.mass(Measure::mu3) - 0.5));
    for (Measure m : {Measure::mu2, Measure::mu3}) {
      for (const DensityRow& r : eq.quadrature_table(m).rows) lowest = std::min(lowest, r.density);
      for (const DensityRow& r : eq.tabulate(m, 400).rows) lowest = std::min(lowest, r.density);
    }
  }
  o.require(worst2 < 1e-8, "mu2 mass error " + fmt(worst2));
  o.require(worst3 < 1e-6, "mu3 mass error " + fmt(worst3));
  o.require(lowest >= 0, "negative density " + fmt(lowest));
  if (o.ok) o.detail << "4 pairs, |mass2 - 1| " << fmt(worst2) << ", |mass3 - 1/2| " << fmt(worst3);
}

void local_exponents(Outcome& o) {
  double w2z = 0, w3z = 0, w2p = 0, w1q = 0;
  for (const ModelParams& prm : kSweep) {
    const Equilibrium eq(prm);
    const auto f2 = eq.exponent_fits(Measure::mu2);
    w2z = std::max(w2z, std::abs(f2.at("near_zero") + 2.0 / 3));
    w2p = std::max(w2p, std::abs(f2.at("near_finite_endpoint") - 0.5));
    w3z = std::max(w3z, std::abs(eq.exponent_fits(Measure::mu3).at("near_zero") + 2.0 / 3));
    w1q = std::max(w1q, std::abs(eq.exponent_fits(Measure::sigma_minus_mu1).at("near_finite_endpoint") - 0.5));
  }
  o.require(w2z < 0.01, "mu2 at 0 off by " + fmt(w2z));
  o.require(w3z < 0.01, "mu3 at 0 off by " + fmt(w3z));
  o.require(w2p < 0.01, "mu2 at p off by " + fmt(w2p));
  o.require(w1q < 0.02, "sigma - mu1 at -q off by " + fmt(w1q));
  if (o.ok)
    o.detail << "4 pairs, slope errors " << fmt(w2z) << ", " << fmt(w3z) << ", " << fmt(w2p) << ", " << fmt(w1q);
}

void balayage(Outcome& o) {
  double worst = 0;
  for (const ModelParams& prm : kSweep) {
    const Equilibrium eq(prm);
    const double q = eq.ends().q;
    const DensityTable t2 = eq.quadrature_table(Measure::mu2);
    for (int i = 0; i < 40; ++i) {
      const double x = -q * std::pow(10.0, 3.0 - 6.0 * i / 39);
      worst = std::max(worst, rel(density_mu3_balayage(prm, x, t2), eq.density(Measure::mu3, x)));
    }
  }
  o.require(worst < 1e-6, "largest relative difference " + fmt(worst));
  if (o.ok) o.detail << "4 pairs x 40 points, largest relative difference " << fmt(worst);
}

void variational(Outcome& o) {
  for (const ModelParams& prm : kSweep) {
    const VariationalReport rep = variational_report(prm);
    double margin = INFINITY, eq3 = 0;
    for (const auto& [x, m] : rep.inequality_margins) margin = std::min(margin, m);
    for (const auto& [x, r] : rep.mu3_equality_residuals) eq3 = std::max(eq3, std::abs(r));
    const std::string at = " at (" + fmt(prm.alpha) + ", " + fmt(prm.beta) + ")";
    o.require(rep.spread_on_support < 1e-4 * std::abs(rep.ell), "spread " + fmt(rep.spread_on_support) + at);
    o.require(margin > 0, "margin " + fmt(margin) + at);
    o.require(eq3 < 1e-4, "|2U3 - U2| " + fmt(eq3) + at);
    o.require(rep.violations.empty(), "report lists violations" + at);
    if (o.ok && prm.alpha == 1 && prm.beta == 2)
      o.detail << "4 pairs; at (1, 2) spread/|l| " << fmt(rep.spread_on_support / std::abs(rep.ell))
               << ", min margin " << fmt(margin) << ", |2U3 - U2| " << fmt(eq3);
  }
}

void special_functions(Outcome& o) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ord(0, 6);
  std::uniform_real_distribution<double> zz(0.05, 30.0);
  double wr = 0;
  for (int i = 0; i < 200; ++i) wr = std::max(wr, wronskian_residual(ord(rng), zz(rng)));
  double series = 0, offset = 0;
  for (const MeijerSpec& s : {MeijerSpec{1, {0.0, 0.0, 0.0}}, MeijerSpec{1, {0.0, -1.0, -2.0}},
                              MeijerSpec{1, {0.3, -0.7, 1.4}}}) {
    for (double z : {0.05, 0.5, 2.0, 10.0, 30.0}) {
      const MeijerValue c = meijer_g03(s, z);
      series = std::max(series, rel(c.value, meijer_g03_series(s, z)));
      offset = std::max(offset, rel(meijer_g03(s, z, {0.25}).value, c.value));
    }
  }
  for (const MeijerSpec& s : {MeijerSpec{2, {1.0, 2.0, 0.0}}, MeijerSpec{2, {0.0, 0.0, 0.0}}})
    for (double z : {0.1, 1.0, 8.0}) offset = std::max(offset, rel(meijer_g03(s, z, {0.25}).value, meijer_g03(s, z).value));
  o.require(wr < 1e-12, "Wronskian residual " + fmt(wr));
  o.require(series < 1e-10, "series vs contour " + fmt(series));
  o.require(offset < 1e-10, "offset change " + fmt(offset));
  if (o.ok) o.detail << "Wronskian " << fmt(wr) << ", series/contour " << fmt(series) << ", offset " << fmt(offset);
}

void gram(Outcome& o) {
  const double g11 = gram_entry(make_params(1, 2, 0, 0, 1), 1, 1);
  o.require(rel(g11, 1.0 / 6) < 1e-8, "G11 = " + fmt(g11));
  if (o.ok) o.detail << "G11 rel " << fmt(rel(g11, 1.0 / 6));
  for (int n : {2, 4, 8}) {
    const ModelParams prm = make_params(1, 2, 0, 0, n);
    const GramMatrix g = gram_matrix(prm);
    // x = t^2 on (0, inf).
    auto f = [&](double t) { return t < 1e-9 ? 0.0 : 2 * t * finite_n_kernel(prm, g, t * t, t * t).value; };
    quad::Options opt;
    opt.abs_tol = 0;
    opt.rel_tol = 1e-12;
    const double scale = 2.0 * n;
    const double tr = (quad::adaptive(f, 0.0, scale, opt) + quad::tail_mapped(f, scale, +1, scale, 2, opt)).value;
    o.require(std::abs(tr - n) < 1e-6, "trace at n = " + std::to_string(n) + " is " + fmt(tr));
    if (o.ok) o.detail << ", |trace - " << n << "| " << fmt(std::abs(tr - n));
  }
}

void global_law(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleStats st = run_ensemble(make_params(1, 2, 0, 0, 120), 40, 7);
  const double ta = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(st.ks_distance < 0.03, "(a) KS " + fmt(st.ks_distance));
  o.require(ta < 300, "(a) took " + fmt(ta) + " s");
  const auto t1 = std::chrono::steady_clock::now();
  std::vector<double> dev;
  for (int n : {4, 6, 8}) {
    const ModelParams prm = make_params(1, 2, 0, 0, n);
    dev.push_back(check_global_limit(prm, {0.5 * Equilibrium(prm).ends().p}).front().deviation);
  }
  const double tb = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  const std::string seq = fmt(dev[0]) + ", " + fmt(dev[1]) + ", " + fmt(dev[2]);
  o.require(strictly_decreasing(dev), "(b) deviation at p/2 for n = 4, 6, 8 not decreasing: " + seq);
  o.require(tb < 120, "(b) took " + fmt(tb) + " s");
  if (o.ok) o.detail << "(a) KS " << fmt(st.ks_distance) << "; (b) " << seq;
  else o.detail << " [(a) KS " << fmt(st.ks_distance) << "]";
}

void hard_edge(Outcome& o) {
  const std::vector<std::pair<double, double>> pts{{0.5, 0.5}, {1, 1}, {1, 2}};
  for (auto [kappa, nu] : {std::pair{0, 0}, std::pair{1, 2}}) {
    std::vector<std::vector<double>> dev(pts.size());
    for (int n : {4, 6, 8}) {
      const auto rows = check_hard_edge(make_params(1, 2, kappa, nu, n), pts);
      for (std::size_t i = 0; i < pts.size(); ++i) dev[i].push_back(rows[i].deviation);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string tag = "(kappa, nu) = (" + std::to_string(kappa) + ", " + std::to_string(nu) + ") at (" +
                              fmt(pts[i].first) + ", " + fmt(pts[i].second) + "): " + fmt(dev[i][0]) + ", " +
                              fmt(dev[i][1]) + ", " + fmt(dev[i][2]);
      o.require(strictly_decreasing(dev[i]), tag);
      if (o.ok && i == 1) o.detail << (kappa == 0 ? "" : "; ") << tag;
    }
  }
}

void sampler(Outcome& o) {
  const double alpha = 1, beta = 2;
  const ModelParams prm = make_params(alpha, beta, 0, 0, 1);
  double sum = 0, sum2 = 0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    const double v = std::norm(sample_pair(prm, 1, 1, 2025, t).X1(0, 0));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws, se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
  const double target = beta / (beta * beta - alpha * alpha);
  o.require(std::abs(mean - target) < 3 * se, "E|X11|^2 = " + fmt(mean) + " vs " + fmt(target));
  const EnsembleStats c = run_ensemble(make_params(1, 2, 0, 0, 20), 2000, 11);
  const EnsembleStats t = run_tau_ensemble(20, 0, 1.0 / 3, 2000, 12);
  double zmax = 0;
  for (int k = 0; k < 2; ++k)
    zmax = std::max(zmax, std::abs(c.moments[k] - t.moments[k]) / std::hypot(c.moment_stderr[k], t.moment_stderr[k]));
  o.require(zmax < 3, "moment z-score " + fmt(zmax));
  if (o.ok)
    o.detail << "E|X11|^2 z-score " << fmt(std::abs(mean - target) / se) << ", moment z-score " << fmt(zmax);
}

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "endpoint consistency", 1, endpoint_consistency},
      {2, "curve identity", 1, curve_identity},
      {3, "measure normalization", 10, normalization},
      {4, "local exponents", 10, local_exponents},
      {5, "balayage equivalence", 30, balayage},
      {6, "variational conditions", 60, variational},
      {7, "special-function oracles", 5, special_functions},
      {8, "Gram closed form and trace", 30, gram},
      {9, "global law", 420, global_law},
      {10, "hard-edge law", 180, hard_edge},
      {11, "sampler correctness", 120, sampler},
  };
  int failures = 0;
  for (const Criterion& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.budget_s, "runtime " + fmt(secs) + " s over " + fmt(c.budget_s) + " s");
    failures += !o.ok;
    std::printf("%s %2d %s: %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures;
}
