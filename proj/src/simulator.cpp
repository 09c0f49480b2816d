#include "rmtlab/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "rmtlab/equilibrium.hpp"
#include "rmtlab/errors.hpp"

namespace rmtlab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53, kM1 = 0xCD9E8D57;
constexpr std::uint32_t kW0 = 0x9E3779B9, kW1 = 0xBB67AE85;

std::array<std::uint32_t, 2> split(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) : key_(split(seed)) {
  const auto s = split(stream);
  ctr_ = {0, 0, s[0], s[1]};
}

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }
  return c;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (used_ == 4) {
    out_ = block(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    used_ = 0;
  }
  return out_[used_++];
}

MatrixPair sample_pair(const ModelParams& params, int L, int M, std::uint64_t seed, std::uint64_t stream) {
  validate(params);
  const int n = params.n;
  if (L != n + params.kappa || M != n + params.nu)
    throw std::invalid_argument("sample_pair: need L = n + kappa and M = n + nu");
  Philox4x32 gen(seed, stream);
  std::normal_distribution<double> z;
  const double a = params.alpha, b = params.beta;
  // Coupled pair (x, y) = ((X1)_bc, (X2)_cb), b <= n: the real parts have
  // covariance [[b, a], [a, b]] / (2 (b^2 - a^2)), the imaginary parts
  // [[b, -a], [-a, b]] / (2 (b^2 - a^2)). Along (1, 1) and (1, -1) the
  // variances are 1/(4 (b - a)) and 1/(4 (b + a)).
  const double s_plus = std::sqrt(0.25 / (b - a)), s_minus = std::sqrt(0.25 / (b + a));
  const double s_free = std::sqrt(0.5 / b);
  MatrixPair m{Eigen::MatrixXcd(L, M), Eigen::MatrixXcd(M, n)};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < M; ++c) {
      const double z1 = z(gen), z2 = z(gen), z3 = z(gen), z4 = z(gen);
      const double ur = s_plus * z1 + s_minus * z2, vr = s_plus * z1 - s_minus * z2;
      const double ui = s_minus * z3 + s_plus * z4, vi = s_minus * z3 - s_plus * z4;
      m.X1(r, c) = {ur, ui};
      m.X2(c, r) = {vr, vi};
    }
  for (int r = n; r < L; ++r)
    for (int c = 0; c < M; ++c) {
      const double re = z(gen), im = z(gen);
      m.X1(r, c) = {s_free * re, s_free * im};
    }
  return m;
}

TauSample tau_pair(int n, int M, double tau, std::uint64_t seed, std::uint64_t stream) {
  if (n < 1 || M < n) throw std::invalid_argument("tau_pair: need 1 <= n <= M");
  if (!(tau > 0 && tau < 1)) throw std::invalid_argument("tau_pair: tau must lie in (0, 1)");
  Philox4x32 gen(seed, stream);
  std::normal_distribution<double> z(0.0, std::sqrt(0.5));
  TauSample s;
  s.A.resize(n, M);
  s.B.resize(n, M);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < M; ++c) {
      const double a1 = z(gen), a2 = z(gen);
      const double b1 = z(gen), b2 = z(gen);
      s.A(r, c) = {a1, a2};
      s.B(r, c) = {b1, b2};
    }
  const std::complex<double> it(0, std::sqrt(tau));
  s.X1 = (s.A - it * s.B) / std::sqrt(2.0);
  s.X2 = (s.A.adjoint() - it * s.B.adjoint()) / std::sqrt(2.0);
  return s;
}

std::pair<double, double> tau_coupling(double tau) {
  if (!(tau > 0 && tau < 1)) throw std::invalid_argument("tau_coupling: tau must lie in (0, 1)");
  return {(1 - tau) / (2 * tau), (1 + tau) / (2 * tau)};
}

std::vector<double> squared_singular_values(const Eigen::MatrixXcd& X1, const Eigen::MatrixXcd& X2) {
  if (X1.cols() != X2.rows()) throw std::invalid_argument("squared_singular_values: shapes do not conform");
  const Eigen::MatrixXcd Y = X1 * X2;
  const Eigen::MatrixXcd H = Y.adjoint() * Y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("squared_singular_values: Hermitian eigensolver did not converge");
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  for (double& x : v) x = std::max(x, 0.0);
  std::sort(v.begin(), v.end());
  return v;
}

std::string to_string(Sampler s) { return s == Sampler::coupled ? "coupled" : "tau"; }

int worker_count(int jobs) {
  int w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RMT_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      throw std::invalid_argument("RMT_LAB_THREADS must be a positive integer, got '" + std::string(env) + "'");
    w = static_cast<int>(std::min<long>(w, cap));
  }
  return std::max(1, std::min(w, jobs));
}

namespace {

// x / p as a function of the grid variable w.
double grid_map(double w) {
  const double s = w * w;
  return s * s * s * (10 - 15 * s + 6 * s * s);
}

}  // namespace

Mu2Cdf::Mu2Cdf(const Equilibrium& eq, int cells) : p_(eq.ends().p), F_(cells + 1, 0.0) {
  if (cells < 4) throw std::invalid_argument("Mu2Cdf: need at least 4 cells");
  double prev = 0;
  for (int k = 1; k <= cells; ++k) {
    const double x = k == cells ? p_ : p_ * grid_map(static_cast<double>(k) / cells);
    F_[k] = F_[k - 1] + eq.mass_on(Measure::mu2, prev, x);
    prev = x;
  }
}

double Mu2Cdf::operator()(double x) const {
  if (x <= 0) return 0.0;
  if (x >= p_) return 1.0;
  // grid_map is increasing on [0, 1]; bisection to double resolution.
  const double target = x / p_;
  double lo = 0, hi = 1;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (grid_map(mid) < target ? lo : hi) = mid;
  }
  const int cells = static_cast<int>(F_.size()) - 1;
  const double u = 0.5 * (lo + hi) * cells;
  const int k0 = std::clamp(static_cast<int>(u) - 1, 0, cells - 3);
  double v = 0;
  for (int i = 0; i < 4; ++i) {
    double w = 1;
    for (int j = 0; j < 4; ++j)
      if (j != i) w *= (u - (k0 + j)) / (i - j);
    v += w * F_[k0 + i];
  }
  return std::clamp(v, 0.0, 1.0);
}

double ks_distance_mu2(const Mu2Cdf& cdf, const std::vector<double>& sorted) {
  const double N = static_cast<double>(sorted.size());
  double d = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf(sorted[i]);
    d = std::max({d, (i + 1) / N - F, F - i / N});
  }
  return d;
}

namespace {

template <class Draw>
EnsembleStats collect(const ModelParams& params, Sampler sampler, int trials, std::uint64_t seed, Draw draw) {
  if (trials < 1) throw std::invalid_argument("run_ensemble: trials must be at least 1");
  const double n2 = static_cast<double>(params.n) * params.n;
  std::vector<std::vector<double>> per_trial(trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        std::vector<double> v = draw(static_cast<std::uint64_t>(t));
        for (double& x : v) x /= n2;
        per_trial[t] = std::move(v);
      } catch (...) {
        std::lock_guard<std::mutex> g(failure_lock);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  std::vector<std::thread> pool;
  const int w = worker_count(trials);
  for (int i = 0; i < w; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  EnsembleStats st;
  st.params = params;
  st.sampler = sampler;
  st.trials = trials;
  st.seed = seed;
  std::array<std::vector<double>, 3> trial_moments;
  for (const auto& v : per_trial) {
    std::array<double, 3> m{};
    for (double x : v) {
      m[0] += x;
      m[1] += x * x;
      m[2] += x * x * x;
    }
    for (int k = 0; k < 3; ++k) trial_moments[k].push_back(m[k] / v.size());
    st.values.insert(st.values.end(), v.begin(), v.end());
  }
  std::sort(st.values.begin(), st.values.end());
  for (int k = 0; k < 3; ++k) {
    double mean = 0;
    for (double x : trial_moments[k]) mean += x;
    mean /= trials;
    double var = 0;
    for (double x : trial_moments[k]) var += (x - mean) * (x - mean);
    st.moments[k] = mean;
    st.moment_stderr[k] = trials > 1 ? std::sqrt(var / (trials - 1) / trials) : 0.0;
  }
  st.ks_distance = ks_distance_mu2(Mu2Cdf(Equilibrium(params)), st.values);
  return st;
}

}  // namespace

EnsembleStats run_ensemble(const ModelParams& params, int trials, std::uint64_t seed) {
  validate(params);
  const int L = params.n + params.kappa, M = params.n + params.nu;
  return collect(params, Sampler::coupled, trials, seed, [&](std::uint64_t t) {
    const MatrixPair m = sample_pair(params, L, M, seed, t);
    return squared_singular_values(m.X1, m.X2);
  });
}

EnsembleStats run_tau_ensemble(int n, int nu, double tau, int trials, std::uint64_t seed) {
  const auto [a, b] = tau_coupling(tau);
  const ModelParams params = make_params(a, b, 0, nu, n);
  return collect(params, Sampler::tau, trials, seed, [&](std::uint64_t t) {
    const TauSample s = tau_pair(n, n + nu, tau, seed, t);
    return squared_singular_values(s.X1, s.X2);
  });
}

}  // namespace rmtlab
