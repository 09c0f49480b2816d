#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rmtlab/model.hpp"

namespace rmtlab {

class Equilibrium;

// Philox4x32-10 counter-based generator. The 64-bit key is the seed and the
// upper half of the 128-bit counter is the stream id, so every (seed, stream)
// pair owns an independent, replayable sequence.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  Philox4x32(std::uint64_t seed, std::uint64_t stream);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // One block of the raw bijection, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> out_{};
  int used_ = 4;
};

struct MatrixPair {
  Eigen::MatrixXcd X1, X2;
};

// Exact draw from the coupled Gaussian density with Omega = alpha [I_n 0].
// L = n + kappa and M = n + nu, checked against params.
MatrixPair sample_pair(const ModelParams& params, int L, int M, std::uint64_t seed, std::uint64_t stream = 0);

struct TauSample {
  Eigen::MatrixXcd X1, X2, A, B;
};

// X1 = (A - i sqrt(tau) B)/sqrt 2, X2 = (A* - i sqrt(tau) B*)/sqrt 2 with
// A, B independent n x M standard complex Gaussian (E|a|^2 = 1).
TauSample tau_pair(int n, int M, double tau, std::uint64_t seed, std::uint64_t stream = 0);

// (alpha, beta) = ((1 - tau)/(2 tau), (1 + tau)/(2 tau)).
std::pair<double, double> tau_coupling(double tau);

// Eigenvalues of (X1 X2)* (X1 X2), clamped at 0, ascending.
std::vector<double> squared_singular_values(const Eigen::MatrixXcd& X1, const Eigen::MatrixXcd& X2);

enum class Sampler { coupled, tau };
std::string to_string(Sampler s);

struct EnsembleStats {
  ModelParams params;
  Sampler sampler = Sampler::coupled;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // squared singular values / n^2, ascending
  double ks_distance = 0.0;    // against the CDF of mu2
  // Empirical moments of the scaled values and their standard errors from
  // the spread of the per-trial averages.
  std::array<double, 3> moments{};
  std::array<double, 3> moment_stderr{};
};

// Worker count: hardware concurrency, capped by RMT_LAB_THREADS when set and
// by the number of jobs.
int worker_count(int jobs);

// Trial t uses stream t under the given seed; trials run concurrently and are
// merged in trial order, so the result does not depend on scheduling.
EnsembleStats run_ensemble(const ModelParams& params, int trials, std::uint64_t seed);

// Same with tau_pair draws (n x M, M = n + nu); params are the mapped
// (alpha, beta) with kappa = 0.
EnsembleStats run_tau_ensemble(int n, int nu, double tau, int trials, std::uint64_t seed);

// CDF of mu2. Cell masses are integrated exactly on the grid
// x = p phi(w^2), w = k/cells, phi(s) = s^3 (10 - 15 s + 6 s^2); in between,
// 4-point Lagrange interpolation in w. Near 0 the CDF grows like x^(1/3),
// which is w^2; the squared variable also resolves the crossover at
// x ~ (beta^2 - alpha^2)^2 / beta^6, far below p when alpha is near beta.
class Mu2Cdf {
 public:
  explicit Mu2Cdf(const Equilibrium& eq, int cells = 512);
  double operator()(double x) const;
  double p() const { return p_; }

 private:
  double p_;
  std::vector<double> F_;
};

// Kolmogorov-Smirnov distance between ascending samples and the mu2 law.
double ks_distance_mu2(const Mu2Cdf& cdf, const std::vector<double>& sorted);

}  // namespace rmtlab
