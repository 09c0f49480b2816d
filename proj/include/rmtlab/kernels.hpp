#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rmtlab/model.hpp"

namespace rmtlab {

// phi_j(x) = x^((kappa+j-1)/2) I_(kappa+j-1)(2 alpha sqrt x),
// psi_k(x) = x^((nu-kappa+k-1)/2) K_(nu-kappa+k-1)(2 beta sqrt x), j, k >= 1.
double phi(const ModelParams& params, int j, double x);
double psi(const ModelParams& params, int k, double x);

// G_jk = integral over (0, inf) of phi_j psi_k, by adaptive quadrature
// after x = t^2.
double gram_entry(const ModelParams& params, int j, int k);

struct GramMatrix {
  ModelParams params;
  int n = 0;
  std::vector<double> entries;          // row-major, entries[(j-1)*n + (k-1)] = G_jk
  std::vector<long double> inverse;     // row-major inverse, solved in long double
  // 2-norm condition number after symmetric diagonal scaling to a unit
  // diagonal.
  double condition_estimate = 0.0;

  double at(int j, int k) const { return entries[(j - 1) * n + (k - 1)]; }
  long double inv(int j, int k) const { return inverse[(j - 1) * n + (k - 1)]; }
};

inline constexpr int kMaxGramSize = 12;
inline constexpr double kMaxGramCondition = 1e12;

// Throws IllConditioned for n > 12 or a condition estimate above 1e12.
GramMatrix gram_matrix(const ModelParams& params);

enum class KernelRoute { finite_n, hard_edge_limit };
std::string to_string(KernelRoute r);

struct KernelEval {
  double x = 0.0, y = 0.0, value = 0.0;
  KernelRoute route = KernelRoute::finite_n;
};

// K_n(x, y) = sum_jk phi_j(x) (G^-1)_kj psi_k(y): I-type functions in the
// first argument, K-type in the second.
KernelEval finite_n_kernel(const ModelParams& params, const GramMatrix& gram, double x, double y);

struct HardEdgeValue {
  double value = 0.0;           // Gauss-Legendre in w with u = w^3, 128 nodes
  double gauss_doubling = 0.0;  // |value - 64-node value|
  double trapezoid = 0.0;       // trapezoid rule after a tanh-sinh substitution
};

// integral over u in (0,1) of G^{1,0}_{0,3}(-; 0, -nu1, -nu2 | u x) G^{2,0}_{0,3}(-; nu1, nu2, 0 | u y).
// Throws QuadratureFailure when the node-doubled Gauss values or the two
// rules disagree by more than 1e-7 relative.
HardEdgeValue hard_edge_kernel(int nu1, int nu2, double x, double y);

struct GlobalRow {
  double x = 0.0;
  double scaled = 0.0;   // n K_n(n^2 x, n^2 x)
  double density = 0.0;  // d mu2 / dx
  double deviation = 0.0;
};

std::vector<GlobalRow> check_global_limit(const ModelParams& params, const std::vector<double>& grid);

struct HardEdgeRow {
  double x = 0.0, y = 0.0;
  double scaled = 0.0;  // finite n, see check_hard_edge
  double limit = 0.0;   // (y/x)^(kappa/2) K_{nu,kappa}(y, x)
  double deviation = 0.0;
};

// With s = n (beta^2 - alpha^2), compares (1/s) (x/y)^(kappa/2) K_n(y/s, x/s)
// against (y/x)^(kappa/2) K_{nu,kappa}(y, x). The transposition and the
// (x/y)^(kappa/2) gauge factor leave every correlation function unchanged;
// in this form the finite-n values converge to the limit.
std::vector<HardEdgeRow> check_hard_edge(const ModelParams& params, const std::vector<std::pair<double, double>>& pairs);

// Strictly decreasing sequence check used for the n-trend verdicts.
bool strictly_decreasing(const std::vector<double>& v);

}  // namespace rmtlab
