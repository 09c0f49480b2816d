#include "rmtlab/model.hpp"

#include <cmath>
#include <sstream>

namespace rmtlab {

std::string to_string(Invariant inv) {
  switch (inv) {
    case Invariant::nonfinite: return "nonfinite";
    case Invariant::alpha_nonpositive: return "alpha_nonpositive";
    case Invariant::alpha_ge_beta: return "alpha_ge_beta";
    case Invariant::kappa_negative: return "kappa_negative";
    case Invariant::kappa_gt_nu: return "kappa_gt_nu";
    case Invariant::nonpositive_size: return "nonpositive_size";
  }
  return "unknown";
}

const ModelParams& validate(const ModelParams& p) {
  std::ostringstream msg;
  msg << "alpha=" << p.alpha << " beta=" << p.beta << " kappa=" << p.kappa
      << " nu=" << p.nu << " n=" << p.n;
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta))
    throw RejectedParams(Invariant::nonfinite, msg.str());
  if (!(p.alpha > 0.0)) throw RejectedParams(Invariant::alpha_nonpositive, msg.str());
  if (!(p.alpha < p.beta)) throw RejectedParams(Invariant::alpha_ge_beta, msg.str());
  if (p.kappa < 0) throw RejectedParams(Invariant::kappa_negative, msg.str());
  if (p.kappa > p.nu) throw RejectedParams(Invariant::kappa_gt_nu, msg.str());
  if (p.n <= 0) throw RejectedParams(Invariant::nonpositive_size, msg.str());
  return p;
}

ModelParams make_params(double alpha, double beta, int kappa, int nu, int n) {
  ModelParams p{alpha, beta, kappa, nu, n};
  validate(p);
  return p;
}

}  // namespace rmtlab
