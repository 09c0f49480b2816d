#pragma once

#include <string>

#include "rmtlab/errors.hpp"

namespace rmtlab {

// Coupling strengths and dimension offsets of the two-matrix model.
// Construct through make_params so the invariants are checked.
struct ModelParams {
  double alpha = 1.0;
  double beta = 2.0;
  int kappa = 0;
  int nu = 0;
  int n = 1;

  double a() const { return alpha * alpha; }
  double b() const { return beta * beta; }
  double d() const { return beta * beta - alpha * alpha; }
};

enum class Invariant {
  nonfinite,
  alpha_nonpositive,
  alpha_ge_beta,
  kappa_negative,
  kappa_gt_nu,
  nonpositive_size,
};

std::string to_string(Invariant inv);

class RejectedParams : public Error {
 public:
  RejectedParams(Invariant which, const std::string& what)
      : Error("RejectedParams", to_string(which) + ": " + what), which_(which) {}
  Invariant which() const noexcept { return which_; }

 private:
  Invariant which_;
};

ModelParams make_params(double alpha, double beta, int kappa = 0, int nu = 0, int n = 1);

// Returns p unchanged, or throws RejectedParams naming the first violated
// invariant.
const ModelParams& validate(const ModelParams& p);

}  // namespace rmtlab
