#include "doctest.h"
#include "rmtlab/model.hpp"

using namespace rmtlab;

TEST_CASE("accepts admissible parameters unchanged") {
  ModelParams p{1.0, 2.0, 0, 0, 4};
  const ModelParams& v = validate(p);
  CHECK(&v == &p);
  const ModelParams& w = validate(validate(p));
  CHECK(w.alpha == 1.0);
  CHECK(w.n == 4);
}

static Invariant rejected(ModelParams p) {
  try {
    validate(p);
  } catch (const RejectedParams& e) {
    return e.which();
  }
  FAIL("expected rejection");
  return Invariant::nonfinite;
}

TEST_CASE("rejects each violated invariant by name") {
  CHECK(rejected({2.0, 1.0, 0, 0, 4}) == Invariant::alpha_ge_beta);
  CHECK(rejected({2.0, 2.0, 0, 0, 4}) == Invariant::alpha_ge_beta);
  CHECK(rejected({1.0, 2.0, 3, 1, 4}) == Invariant::kappa_gt_nu);
  CHECK(rejected({1.0, 2.0, 0, 0, 0}) == Invariant::nonpositive_size);
  CHECK(rejected({0.0, 2.0, 0, 0, 4}) == Invariant::alpha_nonpositive);
  CHECK(rejected({1.0, 2.0, -1, 0, 4}) == Invariant::kappa_negative);
  CHECK(rejected({1.0, 1.0 / 0.0, 0, 0, 4}) == Invariant::nonfinite);
  CHECK(to_string(Invariant::kappa_gt_nu) == "kappa_gt_nu");
}
