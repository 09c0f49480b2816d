#pragma once

#include <stdexcept>
#include <string>

namespace rmtlab {

// Base of every failure raised by the library. `kind()` is a stable short
// name used by the CLI when reporting errors.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RMTLAB_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

RMTLAB_DEFINE_ERROR(ConsistencyFailure)
RMTLAB_DEFINE_ERROR(NearBranchPoint)
RMTLAB_DEFINE_ERROR(PoleAtInfinitySheet)
RMTLAB_DEFINE_ERROR(NoConvergence)
RMTLAB_DEFINE_ERROR(SideFlip)
RMTLAB_DEFINE_ERROR(OutsideSupport)
RMTLAB_DEFINE_ERROR(QuadratureFailure)
RMTLAB_DEFINE_ERROR(ViolationDetected)
RMTLAB_DEFINE_ERROR(Overflow)
RMTLAB_DEFINE_ERROR(Underflow)
RMTLAB_DEFINE_ERROR(PoleHit)
RMTLAB_DEFINE_ERROR(ContourQuadratureDivergence)
RMTLAB_DEFINE_ERROR(IllConditioned)
RMTLAB_DEFINE_ERROR(EigenFailure)

#undef RMTLAB_DEFINE_ERROR

}  // namespace rmtlab
