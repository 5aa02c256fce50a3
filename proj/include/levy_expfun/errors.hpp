#pragma once

#include <stdexcept>
#include <string>

namespace levy_expfun {

// Two roots: bad input or a hypothesis that does not hold (CLI exit 1), and
// numerical trouble (CLI exit 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEVY_EXPFUN_ERROR(name, base)                              \
  class name : public base {                                       \
   public:                                                         \
    explicit name(const std::string& what) : base(#name ": " + what) {} \
  };

LEVY_EXPFUN_ERROR(InvalidModel, ValidationError)
LEVY_EXPFUN_ERROR(UnsupportedModel, ValidationError)
LEVY_EXPFUN_ERROR(UnsupportedIdentity, ValidationError)
LEVY_EXPFUN_ERROR(OutsideDomain, ValidationError)
LEVY_EXPFUN_ERROR(HypothesisFailure, ValidationError)
LEVY_EXPFUN_ERROR(DegenerateFactor, ValidationError)
LEVY_EXPFUN_ERROR(NoRoot, ValidationError)
LEVY_EXPFUN_ERROR(InfiniteTiltedMean, ValidationError)
LEVY_EXPFUN_ERROR(DivergentMoment, ValidationError)

LEVY_EXPFUN_ERROR(RootFindingFailure, NumericalError)
LEVY_EXPFUN_ERROR(NoConvergence, NumericalError)
LEVY_EXPFUN_ERROR(NegativeDensity, NumericalError)
LEVY_EXPFUN_ERROR(TruncationBias, NumericalError)
LEVY_EXPFUN_ERROR(NonContraction, NumericalError)
LEVY_EXPFUN_ERROR(LowEffectiveSampleSize, NumericalError)

#undef LEVY_EXPFUN_ERROR

}  // namespace levy_expfun
