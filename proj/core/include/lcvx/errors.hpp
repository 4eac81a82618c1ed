#pragma once

#include <stdexcept>
#include <string>

namespace lcvx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LCVX_DECLARE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

LCVX_DECLARE_ERROR(DimensionMismatch);
LCVX_DECLARE_ERROR(SymmetryError);
LCVX_DECLARE_ERROR(SingularBlock);
LCVX_DECLARE_ERROR(NotPositiveDefinite);
LCVX_DECLARE_ERROR(InternalError);
LCVX_DECLARE_ERROR(MissingBlock);
LCVX_DECLARE_ERROR(DegreeTooHigh);
LCVX_DECLARE_ERROR(GridBudgetExceeded);
LCVX_DECLARE_ERROR(NoFeasibleGridPoint);
LCVX_DECLARE_ERROR(SingularP);
LCVX_DECLARE_ERROR(DomainViolation);
LCVX_DECLARE_ERROR(SamplingFailed);
LCVX_DECLARE_ERROR(ConvergenceFailure);
LCVX_DECLARE_ERROR(NotStabilizable);
LCVX_DECLARE_ERROR(SolverFailure);
LCVX_DECLARE_ERROR(GenerationBudgetExceeded);
LCVX_DECLARE_ERROR(ParseError);
LCVX_DECLARE_ERROR(SchemaMismatch);
LCVX_DECLARE_ERROR(NoConvexification);

#undef LCVX_DECLARE_ERROR

}  // namespace lcvx
