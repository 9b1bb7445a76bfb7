#pragma once

#include <stdexcept>
#include <string>

namespace entrolab {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeRateError : Error { using Error::Error; };
struct TargetOutsideSpaceError : Error { using Error::Error; };
struct ReducibleError : Error { using Error::Error; };
struct MissingInverseError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct NonPositiveFError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct FormMismatchError : Error { using Error::Error; };
struct DegenerateCurveError : Error { using Error::Error; };
struct EigenFailureError : Error { using Error::Error; };
struct FiniteDifferenceMismatchError : Error { using Error::Error; };
struct UnknownSeedError : Error { using Error::Error; };
struct NegativeCouplingRateError : Error { using Error::Error; };
struct InadmissibleCouplingError : Error { using Error::Error; };
struct HypothesisViolationError : Error { using Error::Error; };
struct HessianSignViolationError : Error { using Error::Error; };
struct NoSuchMError : Error { using Error::Error; };
struct ConditionFailedError : Error { using Error::Error; };
struct NonSimpleGraphError : Error { using Error::Error; };
struct InvalidParamsError : Error { using Error::Error; };
struct InfeasibleMarginalsError : Error { using Error::Error; };
struct TimeTooLargeError : Error { using Error::Error; };
struct MassLeakError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct SchemaMismatchError : Error { using Error::Error; };

}  // namespace entrolab
