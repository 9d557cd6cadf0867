#pragma once

#include <stdexcept>
#include <string>

namespace perfospec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct NonSimpleCurve : Error { using Error::Error; };

// mesh
struct GeometryError : Error { using Error::Error; };
struct RefinementStall : Error { using Error::Error; };

// fem
struct SingularElement : Error { using Error::Error; };
struct OutsideDomain : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// eigensolver
struct FactorizationFailure : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// kernels
struct CoincidentPoints : Error { using Error::Error; };
struct OutsideDisk : Error { using Error::Error; };
struct OutsideValidity : Error { using Error::Error; };

// asymptotics
struct RootNotBracketed : Error { using Error::Error; };
struct DegenerateMode : Error { using Error::Error; };

// study
struct AmbiguousMatch : Error { using Error::Error; };
struct IllConditionedFit : Error { using Error::Error; };

}  // namespace perfospec
