#pragma once

#include <stdexcept>
#include <string>

namespace relmaup {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define RELMAUP_DEFINE_ERROR(Name)                   \
    class Name : public Error {                      \
    public:                                          \
        explicit Name(const std::string& what)       \
            : Error(std::string(#Name ": ") + what) {} \
    };

// potentials / loopspace
RELMAUP_DEFINE_ERROR(CollisionPoint)
RELMAUP_DEFINE_ERROR(OutsideHillRegion)
RELMAUP_DEFINE_ERROR(InvalidConfig)

// homotopy
RELMAUP_DEFINE_ERROR(AmbiguousWinding)
RELMAUP_DEFINE_ERROR(SampleOnCut)
RELMAUP_DEFINE_ERROR(AmbiguousCrossing)
RELMAUP_DEFINE_ERROR(InvalidDilation)
RELMAUP_DEFINE_ERROR(InvalidWord)

// optimizer
RELMAUP_DEFINE_ERROR(ClassEscape)
RELMAUP_DEFINE_ERROR(InvalidEnergy)
RELMAUP_DEFINE_ERROR(InvalidExponent)
RELMAUP_DEFINE_ERROR(SeedConstructionFailed)

// reparam
RELMAUP_DEFINE_ERROR(DegenerateLoop)
RELMAUP_DEFINE_ERROR(NonMonotoneTime)
RELMAUP_DEFINE_ERROR(EnergyLawViolated)

// integrator
RELMAUP_DEFINE_ERROR(SuperluminalInput)

// circular
RELMAUP_DEFINE_ERROR(NoCircularOrbit)
RELMAUP_DEFINE_ERROR(BracketFailure)
RELMAUP_DEFINE_ERROR(RootNotBracketed)

#undef RELMAUP_DEFINE_ERROR

}  // namespace relmaup
