#pragma once

#include <stdexcept>
#include <string>

namespace rfsi {

// Base class for all engine errors. Subclasses carry the failure kind in the
// type so callers can catch selectively; the message carries the diagnostics.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// mesh
struct InvalidGeometry : Error { using Error::Error; };
struct MeshGenerationFailure : Error { using Error::Error; };
struct OpenCurve : Error { using Error::Error; };
struct MultipleLoops : Error { using Error::Error; };

// ale
struct RingMismatch : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct MeshInversion : Error { using Error::Error; };

// assembly
struct QuadratureOnInvertedElement : Error { using Error::Error; };
struct InconsistentConstraint : Error { using Error::Error; };

// linsolve
struct Stagnation : Error { using Error::Error; };
struct MaxIterations : Error { using Error::Error; };
struct ZeroDiagonal : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct InnerSolveFailure : Error { using Error::Error; };

// timeloop
struct FixedPointDivergence : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };

// io
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace rfsi
