#pragma once

#include <stdexcept>
#include <string>

namespace ndil {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};
struct NonHermitian : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    using Error::Error;
};
struct NotPSD : Error {
    using Error::Error;
};
struct NotContraction : Error {
    using Error::Error;
};
struct TooManyOperators : Error {
    using Error::Error;
};
struct IndexOutOfMode : Error {
    using Error::Error;
};
struct OutOfDisc : Error {
    using Error::Error;
};
struct NotRegular : Error {
    using Error::Error;
};
struct TailBoundUnreachable : Error {
    using Error::Error;
};
struct NotPOVM : Error {
    using Error::Error;
};
struct PointCountMismatch : Error {
    using Error::Error;
};
struct NumericalDegeneracy : Error {
    using Error::Error;
};
struct NonCommutingInput : Error {
    using Error::Error;
};
struct ValidationFailed : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

/// Moment feasibility did not reach the requested tolerance; carries the
/// residual that was achieved so the caller can decide whether to escalate.
struct FeasibilityNotReached : Error {
    FeasibilityNotReached(const std::string& what, double residual)
        : Error(what), achieved_residual(residual) {}
    double achieved_residual;
};

} // namespace ndil
