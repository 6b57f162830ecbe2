#pragma once

#include <stdexcept>
#include <string>

namespace hlik {

// Base for all numeric failures; CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Subdivision/iteration budget exhausted before the tolerance was met.
struct NonConvergent : NumericError {
    using NumericError::NumericError;
};

// An evaluation produced NaN or +/-inf where a finite value was required.
struct NonFinite : NumericError {
    using NumericError::NumericError;
};

struct OutOfSupport : NumericError {
    using NumericError::NumericError;
};

// h(theta, .) has no interior stationary maximum in v.
struct NoInteriorMode : NumericError {
    using NumericError::NumericError;
};

struct HessianNotNegDef : NumericError {
    using NumericError::NumericError;
};

// Audit requested on a model whose unobservable support depends on theta.
struct NotApplicable : NumericError {
    using NumericError::NumericError;
};

struct EmptyCatalogResult : NumericError {
    using NumericError::NumericError;
};

struct ImproperPosterior : NumericError {
    using NumericError::NumericError;
};

struct Unsupported : NumericError {
    using NumericError::NumericError;
};

// Configuration/usage problems; CLI maps these to exit code 2.
struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hlik
