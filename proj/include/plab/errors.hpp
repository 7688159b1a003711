#pragma once
#include <stdexcept>
#include <string>

namespace plab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pursuer and evader coincide (or are within the capture radius); the
/// pursuit ODE is singular there.
struct CaptureError : Error {
    using Error::Error;
};

/// Non-finite right-hand side, step-size underflow, or similar blow-up.
struct IntegrationError : Error {
    using Error::Error;
};

/// A reduced-system expression was evaluated inside its singular region.
struct SingularityError : Error {
    using Error::Error;
};

} // namespace plab
