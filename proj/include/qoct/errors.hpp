#pragma once

#include <stdexcept>
#include <string>

namespace qoct {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands with incompatible dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A value violated a construction invariant (non-finite entries,
/// unnormalized state, non-Hermitian matrix, bad grid parameters, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Lowest eigenvalue not separated from the rest of the spectrum.
class DegenerateGroundStateError : public Error {
public:
    using Error::Error;
};

/// Energy spread of the reference state vanishes; no finite speed-limit time.
class ZeroSpreadError : public Error {
public:
    using Error::Error;
};

/// A scan grid did not bracket the feature being located.
class UnbracketedError : public Error {
public:
    using Error::Error;
};

/// Every duration in a threshold scan failed to reach the target.
/// Carries the best (time, infidelity) pair observed.
class ScanFailedError : public Error {
public:
    ScanFailedError(const std::string& what, double best_time, double best_infidelity)
        : Error(what), best_time(best_time), best_infidelity(best_infidelity) {}
    double best_time;
    double best_infidelity;
};

/// The pulse update produced non-finite values or monotonicity could not be
/// restored by increasing the step weights.
class UpdateError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while writing experiment outputs.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace qoct
