#pragma once

#include <stdexcept>
#include <string>

namespace foldsim {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed document: missing/unknown keys, wrong node types, bad schema version.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cross-reference (body id, material name) does not resolve.
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// Body/joint graph is disconnected, has more than one independent cycle,
/// or a joint connects a body to itself.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// A numeric field is outside its physical domain.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Mass matrix is numerically singular (condition number above 1e12),
/// usually a zero-inertia body.
class SingularMassError : public Error {
public:
    using Error::Error;
};

/// Integration produced a non-finite state or one with entries above 1e6.
class NumericalBlowupError : public Error {
public:
    using Error::Error;
};

/// Burn-in finished with loop-closure error still above tolerance.
class BurnInFailedError : public Error {
public:
    using Error::Error;
};

/// Rotation axis is undefined because the recording never leaves zero rotation.
class DegenerateAxisError : public Error {
public:
    using Error::Error;
};

/// No usable oscillation peak in the signal spectrum.
class SpectrumError : public Error {
public:
    using Error::Error;
};

/// Least-squares design matrix is rank deficient.
class RankError : public Error {
public:
    using Error::Error;
};

} // namespace foldsim
