#pragma once

#include <stdexcept>
#include <string>

namespace orthant {

// Base class for all exceptions thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: unparsable rationals, bad JSON, invalid distributions.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// A precondition on the mathematical domain of an operation was violated.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Restriction of a distribution to a subspace carrying zero mass.
class ZeroMassError : public DomainError {
public:
    explicit ZeroMassError(const std::string& what) : DomainError(what) {}
};

// A point expected to lie in the reduced subspace V does not.
class NotInVError : public DomainError {
public:
    explicit NotInVError(const std::string& what) : DomainError(what) {}
};

// A point expected to lie in the nonnegative orthant does not.
class NotInOrthantError : public DomainError {
public:
    explicit NotInOrthantError(const std::string& what) : DomainError(what) {}
};

// A lattice (integer-coordinate) walk was required.
class NotLatticeError : public DomainError {
public:
    explicit NotLatticeError(const std::string& what) : DomainError(what) {}
};

// A point expected to belong to a standard polyhedron does not.
class NotInPError : public DomainError {
public:
    explicit NotInPError(const std::string& what) : DomainError(what) {}
};

// A point expected to be minimal in its polyhedron is not.
class NotMinimalError : public DomainError {
public:
    explicit NotMinimalError(const std::string& what) : DomainError(what) {}
};

// A point expected to belong to an extended polyhedron does not.
class NotInEPError : public DomainError {
public:
    explicit NotInEPError(const std::string& what) : DomainError(what) {}
};

// A dynamic-programming state space exceeded the hard cap.
class StateExplosionError : public DomainError {
public:
    explicit StateExplosionError(const std::string& what) : DomainError(what) {}
};

// A combinatorial enumeration was requested past its size cap.
class TooLargeError : public DomainError {
public:
    explicit TooLargeError(const std::string& what) : DomainError(what) {}
};

// Mismatched vector/matrix dimensions.
class DimensionError : public DomainError {
public:
    explicit DimensionError(const std::string& what) : DomainError(what) {}
};

// A floating-point result exceeded the representable range; reported, never
// silently saturated.
class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& what) : Error(what) {}
};

// An iterative procedure hit its iteration cap before reaching tolerance.
class NoConvergenceError : public Error {
public:
    explicit NoConvergenceError(const std::string& what) : Error(what) {}
};

} // namespace orthant
