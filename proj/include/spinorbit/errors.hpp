#pragma once

#include <stdexcept>
#include <string>

namespace spinorbit {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or value outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Bad configuration (unsupported order, malformed range, missing stage input).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// An iterative numerical procedure failed to converge.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// No sign change of the equilibrium relation inside the admissible bracket.
class NoEquilibriumError : public Error {
public:
    NoEquilibriumError(const std::string& msg, double resid_lo, double resid_hi)
        : Error(msg), residual_lo(resid_lo), residual_hi(resid_hi) {}
    double residual_lo;
    double residual_hi;
};

/// Newton solve for the Cassini state diverged.
class EquilibriumNotFoundError : public Error {
public:
    explicit EquilibriumNotFoundError(const std::string& msg) : Error(msg) {}
};

/// Singular Jacobian at the candidate equilibrium.
class DegenerateEquilibriumError : public Error {
public:
    explicit DegenerateEquilibriumError(const std::string& msg) : Error(msg) {}
};

/// Quadratic part is not a pair of harmonic oscillators (saddle or zero mode).
class NotEllipticError : public Error {
public:
    explicit NotEllipticError(const std::string& msg) : Error(msg) {}
};

/// Two quadratic frequencies coincide to working precision.
class ResonantQuadraticError : public Error {
public:
    explicit ResonantQuadraticError(const std::string& msg) : Error(msg) {}
};

/// A small divisor k.omega fell below the configured floor.
class ResonantDivisorError : public Error {
public:
    ResonantDivisorError(const std::string& msg, int k1_, int k3_, double divisor_)
        : Error(msg), k1(k1_), k3(k3_), divisor(divisor_) {}
    int k1;
    int k3;
    double divisor;
};

/// Term-count budget exceeded during series manipulation.
class ResourceError : public Error {
public:
    ResourceError(const std::string& msg, int order_reached_)
        : Error(msg), order_reached(order_reached_) {}
    int order_reached;
};

/// rho is at or beyond the convergence bound of the remainder tail.
class OutsideConvergenceError : public Error {
public:
    OutsideConvergenceError(const std::string& msg, double q_)
        : Error(msg), q(q_) {}
    double q;
};

}  // namespace spinorbit
