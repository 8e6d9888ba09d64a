#pragma once

#include <stdexcept>
#include <string>

namespace orthosmooth {

// Coarse classification used by the CLI to pick an exit status.
enum class ErrorKind {
    Usage,      // bad configuration or parameter values
    Data,       // unreadable / malformed / too-small input
    Numerical,  // sampler or quadrature failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct SizeError : Error {
    explicit SizeError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct RankError : Error {
    explicit RankError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// Residual variance of the full model is zero: the data are an exact polynomial.
struct DegenerateFitError : Error {
    explicit DegenerateFitError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct PrecisionError : Error {
    explicit PrecisionError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace orthosmooth
