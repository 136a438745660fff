#pragma once

#include <stdexcept>
#include <string>

namespace lshart {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// A caller broke a documented precondition (e.g. mismatched dimensions).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& m) : Error("contract", m) {}
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& m) : Error("parameter", m) {}
};

/// A failure pattern could not be built (e.g. point regions cannot be placed disjointly).
class ConstructionError : public Error {
public:
    explicit ConstructionError(const std::string& m) : Error("construction", m) {}
};

/// Root finding for the initial quantization width did not bracket a solution.
class DerivationError : public Error {
public:
    explicit DerivationError(const std::string& m) : Error("derivation", m) {}
};

/// The hash tree hit its depth limit, typically because of many duplicate points.
class IndexDegeneracyError : public Error {
public:
    explicit IndexDegeneracyError(const std::string& m) : Error("index_degeneracy", m) {}
};

/// Constrained generation rejected too many consecutive draws.
class SaturationError : public Error {
public:
    explicit SaturationError(const std::string& m) : Error("saturation", m) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& m) : Error("fit", m) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace lshart
