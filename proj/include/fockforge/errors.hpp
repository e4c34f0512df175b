#pragma once

#include <stdexcept>
#include <string>

namespace fockforge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (CLI exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during a simulation (CLI exit code 3).
class SimulationError : public Error {
public:
    using Error::Error;
};

class CutoffTooSmall : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IndexOutOfRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NegativeDuration : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DepthMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InfeasiblePartition : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class LeakageExceeded : public SimulationError {
public:
    LeakageExceeded(double population, double tolerance)
        : SimulationError("guard-band population " + std::to_string(population) +
                          " exceeds tolerance " + std::to_string(tolerance)),
          population_(population) {}
    double population() const noexcept { return population_; }

private:
    double population_;
};

class ZeroProbability : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class NoConvergence : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class TraceDrift : public SimulationError {
public:
    using SimulationError::SimulationError;
};

}  // namespace fockforge
