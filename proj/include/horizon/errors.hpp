#pragma once

#include <stdexcept>
#include <string>

namespace horizon {

// Base for every error raised by the engine. CLI maps these to exit codes.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

// Propagated numerical failures carry the offending frequency where known.
class ComputeError : public Error {
  public:
    using Error::Error;
};

class DegenerateRoot : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class ZeroDenominator : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class LabelAmbiguity : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class BoundaryFrequency : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class NoHorizon : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class NullSpaceDimension : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class SingularBasis : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class InconsistentScenario : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class SigmaSingular : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class GridTooCoarse : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class NarrowbandViolated : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class NoContribution : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class ZeroGroupVelocity : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

class RangeTooNarrow : public ComputeError {
  public:
    using ComputeError::ComputeError;
};

}  // namespace horizon
