#pragma once

#include <stdexcept>
#include <string>

namespace bistress {

// Base class for every error the engine raises on purpose.
struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Analytic function evaluated outside its domain (log of a non-positive
// value, sqrt of a negative base, ...).
struct DomainError : EngineError {
    using EngineError::EngineError;
};

// Jet order above the supported cap, or an operation that would need more
// derivative orders than the inputs carry.
struct UnsupportedOrderError : EngineError {
    using EngineError::EngineError;
};

// Metric not positive definite / not invertible at an evaluation point.
struct DegenerateMetricError : EngineError {
    using EngineError::EngineError;
};

// A map declared as a Riemannian immersion whose pullback metric does not
// match the source metric at the evaluation point.
struct NotAnIsometryError : EngineError {
    using EngineError::EngineError;
};

// Operation restricted to a specific source dimension.
struct DimensionError : EngineError {
    using EngineError::EngineError;
};

// Missing or empty quadrature mesh.
struct MeshError : EngineError {
    using EngineError::EngineError;
};

// Metric variation step leaves the cone of Riemannian metrics.
struct StepTooLargeError : EngineError {
    using EngineError::EngineError;
};

// Classification residual inside the forbidden band between the pass
// tolerance and the reject threshold.
struct InconclusiveError : EngineError {
    using EngineError::EngineError;
};

struct UnknownEntryError : EngineError {
    using EngineError::EngineError;
};

struct InvalidParamError : EngineError {
    using EngineError::EngineError;
};

struct ConfigError : EngineError {
    using EngineError::EngineError;
};

}  // namespace bistress
