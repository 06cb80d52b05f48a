#pragma once

#include <stdexcept>
#include <string>

namespace rudder {

/// Invalid or inconsistent input (config file, planes, layout schema).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degenerate stiffener or domain geometry.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constrained triangulation or extrusion failed.
class MeshingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular system, failed factorization, eigen solver breakdown.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File output failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rudder
