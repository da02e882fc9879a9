#pragma once

#include <stdexcept>
#include <string>

namespace rops {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or truncated input file (PLY, OBJ, JSON, library container).
class ParseError : public Error {
public:
    using Error::Error;
};

// Invalid mesh data or mesh-level precondition violation.
class MeshError : public Error {
public:
    using Error::Error;
};

// A sphere crop that caught no triangles; the query point is isolated.
class EmptySurfaceError : public Error {
public:
    using Error::Error;
};

// Local surface unusable for LRF/descriptor purposes (zero area,
// rank-deficient scatter, collinear point set).
class DegenerateSurfaceError : public Error {
public:
    using Error::Error;
};

// Bad parameter values or inconsistent configuration/file versions.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace rops
