#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

/// Grid too coarse for the requested stage/block structure (CLI exit 3).
struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

/// A velocity sampler was required but the block carries none (CLI exit 4).
struct MissingVelocityError : std::runtime_error {
    explicit MissingVelocityError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run manifest (CLI exit 2).
struct ManifestError : std::runtime_error {
    explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixlab
