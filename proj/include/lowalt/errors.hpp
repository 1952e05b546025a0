#pragma once

#include <stdexcept>
#include <string>

namespace lowalt {

// Thrown when rejection sampling gives up (crowded map, impossible constraint).
struct SamplingExhausted : std::runtime_error {
  explicit SamplingExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct OutsideArea : std::runtime_error {
  explicit OutsideArea(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateGeometry : std::runtime_error {
  explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

// step() called after the episode already terminated.
struct EpisodeFinished : std::runtime_error {
  explicit EpisodeFinished(const std::string& what) : std::runtime_error(what) {}
};

// Tensor/layer dimensions do not line up (bad checkpoint, wrong net for env).
struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Serialized document has an unknown or incompatible format version.
struct VersionMismatch : std::runtime_error {
  explicit VersionMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Resume attempted with settings that contradict the checkpointed run.
struct ConfigMismatch : std::runtime_error {
  explicit ConfigMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct BufferTooSmall : std::runtime_error {
  explicit BufferTooSmall(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input document (config, checkpoint, log, fixture).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input whose values violate a documented constraint.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyDenominator : std::runtime_error {
  explicit EmptyDenominator(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lowalt
