#pragma once

#include <stdexcept>
#include <string>

namespace posekan {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// graph-core
struct IsolatedJointError : Error { using Error::Error; };
struct IndexOutOfRangeError : Error { using Error::Error; };
struct SelfLoopError : Error { using Error::Error; };
struct ScalingOutOfRangeError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct SingularFrequencyError : Error { using Error::Error; };

// kan-layer
struct NonFiniteInputError : Error { using Error::Error; };
struct StaleCacheError : Error { using Error::Error; };
struct BadDimensionsError : Error { using Error::Error; };

// model / checkpoint
struct BadConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct VersionMismatchError : Error { using Error::Error; };
struct CorruptChecksumError : Error { using Error::Error; };

// training
struct NonFiniteGradientError : Error { using Error::Error; };
struct NonFiniteLossError : Error { using Error::Error; };
struct MissingGroundTruthError : Error { using Error::Error; };

// data / metrics
struct ParseError : Error { using Error::Error; };
struct JointCountMismatchError : Error { using Error::Error; };
struct NonFiniteValueError : Error { using Error::Error; };
struct BadImageDimsError : Error { using Error::Error; };
struct DegenerateConfigurationError : Error { using Error::Error; };

}  // namespace posekan
