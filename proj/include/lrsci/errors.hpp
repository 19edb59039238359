#pragma once

#include <stdexcept>
#include <string>

namespace lrsci {

/// Bad shapes, out-of-range ranks, malformed configuration.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A dense oracle was requested for an instance above its size cap.
class ResourceLimit : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerically rank-deficient or otherwise degenerate input.
class DegenerateInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf detected in iterates. Subclasses carry the partial trace/log.
class Diverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File container violations (bad magic, short payload, dtype mismatch).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace lrsci
