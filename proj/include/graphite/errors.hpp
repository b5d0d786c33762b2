#pragma once

#include <stdexcept>
#include <string>

namespace graphite {

/// Base class for all recoverable graphite errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : Error {
  using Error::Error;
};
struct NonPositiveWidth : Error {
  using Error::Error;
};
struct DegenerateTangent : Error {
  using Error::Error;
};
struct DegenerateTip : Error {
  using Error::Error;
};
struct EmptyDepths : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct NoContact : Error {
  using Error::Error;
};
struct OutOfBounds : Error {
  using Error::Error;
};
struct InfeasibleStart : Error {
  using Error::Error;
};
struct CanvasOverflow : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct EmptyMask : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace graphite
