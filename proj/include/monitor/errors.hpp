#pragma once

#include <stdexcept>
#include <string>

namespace monitor {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// A provider could not answer after the configured retries.
struct ProviderUnavailable : Error {
  using Error::Error;
};

/// Replay mode (or a caption/embedding cache) has no entry for a request.
struct CacheMiss : Error {
  using Error::Error;
};

struct OrderError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct PrefillError : Error {
  using Error::Error;
};

struct UndefinedMetric : Error {
  using Error::Error;
};

struct EmptySeries : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

}  // namespace monitor
