#pragma once

#include <stdexcept>
#include <string>

namespace hhgdis {

// Exit codes shared with the command-line driver.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  missing_artifact = 3,
  numerical_failure = 4,
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual ExitCode code() const noexcept { return ExitCode::numerical_failure; }
};

struct ConfigError : Error {
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::config_error; }
};

struct MissingArtifact : Error {
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::missing_artifact; }
};

struct NumericalError : Error {
  using Error::Error;
};

// Input data that cannot be processed (empty sets, misaligned axes, ...).
struct DataError : Error {
  using Error::Error;
};

}  // namespace hhgdis
