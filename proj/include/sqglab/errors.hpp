#pragma once

#include <stdexcept>
#include <string>

namespace sqg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid/cutoff mismatch between fields or between a field and a GridSpec.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration. key() names the offending entry
// (a dotted path for config documents, e.g. "sim.dt").
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace sqg
