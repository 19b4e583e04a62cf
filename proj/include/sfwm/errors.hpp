#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sfwm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation or configuration (CLI exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public UsageError {
 public:
  ConfigError(std::string key, const std::string& what)
      : UsageError("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Inputs that cannot be processed (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class GridError : public DataError {
 public:
  using DataError::DataError;
};

class FlatProfileError : public DataError {
 public:
  using DataError::DataError;
};

class NoCrossingError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedProbabilityError : public DataError {
 public:
  using DataError::DataError;
};

class RankDeficientError : public DataError {
 public:
  using DataError::DataError;
};

class NegativeLogArgumentError : public DataError {
 public:
  using DataError::DataError;
};

class OutOfBandError : public DataError {
 public:
  using DataError::DataError;
};

class NegativeRadicandError : public DataError {
 public:
  using DataError::DataError;
};

class NoPeakError : public DataError {
 public:
  using DataError::DataError;
};

class MissingSettingError : public DataError {
 public:
  MissingSettingError(const std::string& what, std::vector<std::string> missing)
      : DataError(what), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// Optimizer did not produce a usable answer (CLI exit code 3).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_point = {})
      : Error(what), best_(std::move(best_point)) {}
  const std::vector<double>& best_point() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

class UnidentifiableError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace sfwm
