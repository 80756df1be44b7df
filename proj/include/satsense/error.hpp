#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace satsense {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input whose statistics make an operation meaningless (e.g. zero variance).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

class UndefinedCosine : public Error {
 public:
  using Error::Error;
};

class CorruptStream : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  TrainingFailure(const std::string& what, std::vector<double> history);

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace satsense
