#pragma once

#include <stdexcept>
#include <string>

namespace geomatch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidShape : public Error {
  using Error::Error;
};

class DegenerateSimplex : public Error {
 public:
  DegenerateSimplex(int simplex, double measure);
  int simplex() const { return simplex_; }

 private:
  int simplex_;
};

class NotARotation : public Error {
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedFormat : public Error {
  using Error::Error;
};

class DimensionMismatch : public Error {
  using Error::Error;
};

class KindMismatch : public Error {
  using Error::Error;
};

class OrderTooHigh : public Error {
  using Error::Error;
};

class NotImmersed : public Error {
 public:
  NotImmersed(double t, double theta, double speed);
  double t() const { return t_; }
  double theta() const { return theta_; }

 private:
  double t_;
  double theta_;
};

class NonFiniteState : public Error {
 public:
  explicit NonFiniteState(int step);
  int step() const { return step_; }

 private:
  int step_;
};

class NonFiniteObjective : public Error {
  using Error::Error;
};

class FitError : public Error {
  using Error::Error;
};

/// Invalid or unknown configuration entry; `key()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace geomatch
