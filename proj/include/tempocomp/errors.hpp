#pragma once

#include <stdexcept>

namespace tempocomp {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// Dimension/Range/Config/Format/Data exit with 2, Calibration/Numeric with 3.
// Usage errors never reach the library; the argv parser handles them (exit 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tempocomp
