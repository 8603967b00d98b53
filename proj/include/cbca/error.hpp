#pragma once

#include <stdexcept>
#include <string>

namespace cbca {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad size, tag, range...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data (files, CSV rows, config keys).
class InputError : public Error {
 public:
  using Error::Error;
};

// Model artifact and feature table disagree on feature names or format.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// Every pixel of a frame was excluded by the masking stages.
class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

// Automatic ROI detection found no component large enough.
class NoRoiFound : public Error {
 public:
  using Error::Error;
};

// A least-squares system was rank deficient.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// A statistic is undefined for the given data (zero variance, constant target).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace cbca
