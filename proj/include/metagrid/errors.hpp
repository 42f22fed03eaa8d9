#pragma once

#include <stdexcept>
#include <string>

namespace metagrid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

class UnknownIdError : public Error {
 public:
  using Error::Error;
};

class EmptyGridError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class BadConfigError : public Error {
 public:
  using Error::Error;
};

class UnknownSchedulerError : public Error {
 public:
  using Error::Error;
};

class MissingColumnsError : public Error {
 public:
  using Error::Error;
};

}  // namespace metagrid
