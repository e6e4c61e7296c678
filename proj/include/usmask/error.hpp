#pragma once

#include <stdexcept>
#include <string>

namespace usmask {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// No foreground pixels, or no patch reaching the coverage threshold.
class EmptyRoi : public Error {
 public:
  using Error::Error;
};

// Every patch has coverage <= tau, so the polar score sums to zero.
class DegeneratePrior : public Error {
 public:
  using Error::Error;
};

class InvalidMaskRatio : public Error {
 public:
  using Error::Error;
};

// Bad configuration or manifest; aborts a batch before processing.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace usmask
