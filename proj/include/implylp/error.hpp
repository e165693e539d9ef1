#pragma once

#include <stdexcept>
#include <string>

namespace implylp {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Tensor or vector dimensions do not line up with a layer.
class ShapeError : public Error {
public:
  using Error::Error;
};

class CompatibilityError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// Bad class index, bad fraction and similar argument problems.
class ArgumentError : public Error {
public:
  using Error::Error;
};

class RegionError : public Error {
public:
  using Error::Error;
};

// Raised by the ingest layer; the message carries the file path and the
// offending layer / sample.
class LoadError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace implylp
