#pragma once

#include <stdexcept>
#include <string>

namespace spinann {

// Base of every error the library raises. The CLI maps ConfigError to exit
// code 2 and everything else to 3.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "runtime"; }
};

class ConfigError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// Argument outside the physical domain of a model (e.g. DW position off-strip).
class DomainError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class DimensionError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

// Vertical sense current large enough to drag the domain wall.
class DisturbanceError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "disturbance"; }
};

class DegenerateScaleError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_scale"; }
};

class WriteFailureError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "write_failure"; }
};

class TieError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "tie"; }
};

class SearchExhaustedError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "search_exhausted"; }
};

class GlyphError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "glyph"; }
};

// Operation issued outside its clock phase.
class PhaseError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "phase"; }
};

}  // namespace spinann
