#pragma once

#include <stdexcept>
#include <string>

namespace aiot {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument value (out-of-range index, empty buffer, oversize payload...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (Nyquist violations, unsupported rates, bad parameter
/// combinations). Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation issued against an object in the wrong state (e.g. unsettled PLL).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Value outside a hardware-backed range (e.g. PLL frequency bounds).
class RangeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Device class cannot perform the request (e.g. 4 Mbps in passive mode).
class CapabilityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Operation defined only for a narrower input domain (e.g. XOR shifting on
/// multi-bit sequences).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Mathematical singularity (e.g. reflection coefficient at z == -z0).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Decoder failure carrying the offending position.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& msg, long index) : Error(msg), index(index) {}
  long index;
};

/// File / text parse failure with location info.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& msg, int line) : ConfigError(msg), line(line) {}
  int line;
};

/// Register bank that cannot be translated into a command list.
class InterpretError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace aiot
