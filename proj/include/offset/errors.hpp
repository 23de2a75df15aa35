#pragma once

#include <stdexcept>
#include <string>

namespace offset {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Violated precondition: bad dimensions, counts, or vector lengths.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Malformed or inconsistent configuration (files, rulesets, CLI input).
class InvalidConfig : public Error {
public:
  using Error::Error;
};

// Filesystem failure: missing file, unwritable path, short write.
class IoError : public Error {
public:
  using Error::Error;
};

// Inconsistent data at runtime: unknown ids, unordered logs, corrupt or
// truncated snapshots, schema mismatches.
class DataError : public Error {
public:
  using Error::Error;
};

}  // namespace offset
