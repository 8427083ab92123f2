#pragma once

#include <stdexcept>
#include <string>

namespace binclust {

// Base type for every error thrown by this library. Subtypes exist where
// callers (and tests) need to tell failure modes apart.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedRow final : Error {
  MalformedRow(std::size_t line, const std::string& reason)
      : Error("malformed row at line " + std::to_string(line) + ": " + reason),
        line(line) {}
  std::size_t line;
};

struct SchemaMismatch final : Error {
  SchemaMismatch(std::size_t expected, std::size_t found)
      : Error("schema mismatch: expected " + std::to_string(expected) +
              " feature columns, found " + std::to_string(found)),
        expected(expected),
        found(found) {}
  std::size_t expected;
  std::size_t found;
};

struct EmptyDataset final : Error {
  using Error::Error;
};

struct IndexOutOfRange final : Error {
  using Error::Error;
};

struct DegenerateSplit final : Error {
  using Error::Error;
};

struct InvalidSpec final : Error {
  using Error::Error;
};

struct TooFewSamples final : Error {
  using Error::Error;
};

struct DimensionMismatch final : Error {
  using Error::Error;
};

struct InvalidK final : Error {
  using Error::Error;
};

struct NonFiniteLoss final : Error {
  using Error::Error;
};

struct SubsetTooSmall final : Error {
  using Error::Error;
};

struct LengthMismatch final : Error {
  using Error::Error;
};

struct EmptyAfterDrop final : Error {
  using Error::Error;
};

struct IoError final : Error {
  using Error::Error;
};

struct ConfigError final : Error {
  using Error::Error;
};

}  // namespace binclust
