#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace egin {

using EntityId = std::uint64_t;
using Timestamp = std::int64_t;
using CategoryId = std::uint32_t;

/// Random engine used everywhere a seeded draw is required.
using Rng = std::mt19937_64;

enum class EntityType : std::uint8_t { Item = 0, Query = 1, Bin = 2, Position = 3 };

std::string_view to_string(EntityType type);
EntityType entity_type_from_string(std::string_view text);

// Error taxonomy. Everything derives from Error so callers at the CLI
// boundary can report a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : Error("invalid config field '" + field + "': " + reason), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class NotWarmedUp : public Error {
 public:
  using Error::Error;
};

/// splitmix64 finalizer; used to derive order-independent per-id seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace egin
