/**
 * @file config.hpp
 * @brief Flat key=value run configuration shared by every CLI subcommand.
 *
 *   # comment
 *   dim = 10
 *   hidden = 64,32
 *
 * Unknown keys are rejected. Values are range-checked by the owning
 * module's validate().
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "egin/datagen.hpp"
#include "egin/trainer.hpp"

namespace egin {

struct RunConfig {
  GenConfig gen;
  TrainConfig train;

  /// Applies one `key=value` assignment. Throws ConfigError on an unknown
  /// key or an unparsable value.
  void set(std::string_view key, std::string_view value);
  void set(std::string_view assignment);

  void validate() const;

  /// Every key with its current value, one `key = value` per line, in a
  /// stable order. Parsing the output reproduces this config exactly.
  std::string resolved() const;

  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::filesystem::path& path);
  static std::vector<std::string> keys();
};

}  // namespace egin
