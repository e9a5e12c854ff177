#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfsr/solver.hpp"

namespace mfsr {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` settings mapped onto a ReconstructionConfig.
/// Blank lines and text after '#' are ignored. Later assignments win.
/// Unknown keys and unparsable values throw ConfigError.
class RunConfig {
public:
  RunConfig() = default;
  explicit RunConfig(ReconstructionConfig cfg) : cfg_(std::move(cfg)) {}

  void set(std::string_view key, std::string_view value);
  /// Parses "key=value".
  void set_assignment(std::string_view assignment);
  void load_file(const std::filesystem::path& path);
  void load_string(std::string_view text, std::string_view origin = "<string>");

  const ReconstructionConfig& config() const noexcept { return cfg_; }
  ReconstructionConfig& config() noexcept { return cfg_; }

  /// Every key with its resolved value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  static const std::vector<std::string>& keys();
  /// Closest known key by edit distance, or empty if none is close.
  static std::string suggest(std::string_view unknown);

private:
  ReconstructionConfig cfg_;
};

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace mfsr
