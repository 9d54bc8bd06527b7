#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sisnet {

std::string software_version();

/// Hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written next to every command's outputs.
///
/// Serialized as TOML-style `key = value` lines; nothing time- or
/// host-dependent is recorded, so identical runs give identical manifests.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  /// Effective configuration in a fixed key order.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  /// Command-specific results (e.g. kept sample counts).
  std::vector<std::pair<std::string, std::string>> results;

  /// Digest of the canonical `key = value` rendering of `config`.
  std::string config_digest() const;
  std::string render() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace sisnet
