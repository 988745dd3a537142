#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace twinbeam {

inline constexpr const char* kToolVersion = "1.0.0";

/// Reproducibility record written next to every command's outputs: the exact
/// config, the seed, per-stage wall times and a checksum per emitted file.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_text;
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::vector<std::string> output_files;

  void write(const std::string& path) const;
};

/// FNV-1a 64-bit checksum of a file's bytes, as a hex string.
std::string file_checksum_hex(const std::string& path);

/// Verifies every checksum recorded in a manifest file against the files on
/// disk; returns the list of mismatching paths (empty when clean).
std::vector<std::string> verify_manifest(const std::string& manifest_path);

/// Entry point behind the CLI. Returns 0 on success, 1 on a stage failure
/// (diagnostic on stderr), 2 on a usage error (usage text on stderr).
int run_pipeline(const std::vector<std::string>& args);

/// Parses "a:b:n" into n linearly spaced values from a to b inclusive.
std::vector<double> parse_range(const std::string& spec);

}  // namespace twinbeam
