#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace dw::cli {

/// What produced an output directory. Deliberately free of timestamps so identical
/// reruns leave identical bytes behind.
struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const Manifest&) const = default;
};

inline constexpr const char* kManifestName = "manifest.txt";

std::optional<Manifest> read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

/// Creates `dir` if needed. A manifest from a different config (or command) is an IoError
/// unless `force` is set, in which case it is replaced.
void claim_output_dir(const std::filesystem::path& dir, const Manifest& manifest, bool force);

}  // namespace dw::cli
