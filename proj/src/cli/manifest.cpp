#include "driftweight/cli/manifest.hpp"

#include <fstream>
#include <string>

#include "driftweight/errors.hpp"
#include "driftweight/text.hpp"

namespace fs = std::filesystem;

namespace dw::cli {

std::optional<Manifest> read_manifest(const fs::path& dir) {
  const auto path = dir / kManifestName;
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = text::trim(std::string_view(line).substr(0, eq));
    const auto value = std::string(text::trim(std::string_view(line).substr(eq + 1)));
    if (key == "command") {
      m.command = value;
    } else if (key == "config_hash") {
      m.config_hash = value;
    } else if (key == "seed") {
      m.seed = static_cast<std::uint64_t>(text::parse_int(value));
    }
  }
  return m;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  const auto path = dir / kManifestName;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "command = " << m.command << '\n'
      << "config_hash = " << m.config_hash << '\n'
      << "seed = " << m.seed << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void claim_output_dir(const fs::path& dir, const Manifest& manifest, bool force) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  const auto existing = read_manifest(dir);
  if (existing && *existing != manifest && !force) {
    throw IoError(dir.string() + " holds results of a different run (config " + existing->config_hash +
                  "); pass --force to overwrite");
  }
  write_manifest(dir, manifest);
}

}  // namespace dw::cli
