#pragma once

#include <filesystem>

namespace tabdist {

// Creates the run directory. An existing directory is refused unless force
// is set (files inside are then overwritten atomically, never deleted).
std::filesystem::path prepare_run_dir(const std::filesystem::path& out, bool force);

// Copies the config file bytes into the run directory as config.ini.
void snapshot_config(const std::filesystem::path& config_path,
                     const std::filesystem::path& run_dir);

// Writes manifest.json listing every regular file in the run directory
// (sorted by name) with byte size and FNV-1a content hash.
void write_manifest(const std::filesystem::path& run_dir);

}  // namespace tabdist
