#include "tabdist/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"

namespace tabdist {

std::filesystem::path prepare_run_dir(const std::filesystem::path& out, bool force) {
  std::error_code ec;
  if (std::filesystem::exists(out, ec)) {
    if (!force) {
      throw ConfigError("output directory already exists (use --force to overwrite): " +
                        out.string());
    }
    if (!std::filesystem::is_directory(out, ec)) {
      throw ConfigError("output path exists and is not a directory: " + out.string());
    }
    return out;
  }
  if (!std::filesystem::create_directories(out, ec) || ec) {
    throw DataError("cannot create output directory: " + out.string());
  }
  return out;
}

void snapshot_config(const std::filesystem::path& config_path,
                     const std::filesystem::path& run_dir) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + config_path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  write_text_atomic(run_dir / "config.ini", buf.str());
}

void write_manifest(const std::filesystem::path& run_dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "manifest.json") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::object();
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
      throw DataError("cannot read artifact for hashing: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    manifest["files"][file.filename().string()] = {
        {"bytes", bytes.size()}, {"fnv1a64", to_hex(fnv1a64(bytes.data(), bytes.size()))}};
  }
  write_text_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace tabdist
