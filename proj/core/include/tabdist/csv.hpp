#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tabdist {

// Minimal RFC-4180-ish CSV: comma separated, optional double-quoted fields,
// CRLF tolerated, empty string = missing value.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

// Strict, locale-independent double parse (trimmed, whole-field, finite).
bool try_parse_double(const std::string& s, double& out);

// Writes atomically (temp file + rename). Fields containing comma/quote/newline
// are quoted.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Atomic whole-file text write.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tabdist
