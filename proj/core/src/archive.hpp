#pragma once

// Internal archive helpers: whole-file reads with transparent gzip, and a
// minimal read-side ZIP extractor (stored + deflate entries) for the
// dataset registry. In-memory only; streaming archives are out of scope.

#include <filesystem>
#include <string>
#include <vector>

namespace recdata::detail {

std::string slurp_file(const std::filesystem::path& path);

bool looks_gzip(std::string_view bytes);
bool looks_zip(std::string_view bytes);

// Reads a file, gunzipping when the magic bytes say so.
std::string read_file_maybe_gzip(const std::filesystem::path& path);

std::string gunzip(std::string_view bytes);

std::vector<std::string> zip_entry_names(std::string_view archive_bytes);

// Extracts one entry by exact name. Throws io_failure when the entry is
// missing or uses an unsupported compression method.
std::string zip_extract_entry(std::string_view archive_bytes,
                              std::string_view entry_name);

}  // namespace recdata::detail
