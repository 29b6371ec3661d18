#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "recdata/dataset.hpp"
#include "recdata/format.hpp"

namespace recdata {

// Reads a dataset in source row order. Gzip-compressed files are
// decompressed transparently (detected by magic bytes, path form only).
// Empty input yields an empty dataset, not an error; malformed rows raise
// ParseError citing the 1-based line.
Dataset read_dataset(const std::filesystem::path& source,
                     const FormatSpec& spec);
Dataset read_dataset(std::istream& source, const FormatSpec& spec,
                     const std::string& source_name = "<stream>");
Dataset read_dataset_text(std::string_view text, const FormatSpec& spec,
                          const std::string& source_name = "<text>");

struct WriteResult {
  Dataset dataset;        // input plus one appended export step
  std::filesystem::path path;
  std::string file_md5;
  bool lossy = false;     // the format dropped ratings and/or timestamps
};

// Writes the dataset in the given format. The file is written to a
// temporary sibling and renamed into place, so a failure never leaves a
// half-written file. Formats that cannot carry a field the dataset has
// drop it and flag the write as lossy in the appended step.
WriteResult write_dataset(const Dataset& d, const std::filesystem::path& sink,
                          const FormatSpec& spec);

// Serializes without touching the filesystem (same bytes write_dataset
// produces).
std::string write_dataset_text(const Dataset& d, const FormatSpec& spec);

}  // namespace recdata
