#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace recdata {

class Dataset;
struct Interaction;

std::string md5_hex(std::string_view bytes);
std::string md5_file_hex(const std::filesystem::path& file);

// Shortest decimal that round-trips; integral values carry no fraction
// (5.0 renders as "5"). Used everywhere a rating or ratio becomes text, so
// digests are independent of the format a dataset travelled through.
std::string render_double(double value);
inline std::string render_rating(double value) { return render_double(value); }
std::string render_timestamp(std::int64_t value);

// Canonical byte form of a dataset, independent of in-memory order:
// interactions sorted lexicographically by (user, item, timestamp text,
// rating text), each emitted as user TAB item TAB rating TAB timestamp LF,
// absent fields as empty text, UTF-8 throughout. This form is normative for
// every checksum the library records.
std::string canonical_serialize(const Dataset& d);
std::string canonical_serialize_rows(const std::vector<Interaction>& rows);

// MD5 of canonical_serialize(d): 32 lowercase hex characters. A content
// fingerprint for integrity and versioning, not a security boundary.
std::string checksum(const Dataset& d);
std::string checksum_rows(const std::vector<Interaction>& rows);

// Indices of `rows` in the canonical sort order used by
// canonical_serialize: lexicographic on (user, item, timestamp text,
// rating text).
std::vector<std::size_t> canonical_order(const std::vector<Interaction>& rows);

}  // namespace recdata
