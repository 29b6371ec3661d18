#include "archive.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>

#include "recdata/errors.hpp"

namespace recdata::detail {

namespace {

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string inflate_raw(const unsigned char* data, std::size_t size,
                        std::size_t expected_size) {
  std::string out;
  out.resize(expected_size);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    fail(errc::io_failure, "zlib initialization failed");
  }
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    fail(errc::io_failure, "corrupt deflate stream in archive");
  }
  out.resize(out.size() - zs.avail_out);
  return out;
}

struct ZipEntry {
  std::string name;
  std::uint16_t method = 0;
  std::uint32_t compressed_size = 0;
  std::uint32_t uncompressed_size = 0;
  std::uint32_t local_offset = 0;
};

std::vector<ZipEntry> zip_central_directory(std::string_view bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  // End-of-central-directory record: scan backwards over the (bounded)
  // trailing comment for the signature.
  if (size < 22) fail(errc::io_failure, "not a ZIP archive (too small)");
  std::size_t eocd = std::string_view::npos;
  const std::size_t scan_limit = size >= 22 + 65535 ? size - 22 - 65535 : 0;
  for (std::size_t i = size - 22 + 1; i-- > scan_limit;) {
    if (data[i] == 0x50 && data[i + 1] == 0x4b && data[i + 2] == 0x05 &&
        data[i + 3] == 0x06) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) {
    fail(errc::io_failure, "not a ZIP archive (missing end record)");
  }

  const std::uint16_t count = read_u16(data + eocd + 10);
  const std::uint32_t cd_offset = read_u32(data + eocd + 16);

  std::vector<ZipEntry> entries;
  entries.reserve(count);
  std::size_t pos = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (pos + 46 > size || read_u32(data + pos) != 0x02014b50) {
      fail(errc::io_failure, "corrupt ZIP central directory");
    }
    ZipEntry entry;
    entry.method = read_u16(data + pos + 10);
    entry.compressed_size = read_u32(data + pos + 20);
    entry.uncompressed_size = read_u32(data + pos + 24);
    const std::uint16_t name_len = read_u16(data + pos + 28);
    const std::uint16_t extra_len = read_u16(data + pos + 30);
    const std::uint16_t comment_len = read_u16(data + pos + 32);
    entry.local_offset = read_u32(data + pos + 42);
    if (pos + 46 + name_len > size) {
      fail(errc::io_failure, "corrupt ZIP central directory");
    }
    entry.name.assign(bytes.data() + pos + 46, name_len);
    entries.push_back(std::move(entry));
    pos += 46 + name_len + extra_len + comment_len;
  }
  return entries;
}

}  // namespace

std::string slurp_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_failure, "cannot open '" + path.string() + "' for reading");
  }
  std::string out;
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  if (end > 0) {
    out.resize(static_cast<std::size_t>(end));
    in.seekg(0);
    in.read(out.data(), end);
  }
  if (in.bad()) {
    fail(errc::io_failure, "read failed on '" + path.string() + "'");
  }
  return out;
}

bool looks_gzip(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

bool looks_zip(std::string_view bytes) {
  return bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
         bytes[2] == 0x03 && bytes[3] == 0x04;
}

std::string gunzip(std::string_view bytes) {
  z_stream zs{};
  // 16 + MAX_WBITS: gzip wrapper.
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    fail(errc::io_failure, "zlib initialization failed");
  }
  std::string out;
  out.reserve(bytes.size() * 3);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  char buffer[1 << 16];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof(buffer);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail(errc::io_failure, "corrupt gzip stream");
    }
    out.append(buffer, sizeof(buffer) - zs.avail_out);
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    fail(errc::io_failure, "truncated gzip stream");
  }
  return out;
}

std::string read_file_maybe_gzip(const std::filesystem::path& path) {
  std::string bytes = slurp_file(path);
  if (looks_gzip(bytes)) return gunzip(bytes);
  return bytes;
}

std::vector<std::string> zip_entry_names(std::string_view archive_bytes) {
  std::vector<std::string> names;
  for (auto& entry : zip_central_directory(archive_bytes)) {
    names.push_back(std::move(entry.name));
  }
  return names;
}

std::string zip_extract_entry(std::string_view archive_bytes,
                              std::string_view entry_name) {
  const auto* data = reinterpret_cast<const unsigned char*>(archive_bytes.data());
  for (const auto& entry : zip_central_directory(archive_bytes)) {
    if (entry.name != entry_name) continue;

    std::size_t pos = entry.local_offset;
    if (pos + 30 > archive_bytes.size() || read_u32(data + pos) != 0x04034b50) {
      fail(errc::io_failure, "corrupt ZIP local header for '" +
                                 std::string(entry_name) + "'");
    }
    const std::uint16_t name_len = read_u16(data + pos + 26);
    const std::uint16_t extra_len = read_u16(data + pos + 28);
    pos += 30 + name_len + extra_len;
    if (pos + entry.compressed_size > archive_bytes.size()) {
      fail(errc::io_failure, "truncated ZIP entry '" + std::string(entry_name) +
                                 "'");
    }
    if (entry.method == 0) {
      return std::string(archive_bytes.substr(pos, entry.compressed_size));
    }
    if (entry.method == 8) {
      return inflate_raw(data + pos, entry.compressed_size,
                         entry.uncompressed_size);
    }
    fail(errc::io_failure, "unsupported ZIP compression method " +
                               std::to_string(entry.method) + " for '" +
                               std::string(entry_name) + "'");
  }
  fail(errc::io_failure, "entry '" + std::string(entry_name) +
                             "' not found in archive");
}

}  // namespace recdata::detail
