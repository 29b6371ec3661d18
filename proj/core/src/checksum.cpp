#include "recdata/checksum.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <tuple>
#include <vector>

#include "recdata/dataset.hpp"
#include "recdata/errors.hpp"

namespace recdata {

namespace {

std::string to_hex(const unsigned char* digest, unsigned int len) {
  static const char* hex = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string md5_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_md5(),
                 nullptr) != 1) {
    fail(errc::io_failure, "MD5 digest computation failed");
  }
  return to_hex(digest, len);
}

std::string md5_file_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    fail(errc::io_failure, "cannot open '" + file.string() + "' for hashing");
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr) != 1) {
    fail(errc::io_failure, "MD5 digest initialization failed");
  }
  std::array<char, 1 << 20> buffer;
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = in.gcount();
    if (got > 0) {
      EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<size_t>(got));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  return to_hex(digest, len);
}

std::string render_double(double value) {
  // Integral values never carry a fraction, so "5.0" and "5" digest alike.
  if (std::isfinite(value) && std::abs(value) < 9.0e15 &&
      value == std::trunc(value)) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    fail(errc::io_failure, "number rendering failed");
  }
  return std::string(buf, end);
}

std::string render_timestamp(std::int64_t value) {
  return std::to_string(value);
}

namespace {

struct RowTexts {
  std::vector<std::string> rating;
  std::vector<std::string> timestamp;
};

RowTexts render_texts(const std::vector<Interaction>& rows) {
  RowTexts texts;
  texts.rating.resize(rows.size());
  texts.timestamp.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].rating) texts.rating[i] = render_rating(*rows[i].rating);
    if (rows[i].timestamp) {
      texts.timestamp[i] = render_timestamp(*rows[i].timestamp);
    }
  }
  return texts;
}

std::vector<std::size_t> order_indices(const std::vector<Interaction>& rows,
                                       const RowTexts& texts) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(rows[a].user, rows[a].item, texts.timestamp[a],
                    texts.rating[a]) < std::tie(rows[b].user, rows[b].item,
                                                texts.timestamp[b],
                                                texts.rating[b]);
  });
  return order;
}

}  // namespace

std::vector<std::size_t> canonical_order(const std::vector<Interaction>& rows) {
  return order_indices(rows, render_texts(rows));
}

std::string canonical_serialize_rows(const std::vector<Interaction>& rows) {
  const RowTexts texts = render_texts(rows);
  const std::vector<std::size_t> order = order_indices(rows, texts);

  std::size_t total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    total += rows[i].user.size() + rows[i].item.size() +
             texts.rating[i].size() + texts.timestamp[i].size() + 4;
  }

  std::string out;
  out.reserve(total);
  for (std::size_t i : order) {
    out.append(rows[i].user);
    out.push_back('\t');
    out.append(rows[i].item);
    out.push_back('\t');
    out.append(texts.rating[i]);
    out.push_back('\t');
    out.append(texts.timestamp[i]);
    out.push_back('\n');
  }
  return out;
}

std::string canonical_serialize(const Dataset& d) {
  return canonical_serialize_rows(d.interactions());
}

std::string checksum_rows(const std::vector<Interaction>& rows) {
  return md5_hex(canonical_serialize_rows(rows));
}

std::string checksum(const Dataset& d) {
  return md5_hex(canonical_serialize(d));
}

}  // namespace recdata
