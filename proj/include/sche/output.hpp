#pragma once

// CSV artifacts: '#'-prefixed metadata header (format marker, file kind,
// config hash, full config echo) followed by comma-separated rows with LF
// line endings.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace sche {

/// Git blob hash (SHA-1 of "blob <len>\0<content>") as lowercase hex.
inline std::string git_blob_hash(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string config_hash(const RunConfig& cfg) { return git_blob_hash(serialize_config(cfg)); }

/// Metadata block written at the top of every output file.
inline std::string metadata_header(const RunConfig& cfg, std::string_view file_kind) {
  std::string out(kOutputMarker);
  out += "\n# file = ";
  out += file_kind;
  out += "\n# config_hash = " + config_hash(cfg) + "\n";
  const std::string body = serialize_config(cfg);
  std::size_t start = 0;
  while (start < body.size()) {
    const auto nl = body.find('\n', start);
    out += "# " + body.substr(start, nl - start) + "\n";
    start = nl + 1;
  }
  return out;
}

/// Shortest round-trip-safe decimal form used for CSV cells.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const RunConfig& cfg, std::string_view file_kind,
            const std::vector<std::string>& columns)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << metadata_header(cfg, file_kind);
    write_row(columns);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  /// Trailing comment line, e.g. a fitted slope.
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  const std::filesystem::path& path() const noexcept { return path_; }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sche
