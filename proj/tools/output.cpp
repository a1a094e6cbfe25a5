#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "capfactor/error.hpp"

namespace capfactor::cli {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot write file");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(path.string(), "cannot rename into place");
  }
}

void OutputSet::add(const std::string& name, std::string content) {
  if (!files_.emplace(name, std::move(content)).second) throw Error("duplicate output file " + name);
}

void OutputSet::add_table(const std::string& stem, const Table& table) {
  if (format_ != Format::json) add(stem + ".csv", table.to_csv());
  if (format_ != Format::csv) add(stem + ".json", table.to_json());
}

void OutputSet::commit() const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError(dir_.string(), "cannot create output directory");
  for (const auto& [name, content] : files_) write_atomic(dir_ / name, content);
}

}  // namespace capfactor::cli
