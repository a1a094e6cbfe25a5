#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "capfactor/reports.hpp"

namespace capfactor::cli {

enum class Format { csv, json, both };

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Collects artifacts in memory and writes them only on commit(), each via
/// a temporary file renamed into place. Nothing is written if the command
/// fails before commit().
class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, Format format) : dir_(std::move(dir)), format_(format) {}

  void add(const std::string& name, std::string content);
  /// Writes stem.csv and/or stem.json depending on the format.
  void add_table(const std::string& stem, const Table& table);
  /// Named JSON document; always written.
  void add_json(const std::string& name, std::string content) { add(name, std::move(content)); }

  const std::map<std::string, std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }
  void commit() const;

 private:
  std::filesystem::path dir_;
  Format format_;
  std::map<std::string, std::string> files_;
};

/// Writes `content` to `path` atomically (temp file in the same directory,
/// then rename).
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace capfactor::cli
