#pragma once

// Internal file helpers shared by the .cpp files; not installed.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ragxlate/errors.hpp"

namespace ragxlate::detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Atomic replacement: write to a sibling temp file, then rename over the
// target. Readers never observe a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ArgumentError("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace ragxlate::detail
