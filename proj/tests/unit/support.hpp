#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "converge/corpus.hpp"

namespace test_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CONVERGE_FIXTURE_DIR) / name;
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("converge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Byte-for-byte comparison of two directory trees.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* diff = nullptr) {
  namespace fs = std::filesystem;
  std::vector<std::string> names_a, names_b;
  for (const auto& e : fs::recursive_directory_iterator(a)) names_a.push_back(fs::relative(e.path(), a).string());
  for (const auto& e : fs::recursive_directory_iterator(b)) names_b.push_back(fs::relative(e.path(), b).string());
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b) {
    if (diff) *diff = "file lists differ";
    return false;
  }
  for (const auto& n : names_a) {
    if (fs::is_directory(a / n)) continue;
    if (converge::read_file(a / n) != converge::read_file(b / n)) {
      if (diff) *diff = n;
      return false;
    }
  }
  return true;
}

}  // namespace test_support
