#pragma once
// Shared fixtures: paths, a scratch directory and small builders.

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "themetrek/corpus_io.hpp"

namespace test {

inline std::filesystem::path data_dir() { return THEMETREK_TEST_DATA; }
inline std::filesystem::path toy_dir() { return data_dir() / "toy"; }

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("themetrek-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline themetrek::RatingsDataset ratings(std::vector<themetrek::Rating> r) {
  return themetrek::RatingsDataset::from_triples(std::move(r));
}

inline themetrek::ThemeAnnotationSet annotations(
    const std::map<std::string, std::vector<std::pair<std::string, themetrek::ThemeLevel>>>& tags) {
  themetrek::ThemeAnnotationSet ann;
  for (const auto& [item, list] : tags) {
    for (const auto& [theme, level] : list) ann.add(item, {theme, level});
  }
  return ann;
}

}  // namespace test
