#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "erase/corpus.hpp"

namespace testutil {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("erase-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Corpus with ids 1..n, one embedding row per id.
inline erase::Corpus corpus_from_rows(const std::vector<std::vector<float>>& rows) {
  std::vector<erase::Example> examples;
  std::vector<erase::EmbeddedExample> emb;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const erase::ExampleId id = i + 1;
    examples.push_back({id, "in" + std::to_string(id), "out" + std::to_string(id), 1, 1});
    emb.push_back({id, rows[i]});
  }
  erase::Corpus corpus(std::move(examples));
  corpus.set_embeddings(emb);
  return corpus;
}

}  // namespace testutil
