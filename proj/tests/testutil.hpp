#pragma once

// Shared helpers for unit and acceptance tests.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "recpipe/dataset.hpp"
#include "recpipe/rng.hpp"

namespace testutil {

inline recpipe::Interaction row(std::string user, std::string item, double rating,
                                std::optional<std::int64_t> ts = std::nullopt) {
  return {std::move(user), std::move(item), rating, ts};
}

inline recpipe::Dataset dataset_of(std::vector<recpipe::Interaction> rows) {
  return recpipe::Dataset::from_interactions(std::move(rows));
}

// Random instance with external ids u0.., i0..; ratings 1..5, timestamps
// increasing per user.
inline recpipe::Dataset random_dataset(recpipe::Rng& rng, std::size_t num_users,
                                       std::size_t num_items, double density,
                                       bool timestamps = true) {
  std::vector<recpipe::Interaction> rows;
  for (std::size_t u = 0; u < num_users; ++u) {
    std::int64_t t = static_cast<std::int64_t>(rng.uniform_int(50));
    for (std::size_t i = 0; i < num_items; ++i) {
      if (rng.uniform() >= density) continue;
      recpipe::Interaction r;
      r.user = "u" + std::to_string(u);
      r.item = "i" + std::to_string(i);
      r.rating = static_cast<double>(1 + rng.uniform_int(5));
      if (timestamps) {
        t += 1 + static_cast<std::int64_t>(rng.uniform_int(100));
        r.timestamp = t;
      }
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) {
    rows.push_back(row("u0", "i0", 3.0, timestamps ? std::optional<std::int64_t>(1) : std::nullopt));
  }
  return dataset_of(std::move(rows));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("recpipe_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
