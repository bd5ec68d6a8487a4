#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "negres/dataset.hpp"
#include "negres/rng.hpp"

namespace negres::fixtures {

// Easily separable beats: one sinusoid frequency per class plus jitter.
inline data::Corpus toy_corpus(std::size_t per_class, std::uint64_t seed,
                               std::size_t patients = 3) {
  Rng rng(seed);
  data::Corpus out;
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      data::LabeledBeat b;
      b.segment.values.resize(250);
      for (std::size_t t = 0; t < 250; ++t) {
        b.segment.values[t] = 0.3 * std::sin(0.02 * static_cast<double>((c + 1) * t)) +
                              rng.uniform(-0.05, 0.05);
      }
      b.given_label = static_cast<Label>(c);
      b.clean_label = b.given_label;
      b.patient_id = "P" + std::to_string(i % patients);
      out.push_back(b);
    }
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("negres_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace negres::fixtures
