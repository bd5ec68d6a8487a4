#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "negres/dataset.hpp"
#include "negres/model.hpp"
#include "negres/rng.hpp"
#include "negres/training.hpp"

namespace negres::config {

struct Paths {
  std::string corpus_in;
  std::string corpus_out;
  std::string checkpoint;
  std::string reports;
  std::vector<std::string> traces;

  friend bool operator==(const Paths&, const Paths&) = default;
};

struct PreprocessSettings {
  double band_low_hz = 0.5;
  double band_high_hz = 40.0;

  friend bool operator==(const PreprocessSettings&, const PreprocessSettings&) = default;
};

struct EvalSettings {
  std::size_t test_patients = 2;
  std::size_t validation_patients = 1;
  std::size_t folds = 2;
  std::vector<double> taus{0.99, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
  /// Report in the five-class view (E folded into Q).
  bool merged_report = true;

  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

/// Everything one run needs. The component seeds inside `synth`, `noise`
/// and `train` are not stored in JSON: derive_seeds() fills them from `seed`
/// through the named streams data, init, dropout, noise and routing.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  Paths paths;
  data::SynthCorpusConfig synth;
  PreprocessSettings preprocess;
  data::NoiseSpec noise;
  model::NetworkSpec network = model::NetworkSpec::standard();
  train::TrainConfig train;
  EvalSettings eval;

  /// Child generator of the root seed.
  Rng stream(std::string_view name) const { return Rng(seed).substream(name); }
  std::uint64_t init_seed() const { return stream("init").seed(); }
  void derive_seeds();

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string to_json(const ExperimentConfig& config);

/// Missing fields keep their defaults; unknown keys are rejected. Throws
/// ParseError for malformed JSON and ConfigError for bad fields. The result
/// has its seeds derived.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace negres::config
