#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negres/labels.hpp"
#include "negres/rng.hpp"
#include "negres/signal.hpp"

namespace negres::data {

struct LabeledBeat {
  signal::BeatSegment segment;
  Label given_label = Label::N;
  /// Ground truth, kept for experiments; empty for real recordings.
  std::optional<Label> clean_label;
  std::string patient_id;

  /// Label used for scoring: the clean label when known, else the given one.
  Label truth() const noexcept { return clean_label.value_or(given_label); }
  bool mislabeled() const noexcept { return clean_label && *clean_label != given_label; }
};

using Corpus = std::vector<LabeledBeat>;

/// Undersamples every label in `labels` to the smallest class count, without
/// replacement, and shuffles the result. Throws DataError naming the first
/// label with no beats.
Corpus balance_classes(const Corpus& beats, Rng& rng,
                       std::span<const Label> labels = kAllLabels);

struct NoiseSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::set<Label> exempt_labels{Label::A};

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct NoisyCorpus {
  Corpus beats;
  std::size_t eligible = 0;
  std::size_t flipped = 0;

  double flip_fraction() const noexcept {
    return eligible == 0 ? 0.0 : static_cast<double>(flipped) / static_cast<double>(eligible);
  }
};

/// Symmetric label noise: each non-exempt beat's given label is replaced,
/// with probability `rate`, by a uniform draw over the five other labels.
/// Missing clean labels are filled from the given label first.
NoisyCorpus inject_label_noise(const Corpus& beats, const NoiseSpec& spec);

struct PatientSplit {
  Corpus train;
  Corpus validation;
  std::vector<std::string> validation_patients;
};

/// Moves every beat of `holdout_patients` randomly chosen patients to the
/// validation side. Throws DataError unless there are more distinct
/// patients than `holdout_patients`.
PatientSplit split_by_patient(const Corpus& beats, std::size_t holdout_patients, Rng& rng);

/// Distinct patient ids in first-seen order.
std::vector<std::string> patient_ids(const Corpus& beats);

/// String form of merge_interference; throws DataError for unknown codes.
Label merge_interference(std::string_view code);

/// Beat counts per label (indexed by Label value), by given label.
std::array<std::size_t, 6> label_counts(const Corpus& beats);

struct SynthCorpusConfig {
  signal::SynthConfig base;
  std::size_t beats_per_class = 500;
  std::size_t patients = 12;
  std::vector<Label> classes{kAllLabels.begin(), kAllLabels.end()};

  friend bool operator==(const SynthCorpusConfig&, const SynthCorpusConfig&) = default;
};

/// Labeled corpus from generated traces. Each patient gets its own
/// patient_variant of `base`; every class's beats are spread over the patients
/// as evenly as possible (ids P01, P02, ...). Segments are cut at the
/// generator's true R peaks and normalized. clean_label equals the given label.
/// Deterministic in base.seed.
Corpus synthesize_corpus(const SynthCorpusConfig& config);

/// Beat corpus CSV: `patient_id,label,clean_label,s0,...,s249`. Values are
/// written in shortest round-trip form, so equal corpora give equal bytes.
void write_corpus_csv(const Corpus& beats, const std::filesystem::path& path);
struct UnlabeledRecording {
  std::string patient_id;
  std::vector<signal::BeatSegment> segments;
};

/// Rows with a blank label column (output of preprocessing).
void write_unlabeled_csv(std::span<const UnlabeledRecording> recordings,
                         const std::filesystem::path& path);
void write_unlabeled_csv(const std::string& patient_id,
                         const std::vector<signal::BeatSegment>& segments,
                         const std::filesystem::path& path);
/// Throws ParseError with the line number for malformed rows, including a
/// blank label column.
Corpus read_corpus_csv(const std::filesystem::path& path);

}  // namespace negres::data
