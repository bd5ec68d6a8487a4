#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "negres/dataset.hpp"
#include "negres/labels.hpp"
#include "negres/model.hpp"
#include "negres/training.hpp"

namespace negres::eval {

/// Square count matrix, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelTaxonomy taxonomy);

  const LabelTaxonomy& taxonomy() const noexcept { return taxonomy_; }
  std::size_t classes() const noexcept { return taxonomy_.size(); }

  std::size_t at(std::size_t truth, std::size_t pred) const;
  void add(std::size_t truth, std::size_t pred, std::size_t count = 1);

  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t pred) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  LabelTaxonomy taxonomy_;
  std::vector<std::size_t> counts_;
};

/// Throws DataError if the lists differ in length or a label has no class in
/// `taxonomy` (E in the merged view: merge first).
ConfusionMatrix confusion_matrix(std::span<const Label> preds, std::span<const Label> truths,
                                 LabelTaxonomy taxonomy);

struct ClassMetrics {
  Label label = Label::N;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall) noexcept;

/// Per class: TP on the diagonal, FP = column sum - TP, FN = row sum - TP.
/// Undefined ratios are reported as 0.
std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& confusion);

struct MetricsReport {
  ConfusionMatrix confusion{LabelTaxonomy::merged()};
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
};

MetricsReport make_report(const ConfusionMatrix& confusion);

/// Scores the model against each beat's truth() in the `report` view. Six-class
/// predictions are folded E -> Q for a merged report.
MetricsReport evaluate(const model::Network& net, const data::Corpus& beats,
                       LabelTaxonomy report = LabelTaxonomy::merged());

struct CrossValConfig {
  std::size_t folds = 2;
  std::size_t holdout_patients = 2;
  /// Patients taken from each fold's training side for checkpoint selection.
  /// With 0 the training set itself is used.
  std::size_t validation_patients = 1;
  std::uint64_t seed = 0;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ClassSummary {
  Label label = Label::N;
  MetricSummary precision, recall, f1;
};

struct CrossValResult {
  std::vector<std::vector<std::string>> holdouts;
  std::vector<MetricsReport> folds;
  MetricSummary accuracy;
  std::vector<ClassSummary> per_class;
};

/// Holdout patient sets for `config.folds` folds, pairwise disjoint, drawn
/// from one shuffle seeded by config.seed. Throws DataError when the corpus
/// has fewer than 3 patients or too few to keep every fold's training side
/// nonempty.
std::vector<std::vector<std::string>> assign_folds(const data::Corpus& beats,
                                                   const CrossValConfig& config);

/// Trains a fresh network per fold and scores it on the held-out patients.
/// Standard deviations are sample deviations (0 for a single fold).
CrossValResult crossvalidate(const data::Corpus& beats, const CrossValConfig& config,
                             const model::NetworkSpec& spec,
                             const train::TrainConfig& train_config);

struct ExperimentSplit {
  data::Corpus train;
  data::Corpus validation;
  data::Corpus test;
  std::vector<std::string> validation_patients;
  std::vector<std::string> test_patients;
};

/// Patient-wise train / validation / test split. With zero validation
/// patients the validation side is a copy of the training side.
ExperimentSplit split_experiment(const data::Corpus& beats, std::size_t test_patients,
                                 std::size_t validation_patients, Rng& rng);

struct SweepRow {
  double tau = 0.0;
  double accuracy = 0.0;
};

/// Thresholds swept by default, largest first.
std::vector<double> default_sweep_taus();

/// One training run per tau from the same seed and the same initial weights;
/// accuracy is measured on the test side against truth(). Rows are sorted by
/// tau, largest first. Throws ConfigError for a tau outside (0, 1).
std::vector<SweepRow> confidence_sweep(const ExperimentSplit& split, std::vector<double> taus,
                                       const model::NetworkSpec& spec,
                                       const train::TrainConfig& train_config,
                                       std::uint64_t init_seed);

/// `class,precision,recall,f1`, one row per class.
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
/// Aligned table with class codes on both axes and the accuracy underneath.
std::string format_confusion(const MetricsReport& report);
void write_confusion_text(const MetricsReport& report, const std::filesystem::path& path);
/// `tau,accuracy`.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace negres::eval
