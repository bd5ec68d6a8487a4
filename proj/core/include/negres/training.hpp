#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "negres/autodiff.hpp"
#include "negres/dataset.hpp"
#include "negres/labels.hpp"
#include "negres/model.hpp"
#include "negres/rng.hpp"

namespace negres::train {

/// Decides, per sample, between positive learning (trust the given label)
/// and negative learning (train against a complementary label).
struct RoutingPolicy {
  double tau = 0.8;
  std::map<Label, double> per_class_tau{{Label::A, 0.5}};
  /// Epochs of plain positive learning before routing starts.
  std::size_t warmup_epochs = 2;

  double threshold_for(Label given) const;
  /// Throws ConfigError unless every threshold is in (0, 1).
  void validate() const;

  friend bool operator==(const RoutingPolicy&, const RoutingPolicy&) = default;
};

struct Routing {
  std::vector<std::size_t> clean;
  std::vector<std::size_t> noisy;
};

/// Row i is clean iff probs[i][class of given[i]] >= threshold_for(given[i]).
/// Both index lists are ascending; together they cover every row once.
Routing route_batch(const Tensor& probs, std::span<const Label> given,
                    const RoutingPolicy& policy, const LabelTaxonomy& taxonomy);

/// A class the sample is asserted NOT to belong to.
struct ComplementaryLabel {
  std::size_t y_prime;
  std::size_t source;
};

/// Uniform over the n - 1 classes other than `source`. Throws ConfigError
/// for n < 2.
ComplementaryLabel gen_complementary_label(std::size_t source, std::size_t n_classes,
                                           Rng& rng);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  RoutingPolicy routing;
  double pl_weight = 1.0;
  double nl_weight = 1.0;
  /// Restore the parameters of the epoch with the best validation accuracy.
  bool keep_best = true;

  /// Throws ConfigError for non-positive learning rate, batch_size < 2, ...
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Inputs [B, 1, L] and labels of one minibatch.
struct Batch {
  Tensor inputs;
  std::vector<Label> given;
  /// Parallel to `given` when ground truth is known; otherwise empty.
  std::vector<Label> clean;
};

Batch make_batch(const data::Corpus& beats, std::span<const std::size_t> rows);

struct StepReport {
  double total_loss = 0.0;
  double pl_loss = 0.0;
  double nl_loss = 0.0;
  std::size_t n_clean = 0;
  std::size_t n_noisy = 0;
  /// Among rows whose given label is wrong / right (when known): how many
  /// were routed to negative learning.
  std::size_t mislabeled = 0, mislabeled_to_nl = 0;
  std::size_t correct = 0, correct_to_nl = 0;
};

/// One forward pass, routing on the resulting probabilities (treated as
/// constants), PL on clean rows, NL with fresh complementary labels on noisy
/// rows, total = w_pl * L_pl + w_nl * L_nl, one backward, one optimizer step.
/// With `routing_enabled == false` every row is clean. Throws ContractError
/// on an empty batch.
StepReport combined_step(model::Network& net, ad::Sgd& optimizer, const Batch& batch,
                         const TrainConfig& config, bool routing_enabled,
                         Rng& dropout_rng, Rng& label_rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double pl_loss = 0.0;
  double nl_loss = 0.0;
  double noisy_fraction = 0.0;
  double val_accuracy = 0.0;
  /// NL routing rate among mislabeled / correctly labeled training rows;
  /// NaN when the corpus carries no clean labels.
  double nl_rate_mislabeled = std::numeric_limits<double>::quiet_NaN();
  double nl_rate_correct = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

/// Runs config.epochs epochs. Epochs below routing.warmup_epochs are pure
/// positive learning. Validation accuracy is measured against given labels.
/// An empty validation set is allowed without keep_best; its accuracies are
/// then NaN and the final weights are kept. Throws DataError if a label has
/// no class in the model's taxonomy.
TrainResult train(model::Network& net, const data::Corpus& train_set,
                  const data::Corpus& val_set, const TrainConfig& config);

/// Taxonomy matching a model's class count (6 = full, 5 = merged).
LabelTaxonomy taxonomy_for(std::size_t n_classes);

/// Eval-mode class probabilities for every beat, batched.
Tensor predict_corpus(const model::Network& net, const data::Corpus& beats,
                      std::size_t batch_size = 256);

/// `epoch,train_loss,pl_loss,nl_loss,noisy_fraction,val_accuracy`.
void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path);

}  // namespace negres::train
