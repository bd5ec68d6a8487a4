#include "negres/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "negres/error.hpp"
#include "negres/io.hpp"

namespace negres::train {

double RoutingPolicy::threshold_for(Label given) const {
  auto it = per_class_tau.find(given);
  return it == per_class_tau.end() ? tau : it->second;
}

void RoutingPolicy::validate() const {
  auto check = [](double t, const std::string& what) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ConfigError(what + " threshold must be in (0, 1), got " + std::to_string(t));
    }
  };
  check(tau, "global");
  for (const auto& [label, t] : per_class_tau) {
    check(t, std::string("class ") + label_code(label));
  }
}

Routing route_batch(const Tensor& probs, std::span<const Label> given,
                    const RoutingPolicy& policy, const LabelTaxonomy& taxonomy) {
  if (probs.rank() != 2 || probs.dim(0) != given.size()) {
    throw DimensionError("route_batch: " + std::to_string(given.size()) +
                         " labels for probabilities " + shape_string(probs.shape()));
  }
  const std::size_t n = probs.dim(1);
  Routing r;
  for (std::size_t i = 0; i < given.size(); ++i) {
    const double p = probs[i * n + taxonomy.index_of(given[i])];
    (p >= policy.threshold_for(given[i]) ? r.clean : r.noisy).push_back(i);
  }
  return r;
}

ComplementaryLabel gen_complementary_label(std::size_t source, std::size_t n_classes,
                                           Rng& rng) {
  if (n_classes < 2) {
    throw ConfigError("complementary labels need at least 2 classes");
  }
  if (source >= n_classes) throw ContractError("source class out of range");
  auto y = static_cast<std::size_t>(rng.below(n_classes - 1));
  if (y >= source) ++y;
  return {y, source};
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(pl_weight >= 0.0 && nl_weight >= 0.0)) throw ConfigError("loss weights must be >= 0");
  routing.validate();
}

LabelTaxonomy taxonomy_for(std::size_t n_classes) {
  if (n_classes == 6) return LabelTaxonomy::full();
  if (n_classes == 5) return LabelTaxonomy::merged();
  throw ConfigError("no label taxonomy with " + std::to_string(n_classes) + " classes");
}

Batch make_batch(const data::Corpus& beats, std::span<const std::size_t> rows) {
  Batch b;
  const std::size_t len = rows.empty() ? signal::kWindow : beats[rows[0]].segment.values.size();
  b.inputs = Tensor({rows.size(), 1, len});
  bool all_clean = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& beat = beats[rows[i]];
    if (beat.segment.values.size() != len) {
      throw DimensionError("beats in one batch must share a length");
    }
    std::copy(beat.segment.values.begin(), beat.segment.values.end(),
              b.inputs.data() + i * len);
    b.given.push_back(beat.given_label);
    all_clean = all_clean && beat.clean_label.has_value();
  }
  if (all_clean) {
    for (std::size_t r : rows) b.clean.push_back(*beats[r].clean_label);
  }
  return b;
}

StepReport combined_step(model::Network& net, ad::Sgd& optimizer, const Batch& batch,
                         const TrainConfig& config, bool routing_enabled,
                         Rng& dropout_rng, Rng& label_rng) {
  if (batch.given.empty()) throw ContractError("combined_step: empty batch");
  const LabelTaxonomy tax = taxonomy_for(net.spec().n_classes);
  const std::size_t n = tax.size();

  ad::Tape tape;
  const ad::Var in = tape.constant(batch.inputs);
  const ad::Var probs = net.forward(tape, in, ad::Mode::kTrain, dropout_rng);

  Routing routing;
  if (routing_enabled) {
    routing = route_batch(tape.value(probs), batch.given, config.routing, tax);
  } else {
    routing.clean.resize(batch.given.size());
    std::iota(routing.clean.begin(), routing.clean.end(), std::size_t{0});
  }

  StepReport rep;
  rep.n_clean = routing.clean.size();
  rep.n_noisy = routing.noisy.size();
  if (!batch.clean.empty()) {
    std::vector<bool> to_nl(batch.given.size(), false);
    for (std::size_t i : routing.noisy) to_nl[i] = true;
    for (std::size_t i = 0; i < batch.given.size(); ++i) {
      if (batch.clean[i] != batch.given[i]) {
        ++rep.mislabeled;
        rep.mislabeled_to_nl += to_nl[i];
      } else {
        ++rep.correct;
        rep.correct_to_nl += to_nl[i];
      }
    }
  }

  std::optional<ad::Var> total;
  if (!routing.clean.empty()) {
    std::vector<std::size_t> targets;
    for (std::size_t i : routing.clean) targets.push_back(tax.index_of(batch.given[i]));
    const ad::Var pl = ad::positive_loss(tape, ad::gather_rows(tape, probs, routing.clean),
                                         targets);
    rep.pl_loss = tape.value(pl).item();
    total = ad::scale(tape, pl, config.pl_weight);
  }
  if (!routing.noisy.empty()) {
    std::vector<std::size_t> complements;
    for (std::size_t i : routing.noisy) {
      complements.push_back(
          gen_complementary_label(tax.index_of(batch.given[i]), n, label_rng).y_prime);
    }
    const ad::Var nl = ad::negative_loss(tape, ad::gather_rows(tape, probs, routing.noisy),
                                         complements);
    rep.nl_loss = tape.value(nl).item();
    const ad::Var weighted = ad::scale(tape, nl, config.nl_weight);
    total = total ? ad::add(tape, *total, weighted) : weighted;
  }
  rep.total_loss = tape.value(*total).item();

  ad::zero_grads(net.parameters());
  tape.backward(*total);
  optimizer.step(net.parameters());
  return rep;
}

Tensor predict_corpus(const model::Network& net, const data::Corpus& beats,
                      std::size_t batch_size) {
  const std::size_t n = net.spec().n_classes;
  Tensor out({beats.size(), n});
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < beats.size(); start += batch_size) {
    const std::size_t end = std::min(beats.size(), start + batch_size);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor p = net.predict_proba(make_batch(beats, rows).inputs);
    std::copy(p.values().begin(), p.values().end(), out.data() + start * n);
  }
  return out;
}

namespace {

double accuracy_on_given(const model::Network& net, const data::Corpus& beats,
                         const LabelTaxonomy& tax) {
  const Tensor probs = predict_corpus(net, beats);
  const auto pred = model::argmax_rows(probs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < beats.size(); ++i) {
    hits += pred[i] == tax.index_of(beats[i].given_label);
  }
  return static_cast<double>(hits) / static_cast<double>(beats.size());
}

void check_labels(const data::Corpus& beats, const LabelTaxonomy& tax, const char* which) {
  for (const auto& b : beats) {
    if (!tax.contains(b.given_label)) {
      throw DataError(std::string(which) + " set has label " + label_code(b.given_label) +
                      " outside the " + std::to_string(tax.size()) + "-class taxonomy");
    }
  }
}

struct Snapshot {
  std::vector<Tensor> params;
  std::vector<ad::BatchNormState> norms;
};

Snapshot snapshot(const model::Network& net) {
  Snapshot s;
  for (const auto& p : net.parameters()) s.params.push_back(p.value);
  for (const auto& b : net.batchnorm_states()) s.norms.push_back(b.state);
  return s;
}

void restore(model::Network& net, const Snapshot& s) {
  for (std::size_t i = 0; i < s.params.size(); ++i) net.parameters()[i].value = s.params[i];
  for (std::size_t i = 0; i < s.norms.size(); ++i) net.batchnorm_states()[i].state = s.norms[i];
}

}  // namespace

TrainResult train(model::Network& net, const data::Corpus& train_set,
                  const data::Corpus& val_set, const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw ContractError("train: empty training set");
  if (val_set.empty() && config.keep_best) {
    throw ContractError("train: keep_best needs a nonempty validation set");
  }
  const LabelTaxonomy tax = taxonomy_for(net.spec().n_classes);
  check_labels(train_set, tax, "training");
  check_labels(val_set, tax, "validation");

  const Rng root(config.seed);
  Rng order_rng = root.substream("data");
  Rng dropout_rng = root.substream("dropout");
  Rng label_rng = root.substream("routing");
  ad::Sgd optimizer(config.learning_rate, config.momentum);

  TrainResult result;
  Snapshot best;
  double best_acc = -1.0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.below(i)]);
    }
    const bool routing = epoch >= config.routing.warmup_epochs;
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0, pl_sum = 0.0, nl_sum = 0.0;
    std::size_t seen = 0, noisy = 0, n_clean_rows = 0;
    std::size_t mis = 0, mis_nl = 0, cor = 0, cor_nl = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Batch batch = make_batch(train_set, rows);
      const StepReport r =
          combined_step(net, optimizer, batch, config, routing, dropout_rng, label_rng);
      const auto b = static_cast<double>(rows.size());
      loss_sum += r.total_loss * b;
      pl_sum += r.pl_loss * static_cast<double>(r.n_clean);
      nl_sum += r.nl_loss * static_cast<double>(r.n_noisy);
      seen += rows.size();
      noisy += r.n_noisy;
      n_clean_rows += r.n_clean;
      mis += r.mislabeled;
      mis_nl += r.mislabeled_to_nl;
      cor += r.correct;
      cor_nl += r.correct_to_nl;
    }
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.pl_loss = n_clean_rows ? pl_sum / static_cast<double>(n_clean_rows) : 0.0;
    rec.nl_loss = noisy ? nl_sum / static_cast<double>(noisy) : 0.0;
    rec.noisy_fraction = static_cast<double>(noisy) / static_cast<double>(seen);
    if (mis + cor > 0) {
      rec.nl_rate_mislabeled = mis ? static_cast<double>(mis_nl) / static_cast<double>(mis) : 0.0;
      rec.nl_rate_correct = cor ? static_cast<double>(cor_nl) / static_cast<double>(cor) : 0.0;
    }
    if (val_set.empty()) {
      rec.val_accuracy = std::numeric_limits<double>::quiet_NaN();
      result.best_epoch = epoch;
    } else if (rec.val_accuracy = accuracy_on_given(net, val_set, tax); rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      result.best_epoch = epoch;
      if (config.keep_best) best = snapshot(net);
    }
    result.history.push_back(rec);
  }
  result.best_val_accuracy = val_set.empty() ? std::numeric_limits<double>::quiet_NaN() : best_acc;
  if (config.keep_best) restore(net, best);
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path) {
  std::string out = "epoch,train_loss,pl_loss,nl_loss,noisy_fraction,val_accuracy\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + io::format_double(r.train_loss) + "," +
           io::format_double(r.pl_loss) + "," + io::format_double(r.nl_loss) + "," +
           io::format_double(r.noisy_fraction) + "," + io::format_double(r.val_accuracy) + "\n";
  }
  io::write_file_atomic(path, out);
}

}  // namespace negres::train
