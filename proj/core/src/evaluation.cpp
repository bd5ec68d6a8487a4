#include "negres/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "negres/error.hpp"
#include "negres/io.hpp"

namespace negres::eval {

ConfusionMatrix::ConfusionMatrix(LabelTaxonomy taxonomy)
    : taxonomy_(taxonomy), counts_(taxonomy.size() * taxonomy.size(), 0) {}

std::size_t ConfusionMatrix::at(std::size_t truth, std::size_t pred) const {
  if (truth >= classes() || pred >= classes()) throw ContractError("confusion index out of range");
  return counts_[truth * classes() + pred];
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::size_t count) {
  if (truth >= classes() || pred >= classes()) throw ContractError("confusion index out of range");
  counts_[truth * classes() + pred] += count;
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t s = 0;
  for (std::size_t c : counts_) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes(); ++i) s += counts_[i * classes() + i];
  return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes(); ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < classes(); ++t) s += at(t, pred);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const Label> preds, std::span<const Label> truths,
                                 LabelTaxonomy taxonomy) {
  if (preds.size() != truths.size()) {
    throw DataError("confusion_matrix: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix m(taxonomy);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (Label l : {truths[i], preds[i]}) {
      if (!taxonomy.contains(l)) {
        throw DataError(std::string("label ") + label_code(l) + " is not in the " +
                        std::to_string(taxonomy.size()) + "-class view");
      }
    }
    m.add(taxonomy.index_of(truths[i]), taxonomy.index_of(preds[i]));
  }
  return m;
}

double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& confusion) {
  std::vector<ClassMetrics> out;
  for (std::size_t c = 0; c < confusion.classes(); ++c) {
    const auto tp = static_cast<double>(confusion.at(c, c));
    const auto predicted = static_cast<double>(confusion.col_sum(c));
    const auto actual = static_cast<double>(confusion.row_sum(c));
    ClassMetrics m;
    m.label = confusion.taxonomy().label_at(c);
    m.precision = predicted > 0 ? tp / predicted : 0.0;
    m.recall = actual > 0 ? tp / actual : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    m.support = confusion.row_sum(c);
    out.push_back(m);
  }
  return out;
}

MetricsReport make_report(const ConfusionMatrix& confusion) {
  MetricsReport r{confusion, precision_recall_f1(confusion), 0.0};
  const std::size_t total = confusion.total();
  r.accuracy = total ? static_cast<double>(confusion.trace()) / static_cast<double>(total) : 0.0;
  return r;
}

MetricsReport evaluate(const model::Network& net, const data::Corpus& beats,
                       LabelTaxonomy report) {
  const LabelTaxonomy model_view = train::taxonomy_for(net.spec().n_classes);
  const auto pred_idx = model::argmax_rows(train::predict_corpus(net, beats));
  std::vector<Label> preds, truths;
  preds.reserve(beats.size());
  truths.reserve(beats.size());
  for (std::size_t i = 0; i < beats.size(); ++i) {
    Label p = model_view.label_at(pred_idx[i]);
    Label t = beats[i].truth();
    if (report.is_merged()) {
      p = merge_interference(p);
      t = merge_interference(t);
    }
    preds.push_back(p);
    truths.push_back(t);
  }
  return make_report(confusion_matrix(preds, truths, report));
}

std::vector<std::vector<std::string>> assign_folds(const data::Corpus& beats,
                                                   const CrossValConfig& config) {
  std::vector<std::string> ids = data::patient_ids(beats);
  if (ids.size() < 3) {
    throw DataError("cross-validation needs at least 3 patients, corpus has " +
                    std::to_string(ids.size()));
  }
  if (config.folds == 0 || config.holdout_patients == 0) {
    throw ConfigError("folds and holdout_patients must be positive");
  }
  if (config.folds * config.holdout_patients > ids.size() ||
      ids.size() - config.holdout_patients <= config.validation_patients) {
    throw DataError(std::to_string(config.folds) + " disjoint holdouts of " +
                    std::to_string(config.holdout_patients) + " patients plus " +
                    std::to_string(config.validation_patients) +
                    " validation patients do not fit in " + std::to_string(ids.size()) +
                    " patients");
  }
  std::sort(ids.begin(), ids.end());
  Rng rng = Rng(config.seed).substream("folds");
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
  std::vector<std::vector<std::string>> folds(config.folds);
  for (std::size_t f = 0; f < config.folds; ++f) {
    folds[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(f * config.holdout_patients),
                    ids.begin() + static_cast<std::ptrdiff_t>((f + 1) * config.holdout_patients));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

namespace {

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

CrossValResult crossvalidate(const data::Corpus& beats, const CrossValConfig& config,
                             const model::NetworkSpec& spec,
                             const train::TrainConfig& train_config) {
  CrossValResult result;
  result.holdouts = assign_folds(beats, config);
  const Rng root(config.seed);
  for (std::size_t f = 0; f < result.holdouts.size(); ++f) {
    const Rng fold_rng = root.substream("fold").substream(f);
    const std::set<std::string> held(result.holdouts[f].begin(), result.holdouts[f].end());
    data::Corpus rest, test;
    for (const auto& b : beats) (held.count(b.patient_id) ? test : rest).push_back(b);

    data::Corpus train_set, val_set;
    if (config.validation_patients > 0) {
      Rng split_rng = fold_rng.substream("validation");
      auto split = data::split_by_patient(rest, config.validation_patients, split_rng);
      train_set = std::move(split.train);
      val_set = std::move(split.validation);
    } else {
      train_set = rest;
      val_set = std::move(rest);
    }

    Rng init = fold_rng.substream("init");
    model::Network net(spec, init);
    train::TrainConfig tc = train_config;
    tc.seed = fold_rng.substream("train").seed();
    train::train(net, train_set, val_set, tc);
    result.folds.push_back(evaluate(net, test));
  }

  std::vector<double> acc;
  for (const auto& r : result.folds) acc.push_back(r.accuracy);
  result.accuracy = summarize(acc);
  const std::size_t n = result.folds.front().per_class.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> p, r, f1;
    for (const auto& rep : result.folds) {
      p.push_back(rep.per_class[c].precision);
      r.push_back(rep.per_class[c].recall);
      f1.push_back(rep.per_class[c].f1);
    }
    result.per_class.push_back(
        {result.folds.front().per_class[c].label, summarize(p), summarize(r), summarize(f1)});
  }
  return result;
}

ExperimentSplit split_experiment(const data::Corpus& beats, std::size_t test_patients,
                                 std::size_t validation_patients, Rng& rng) {
  ExperimentSplit out;
  auto outer = data::split_by_patient(beats, test_patients, rng);
  out.test = std::move(outer.validation);
  out.test_patients = std::move(outer.validation_patients);
  if (validation_patients > 0) {
    auto inner = data::split_by_patient(outer.train, validation_patients, rng);
    out.train = std::move(inner.train);
    out.validation = std::move(inner.validation);
    out.validation_patients = std::move(inner.validation_patients);
  } else {
    out.train = std::move(outer.train);
    out.validation = out.train;
  }
  return out;
}

std::vector<double> default_sweep_taus() { return {0.99, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3}; }

std::vector<SweepRow> confidence_sweep(const ExperimentSplit& split, std::vector<double> taus,
                                       const model::NetworkSpec& spec,
                                       const train::TrainConfig& train_config,
                                       std::uint64_t init_seed) {
  for (double t : taus) {
    if (!(t > 0.0 && t < 1.0)) {
      throw ConfigError("sweep threshold must be in (0, 1), got " + std::to_string(t));
    }
  }
  std::sort(taus.begin(), taus.end(), std::greater<>());
  std::vector<SweepRow> rows;
  for (double tau : taus) {
    Rng init(init_seed);
    model::Network net(spec, init);
    train::TrainConfig tc = train_config;
    tc.routing.tau = tau;
    train::train(net, split.train, split.validation, tc);
    rows.push_back({tau, evaluate(net, split.test).accuracy});
  }
  return rows;
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::string out = "class,precision,recall,f1\n";
  for (const auto& m : report.per_class) {
    out += label_code(m.label);
    out += "," + io::format_double(m.precision) + "," + io::format_double(m.recall) + "," +
           io::format_double(m.f1) + "\n";
  }
  io::write_file_atomic(path, out);
}

std::string format_confusion(const MetricsReport& report) {
  const auto& cm = report.confusion;
  std::size_t width = 5;
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      width = std::max(width, std::to_string(cm.at(t, p)).size() + 1);
    }
  }
  auto cell = [&](const std::string& s) {
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };
  std::string out = "true\\pred";
  for (std::size_t p = 0; p < cm.classes(); ++p) {
    out += cell(std::string(1, label_code(cm.taxonomy().label_at(p))));
  }
  out += '\n';
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    out += std::string(8, ' ') + label_code(cm.taxonomy().label_at(t));
    for (std::size_t p = 0; p < cm.classes(); ++p) out += cell(std::to_string(cm.at(t, p)));
    out += '\n';
  }
  char acc[64];
  std::snprintf(acc, sizeof acc, "accuracy %.4f (%zu/%zu)\n", report.accuracy, cm.trace(),
                cm.total());
  return out + acc;
}

void write_confusion_text(const MetricsReport& report, const std::filesystem::path& path) {
  io::write_file_atomic(path, format_confusion(report));
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::string out = "tau,accuracy\n";
  for (const auto& r : rows) {
    out += io::format_double(r.tau) + "," + io::format_double(r.accuracy) + "\n";
  }
  io::write_file_atomic(path, out);
}

}  // namespace negres::eval
