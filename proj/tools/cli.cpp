#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "negres/checkpoint.hpp"
#include "negres/config.hpp"
#include "negres/dataset.hpp"
#include "negres/error.hpp"
#include "negres/evaluation.hpp"
#include "negres/io.hpp"
#include "negres/signal.hpp"
#include "negres/training.hpp"

namespace negres::cli {

namespace fs = std::filesystem;

namespace {

/// Usage problems detected after parsing (missing inputs and the like).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<double> taus;
  std::optional<double> noise_rate;
  std::optional<std::size_t> epochs;
  bool baseline = false;
  std::string out_dir;
  std::string corpus;
  std::string checkpoint;
  std::optional<std::size_t> beats_per_class;
  std::string classes;
  std::vector<std::string> traces;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "Experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "Root seed");
  cmd->add_option("--noise-rate", f.noise_rate, "Symmetric label-noise rate");
  cmd->add_option("--out", f.out_dir, "Output directory");
}

struct Run {
  config::ExperimentConfig cfg;
  bool network_from_file = false;
  fs::path out;
};

Run resolve(const Flags& f) {
  Run r;
  if (!f.config_path.empty()) {
    std::string text;
    try {
      text = io::read_file(f.config_path);
    } catch (const IoError& e) {
      throw UsageError(e.what());
    }
    try {
      r.cfg = config::experiment_config_from_json(text);
      r.network_from_file = nlohmann::json::parse(text).contains("network");
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
  }
  auto& c = r.cfg;
  if (f.seed) c.seed = *f.seed;
  if (f.noise_rate) c.noise.rate = *f.noise_rate;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.taus.size() == 1) c.train.routing.tau = f.taus.front();
  if (f.baseline) c.train.routing.warmup_epochs = c.train.epochs;
  if (f.beats_per_class) c.synth.beats_per_class = *f.beats_per_class;
  if (!f.classes.empty()) {
    c.synth.classes.clear();
    for (char ch : f.classes) {
      if (ch == ',') continue;
      const auto l = try_parse_label(std::string_view(&ch, 1));
      if (!l) throw UsageError(std::string("unknown class '") + ch + "' in --classes");
      c.synth.classes.push_back(*l);
    }
  }
  if (!f.corpus.empty()) c.paths.corpus_in = f.corpus;
  if (!f.checkpoint.empty()) c.paths.checkpoint = f.checkpoint;
  if (!f.traces.empty()) c.paths.traces = f.traces;
  if (!f.out_dir.empty()) c.paths.reports = f.out_dir;
  if (c.paths.reports.empty()) c.paths.reports = "out";
  c.derive_seeds();
  c.validate();
  r.out = c.paths.reports;
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw IoError("cannot create " + r.out.string() + ": " + ec.message());
  return r;
}

void echo_config(const Run& r) {
  io::write_file_atomic(r.out / "config.json", config::to_json(r.cfg));
}

data::Corpus load_corpus(const config::ExperimentConfig& c) {
  if (c.paths.corpus_in.empty()) throw UsageError("no corpus given (--corpus or paths.corpus_in)");
  if (!fs::exists(c.paths.corpus_in)) {
    throw UsageError("corpus file not found: " + c.paths.corpus_in);
  }
  data::Corpus beats = data::read_corpus_csv(c.paths.corpus_in);
  if (c.network.n_classes == 5) {
    for (auto& b : beats) {
      b.given_label = merge_interference(b.given_label);
      if (b.clean_label) b.clean_label = merge_interference(*b.clean_label);
    }
  }
  return beats;
}

std::string counts_line(const data::Corpus& beats) {
  const auto counts = data::label_counts(beats);
  std::string s;
  for (Label l : kAllLabels) {
    if (!s.empty()) s += ' ';
    s += std::string(1, label_code(l)) + "=" + std::to_string(counts[static_cast<std::size_t>(l)]);
  }
  return s;
}

eval::ExperimentSplit split_for(const config::ExperimentConfig& c, const data::Corpus& beats) {
  Rng rng = c.stream("data").substream("split");
  return eval::split_experiment(beats, c.eval.test_patients, c.eval.validation_patients, rng);
}

LabelTaxonomy report_view(const config::ExperimentConfig& c) {
  return c.eval.merged_report ? LabelTaxonomy::merged() : LabelTaxonomy::full();
}

int cmd_synth(const Flags& f, std::ostream& out) {
  const Run r = resolve(f);
  data::Corpus beats = data::synthesize_corpus(r.cfg.synth);
  if (r.cfg.noise.rate > 0.0) {
    auto noisy = data::inject_label_noise(beats, r.cfg.noise);
    out << "flipped " << noisy.flipped << " of " << noisy.eligible << " eligible labels\n";
    beats = std::move(noisy.beats);
  }
  const fs::path path =
      r.cfg.paths.corpus_out.empty() ? r.out / "corpus.csv" : fs::path(r.cfg.paths.corpus_out);
  data::write_corpus_csv(beats, path);
  echo_config(r);
  out << "wrote " << beats.size() << " beats to " << path.string() << "\n"
      << counts_line(beats) << "\n";
  return kOk;
}

int cmd_preprocess(const Flags& f, std::ostream& out, std::ostream& err) {
  const Run r = resolve(f);
  if (r.cfg.paths.traces.empty()) throw UsageError("no trace files given");
  std::vector<data::UnlabeledRecording> recordings;
  std::size_t rows = 0;
  for (const auto& file : r.cfg.paths.traces) {
    signal::RawTrace trace = signal::read_trace(file);
    if (trace.patient_id.empty()) trace.patient_id = fs::path(file).stem().string();
    if (trace.samples.empty()) {
      err << "warning: " << file << " has no samples\n";
      continue;
    }
    if (trace.sample_rate != signal::kSampleRate) {
      throw DataError(file + ": sample rate " + io::format_double(trace.sample_rate) +
                      " Hz, expected 250");
    }
    const auto filtered = signal::bandpass_filter(trace, r.cfg.preprocess.band_low_hz,
                                                  r.cfg.preprocess.band_high_hz);
    const auto peaks = signal::detect_qrs(filtered);
    data::UnlabeledRecording rec{trace.patient_id, {}};
    for (auto& seg : signal::segment_beats(filtered, peaks)) {
      rec.segments.push_back(signal::normalize_beat(std::move(seg)));
    }
    if (rec.segments.empty()) err << "warning: no beats found in " << file << "\n";
    rows += rec.segments.size();
    recordings.push_back(std::move(rec));
  }
  const fs::path path = r.cfg.paths.corpus_out.empty() ? r.out / "segments.csv"
                                                       : fs::path(r.cfg.paths.corpus_out);
  data::write_unlabeled_csv(recordings, path);
  echo_config(r);
  out << "wrote " << rows << " segments to " << path.string() << "\n";
  return kOk;
}

int cmd_train(const Flags& f, std::ostream& out) {
  const Run r = resolve(f);
  const auto& c = r.cfg;
  const data::Corpus beats = load_corpus(c);
  const auto split = split_for(c, beats);
  Rng init(c.init_seed());
  model::Network net(c.network, init);
  const auto result = train::train(net, split.train, split.validation, c.train);

  train::write_history_csv(result.history, r.out / "history.csv");
  const fs::path ckpt =
      c.paths.checkpoint.empty() ? r.out / "checkpoint" : fs::path(c.paths.checkpoint);
  ckpt::save_network(net, ckpt);
  echo_config(r);
  out << "trained " << result.history.size() << " epochs on " << split.train.size()
      << " beats; best epoch " << result.best_epoch << ", validation accuracy "
      << io::format_double(result.best_val_accuracy) << "\n";
  if (!split.test.empty()) {
    data::write_corpus_csv(split.test, r.out / "test.csv");
    const auto report = eval::evaluate(net, split.test, report_view(c));
    out << "test accuracy " << io::format_double(report.accuracy) << " on "
        << split.test.size() << " beats\n";
  }
  out << "checkpoint " << ckpt.string() << "\n";
  return kOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const Run r = resolve(f);
  const auto& c = r.cfg;
  if (c.paths.checkpoint.empty()) throw UsageError("no checkpoint given (--checkpoint)");
  model::Network net = [&] {
    if (!r.network_from_file) return ckpt::load_network(c.paths.checkpoint);
    Rng unused(0);
    model::Network n(c.network, unused);
    ckpt::load_into(n, c.paths.checkpoint);
    return n;
  }();
  config::ExperimentConfig view = c;
  view.network = net.spec();
  const data::Corpus beats = load_corpus(view);
  const auto report = eval::evaluate(net, beats, report_view(c));
  eval::write_metrics_csv(report, r.out / "metrics.csv");
  eval::write_confusion_text(report, r.out / "confusion.txt");
  out << eval::format_confusion(report);
  return kOk;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  Flags g = f;
  const std::vector<double> taus = f.taus;
  g.taus.clear();
  Run r = resolve(g);
  if (!taus.empty()) r.cfg.eval.taus = taus;
  r.cfg.validate();
  const auto& c = r.cfg;
  const data::Corpus beats = load_corpus(c);
  const auto split = split_for(c, beats);
  if (split.test.empty()) throw UsageError("sweep needs eval.test_patients > 0");
  const auto rows = eval::confidence_sweep(split, c.eval.taus, c.network, c.train, c.init_seed());
  eval::write_sweep_csv(rows, r.out / "sweep.csv");
  echo_config(r);
  for (const auto& row : rows) {
    out << io::format_double(row.tau) << "," << io::format_double(row.accuracy) << "\n";
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-routed positive/negative learning for heartbeat classification",
               "negres"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic beat corpus");
  add_common(synth, f);
  synth->add_option("--beats-per-class", f.beats_per_class, "Beats per class");
  synth->add_option("--classes", f.classes, "Class codes to generate, e.g. NV");

  auto* pre = app.add_subcommand("preprocess", "Segment raw traces into unlabeled beats");
  add_common(pre, f);
  pre->add_option("traces", f.traces, "Trace files (.csv or binary)");

  auto* trn = app.add_subcommand("train", "Train a network on a labeled corpus");
  add_common(trn, f);
  trn->add_option("--corpus", f.corpus, "Labeled corpus CSV");
  trn->add_option("--checkpoint", f.checkpoint, "Checkpoint directory to write");
  trn->add_option("--epochs", f.epochs, "Training epochs");
  trn->add_option("--tau", f.taus, "Confidence threshold")->expected(1);
  trn->add_flag("--baseline", f.baseline, "Positive learning only (warmup = epochs)");

  auto* ev = app.add_subcommand("eval", "Score a checkpoint on a corpus");
  add_common(ev, f);
  ev->add_option("--corpus", f.corpus, "Labeled corpus CSV");
  ev->add_option("--checkpoint", f.checkpoint, "Checkpoint directory");

  auto* sw = app.add_subcommand("sweep", "Train once per confidence threshold");
  add_common(sw, f);
  sw->add_option("--corpus", f.corpus, "Labeled corpus CSV");
  sw->add_option("--epochs", f.epochs, "Training epochs");
  sw->add_option("--tau", f.taus, "Threshold to include (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*synth) return cmd_synth(f, out);
    if (*pre) return cmd_preprocess(f, out, err);
    if (*trn) return cmd_train(f, out);
    if (*ev) return cmd_eval(f, out);
    if (*sw) return cmd_sweep(f, out);
  } catch (const UsageError& e) {
    err << "negres: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "negres: config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const CheckpointError& e) {
    err << "negres: checkpoint error: " << e.what() << "\n";
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "negres: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace negres::cli
