#include "negres/config.hpp"

#include <initializer_list>
#include <nlohmann/json.hpp>

#include "negres/error.hpp"
#include "negres/io.hpp"

namespace negres::config {

using nlohmann::json;

namespace {

template <class Range>
std::string label_string(const Range& labels) {
  std::string s;
  for (Label l : labels) s += label_code(l);
  return s;
}

std::vector<Label> parse_labels(const std::string& codes) {
  std::vector<Label> out;
  for (char c : codes) out.push_back(parse_label(std::string_view(&c, 1)));
  return out;
}

void only_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json synth_json(const data::SynthCorpusConfig& c) {
  const auto& b = c.base;
  return {{"beats_per_class", c.beats_per_class},
          {"patients", c.patients},
          {"classes", label_string(c.classes)},
          {"heart_rate_min_bpm", b.heart_rate_min_bpm},
          {"heart_rate_max_bpm", b.heart_rate_max_bpm},
          {"rr_jitter", b.rr_jitter},
          {"p_amplitude_mv", b.p_amplitude_mv},
          {"p_duration_s", b.p_duration_s},
          {"pr_interval_min_s", b.pr_interval_min_s},
          {"pr_interval_max_s", b.pr_interval_max_s},
          {"qrs_duration_min_s", b.qrs_duration_min_s},
          {"qrs_duration_max_s", b.qrs_duration_max_s},
          {"r_amplitude_min_mv", b.r_amplitude_min_mv},
          {"r_amplitude_max_mv", b.r_amplitude_max_mv},
          {"qt_interval_min_s", b.qt_interval_min_s},
          {"qt_interval_max_s", b.qt_interval_max_s},
          {"t_amplitude_mv", b.t_amplitude_mv},
          {"t_duration_s", b.t_duration_s},
          {"baseline_wander_mv", b.baseline_wander_mv},
          {"baseline_wander_hz", b.baseline_wander_hz},
          {"emi_mv", b.emi_mv},
          {"motion_burst_rate_hz", b.motion_burst_rate_hz},
          {"motion_burst_mv", b.motion_burst_mv},
          {"white_noise_mv", b.white_noise_mv}};
}

void synth_from(const json& j, data::SynthCorpusConfig& c) {
  only_keys(j, "synth",
            {"beats_per_class", "patients", "classes", "heart_rate_min_bpm",
             "heart_rate_max_bpm", "rr_jitter", "p_amplitude_mv", "p_duration_s",
             "pr_interval_min_s", "pr_interval_max_s", "qrs_duration_min_s",
             "qrs_duration_max_s", "r_amplitude_min_mv", "r_amplitude_max_mv",
             "qt_interval_min_s", "qt_interval_max_s", "t_amplitude_mv", "t_duration_s",
             "baseline_wander_mv", "baseline_wander_hz", "emi_mv", "motion_burst_rate_hz",
             "motion_burst_mv", "white_noise_mv"});
  auto& b = c.base;
  read(j, "beats_per_class", c.beats_per_class);
  read(j, "patients", c.patients);
  if (j.contains("classes")) c.classes = parse_labels(j.at("classes").get<std::string>());
  read(j, "heart_rate_min_bpm", b.heart_rate_min_bpm);
  read(j, "heart_rate_max_bpm", b.heart_rate_max_bpm);
  read(j, "rr_jitter", b.rr_jitter);
  read(j, "p_amplitude_mv", b.p_amplitude_mv);
  read(j, "p_duration_s", b.p_duration_s);
  read(j, "pr_interval_min_s", b.pr_interval_min_s);
  read(j, "pr_interval_max_s", b.pr_interval_max_s);
  read(j, "qrs_duration_min_s", b.qrs_duration_min_s);
  read(j, "qrs_duration_max_s", b.qrs_duration_max_s);
  read(j, "r_amplitude_min_mv", b.r_amplitude_min_mv);
  read(j, "r_amplitude_max_mv", b.r_amplitude_max_mv);
  read(j, "qt_interval_min_s", b.qt_interval_min_s);
  read(j, "qt_interval_max_s", b.qt_interval_max_s);
  read(j, "t_amplitude_mv", b.t_amplitude_mv);
  read(j, "t_duration_s", b.t_duration_s);
  read(j, "baseline_wander_mv", b.baseline_wander_mv);
  read(j, "baseline_wander_hz", b.baseline_wander_hz);
  read(j, "emi_mv", b.emi_mv);
  read(j, "motion_burst_rate_hz", b.motion_burst_rate_hz);
  read(j, "motion_burst_mv", b.motion_burst_mv);
  read(j, "white_noise_mv", b.white_noise_mv);
}

json train_json(const train::TrainConfig& t) {
  json per_class = json::object();
  for (const auto& [label, tau] : t.routing.per_class_tau) {
    per_class[std::string(1, label_code(label))] = tau;
  }
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"momentum", t.momentum},
          {"tau", t.routing.tau},
          {"per_class_tau", per_class},
          {"warmup_epochs", t.routing.warmup_epochs},
          {"pl_weight", t.pl_weight},
          {"nl_weight", t.nl_weight},
          {"keep_best", t.keep_best}};
}

void train_from(const json& j, train::TrainConfig& t) {
  only_keys(j, "train",
            {"epochs", "batch_size", "learning_rate", "momentum", "tau", "per_class_tau",
             "warmup_epochs", "pl_weight", "nl_weight", "keep_best"});
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "learning_rate", t.learning_rate);
  read(j, "momentum", t.momentum);
  read(j, "tau", t.routing.tau);
  read(j, "warmup_epochs", t.routing.warmup_epochs);
  read(j, "pl_weight", t.pl_weight);
  read(j, "nl_weight", t.nl_weight);
  read(j, "keep_best", t.keep_best);
  if (j.contains("per_class_tau")) {
    t.routing.per_class_tau.clear();
    for (const auto& [code, tau] : j.at("per_class_tau").items()) {
      t.routing.per_class_tau[parse_label(code)] = tau.get<double>();
    }
  }
}

model::NetworkSpec network_from(const json& j) {
  if (j.contains("blocks")) return model::network_spec_from_json(j.dump());
  // Shorthand: the standard topology at another width or kernel size.
  only_keys(j, "network", {"base_filters", "kernel_size", "dropout_rate", "n_classes"});
  const auto spec = model::NetworkSpec::scaled(
      j.value("base_filters", std::size_t{32}), j.value("kernel_size", std::size_t{15}),
      j.value("n_classes", std::size_t{6}), j.value("dropout_rate", 0.2));
  spec.validate();
  return spec;
}

}  // namespace

void ExperimentConfig::derive_seeds() {
  synth.base.seed = stream("data").substream("synth").seed();
  noise.seed = stream("noise").seed();
  // Training draws its own data, dropout and routing substreams from this.
  train.seed = seed;
}

void ExperimentConfig::validate() const {
  if (synth.patients == 0) throw ConfigError("synth.patients must be positive");
  if (synth.classes.empty()) throw ConfigError("synth.classes must not be empty");
  if (!(noise.rate >= 0.0 && noise.rate < 1.0)) throw ConfigError("noise.rate must be in [0, 1)");
  const auto& p = preprocess;
  if (!(p.band_low_hz > 0.0 && p.band_low_hz < p.band_high_hz &&
        p.band_high_hz < signal::kSampleRate / 2.0)) {
    throw ConfigError("preprocess band must satisfy 0 < low < high < 125 Hz");
  }
  network.validate();
  train.validate();
  for (double t : eval.taus) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("eval.taus must lie in (0, 1)");
  }
  if (eval.folds == 0) throw ConfigError("eval.folds must be positive");
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["paths"] = {{"corpus_in", c.paths.corpus_in},
                {"corpus_out", c.paths.corpus_out},
                {"checkpoint", c.paths.checkpoint},
                {"reports", c.paths.reports},
                {"traces", c.paths.traces}};
  j["synth"] = synth_json(c.synth);
  j["preprocess"] = {{"band_low_hz", c.preprocess.band_low_hz},
                     {"band_high_hz", c.preprocess.band_high_hz}};
  j["noise"] = {{"rate", c.noise.rate}, {"exempt", label_string(c.noise.exempt_labels)}};
  j["network"] = json::parse(model::to_json(c.network));
  j["train"] = train_json(c.train);
  j["eval"] = {{"test_patients", c.eval.test_patients},
               {"validation_patients", c.eval.validation_patients},
               {"folds", c.eval.folds},
               {"taus", c.eval.taus},
               {"merged_report", c.eval.merged_report}};
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    only_keys(j, "config", {"seed", "paths", "synth", "preprocess", "noise", "network", "train", "eval"});
    read(j, "seed", c.seed);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      only_keys(p, "paths", {"corpus_in", "corpus_out", "checkpoint", "reports", "traces"});
      read(p, "corpus_in", c.paths.corpus_in);
      read(p, "corpus_out", c.paths.corpus_out);
      read(p, "checkpoint", c.paths.checkpoint);
      read(p, "reports", c.paths.reports);
      read(p, "traces", c.paths.traces);
    }
    if (j.contains("synth")) synth_from(j.at("synth"), c.synth);
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      only_keys(p, "preprocess", {"band_low_hz", "band_high_hz"});
      read(p, "band_low_hz", c.preprocess.band_low_hz);
      read(p, "band_high_hz", c.preprocess.band_high_hz);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      only_keys(n, "noise", {"rate", "exempt"});
      read(n, "rate", c.noise.rate);
      if (n.contains("exempt")) {
        const auto labels = parse_labels(n.at("exempt").get<std::string>());
        c.noise.exempt_labels = {labels.begin(), labels.end()};
      }
    }
    if (j.contains("network")) c.network = network_from(j.at("network"));
    if (j.contains("train")) train_from(j.at("train"), c.train);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      only_keys(e, "eval",
                {"test_patients", "validation_patients", "folds", "taus", "merged_report"});
      read(e, "test_patients", c.eval.test_patients);
      read(e, "validation_patients", c.eval.validation_patients);
      read(e, "folds", c.eval.folds);
      read(e, "taus", c.eval.taus);
      read(e, "merged_report", c.eval.merged_report);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.derive_seeds();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(io::read_file(path));
}

}  // namespace negres::config
