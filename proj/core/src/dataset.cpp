#include "negres/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "negres/error.hpp"
#include "negres/io.hpp"

namespace negres::data {
namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace

Corpus balance_classes(const Corpus& beats, Rng& rng, std::span<const Label> labels) {
  std::map<Label, std::vector<std::size_t>> by_label;
  for (Label l : labels) by_label[l];
  for (std::size_t i = 0; i < beats.size(); ++i) {
    auto it = by_label.find(beats[i].given_label);
    if (it != by_label.end()) it->second.push_back(i);
  }
  std::size_t per_class = beats.size();
  for (Label l : labels) {
    const auto& idx = by_label[l];
    if (idx.empty()) {
      throw DataError(std::string("cannot balance: no beats labeled ") + label_code(l));
    }
    per_class = std::min(per_class, idx.size());
  }
  std::vector<std::size_t> chosen;
  for (Label l : labels) {
    auto idx = by_label[l];
    // Partial Fisher-Yates: the first per_class entries are a uniform sample.
    for (std::size_t i = 0; i < per_class; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  shuffle(chosen, rng);
  Corpus out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(beats[i]);
  return out;
}

NoisyCorpus inject_label_noise(const Corpus& beats, const NoiseSpec& spec) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw ConfigError("noise rate must be in [0, 1), got " + std::to_string(spec.rate));
  }
  Rng rng(spec.seed);
  NoisyCorpus out;
  out.beats = beats;
  for (LabeledBeat& b : out.beats) {
    if (!b.clean_label) b.clean_label = b.given_label;
    if (spec.exempt_labels.contains(b.given_label)) continue;
    ++out.eligible;
    if (!rng.bernoulli(spec.rate)) continue;
    // Uniform over the other five: draw from 0..4 and skip the source.
    auto k = static_cast<std::size_t>(rng.below(kAllLabels.size() - 1));
    if (k >= static_cast<std::size_t>(b.given_label)) ++k;
    b.given_label = kAllLabels[k];
    ++out.flipped;
  }
  return out;
}

std::vector<std::string> patient_ids(const Corpus& beats) {
  std::vector<std::string> ids;
  for (const auto& b : beats) {
    if (std::find(ids.begin(), ids.end(), b.patient_id) == ids.end()) {
      ids.push_back(b.patient_id);
    }
  }
  return ids;
}

PatientSplit split_by_patient(const Corpus& beats, std::size_t holdout_patients, Rng& rng) {
  auto ids = patient_ids(beats);
  if (ids.size() <= holdout_patients) {
    throw DataError("cannot hold out " + std::to_string(holdout_patients) + " of " +
                    std::to_string(ids.size()) + " patients");
  }
  std::sort(ids.begin(), ids.end());
  shuffle(ids, rng);
  PatientSplit split;
  split.validation_patients.assign(ids.begin(),
                                   ids.begin() + static_cast<std::ptrdiff_t>(holdout_patients));
  std::sort(split.validation_patients.begin(), split.validation_patients.end());
  for (const auto& b : beats) {
    const bool held = std::binary_search(split.validation_patients.begin(),
                                         split.validation_patients.end(), b.patient_id);
    (held ? split.validation : split.train).push_back(b);
  }
  return split;
}

Label merge_interference(std::string_view code) {
  return merge_interference(parse_label(code));
}

std::array<std::size_t, 6> label_counts(const Corpus& beats) {
  std::array<std::size_t, 6> counts{};
  for (const auto& b : beats) ++counts[static_cast<std::size_t>(b.given_label)];
  return counts;
}

Corpus synthesize_corpus(const SynthCorpusConfig& config) {
  if (config.patients == 0) throw ConfigError("synthetic corpus needs at least one patient");
  if (config.classes.empty()) throw ConfigError("synthetic corpus needs at least one class");
  const Rng root(config.base.seed);
  Corpus out;
  for (std::size_t p = 0; p < config.patients; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "P%02zu", p + 1);
    Rng prng = root.substream("patient").substream(p);
    const signal::SynthConfig variant = signal::patient_variant(config.base, prng);
    for (Label label : config.classes) {
      const std::size_t n = config.beats_per_class / config.patients +
                            (p < config.beats_per_class % config.patients ? 1 : 0);
      if (n == 0) continue;
      signal::SynthConfig cfg = variant;
      cfg.seed = mix64(variant.seed ^ (0x9e37U + static_cast<std::uint64_t>(label)));
      const auto synth = signal::synth_ecg(cfg, n, label);
      for (auto& seg : signal::segment_beats(synth.trace, synth.r_peaks)) {
        out.push_back({signal::normalize_beat(std::move(seg)), label, label, id});
      }
    }
  }
  return out;
}

namespace {

std::string csv_header() {
  std::string h = "patient_id,label,clean_label";
  for (std::size_t i = 0; i < signal::kWindow; ++i) h += ",s" + std::to_string(i);
  return h + "\n";
}

void append_values(std::string& out, const std::vector<double>& values) {
  for (double v : values) {
    out += ',';
    out += io::format_double(v);
  }
  out += '\n';
}

void check_patient_id(const std::string& id) {
  if (id.find_first_of(",\n\r") != std::string::npos) {
    throw DataError("patient id '" + id + "' contains a CSV separator");
  }
}

}  // namespace

void write_corpus_csv(const Corpus& beats, const std::filesystem::path& path) {
  std::string out = csv_header();
  for (const auto& b : beats) {
    if (b.segment.values.size() != signal::kWindow) {
      throw DataError("beat of length " + std::to_string(b.segment.values.size()) +
                      ", expected " + std::to_string(signal::kWindow));
    }
    check_patient_id(b.patient_id);
    out += b.patient_id;
    out += ',';
    out += label_code(b.given_label);
    out += ',';
    if (b.clean_label) out += label_code(*b.clean_label);
    append_values(out, b.segment.values);
  }
  io::write_file_atomic(path, out);
}

void write_unlabeled_csv(std::span<const UnlabeledRecording> recordings,
                         const std::filesystem::path& path) {
  std::string out = csv_header();
  for (const auto& r : recordings) {
    check_patient_id(r.patient_id);
    for (const auto& s : r.segments) {
      if (s.values.size() != signal::kWindow) {
        throw DataError("segment of length " + std::to_string(s.values.size()) + ", expected " +
                        std::to_string(signal::kWindow));
      }
      out += r.patient_id + ",,";
      append_values(out, s.values);
    }
  }
  io::write_file_atomic(path, out);
}

void write_unlabeled_csv(const std::string& patient_id,
                         const std::vector<signal::BeatSegment>& segments,
                         const std::filesystem::path& path) {
  const UnlabeledRecording one{patient_id, segments};
  write_unlabeled_csv(std::span<const UnlabeledRecording>(&one, 1), path);
}

Corpus read_corpus_csv(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Corpus out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind("patient_id,label,clean_label", 0) != 0) {
        throw ParseError("corpus header must start with patient_id,label,clean_label", 1);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = io::split(line, ',');
    if (fields.size() != 3 + signal::kWindow) {
      throw ParseError("expected " + std::to_string(3 + signal::kWindow) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    LabeledBeat b;
    b.patient_id = std::string(fields[0]);
    auto given = try_parse_label(fields[1]);
    if (!given) {
      throw ParseError("label '" + std::string(fields[1]) + "' is not one of N/V/S/A/E/Q",
                       line_no);
    }
    b.given_label = *given;
    if (!fields[2].empty()) {
      auto clean = try_parse_label(fields[2]);
      if (!clean) {
        throw ParseError("clean_label '" + std::string(fields[2]) + "' is not a label", line_no);
      }
      b.clean_label = *clean;
    }
    b.segment.values.reserve(signal::kWindow);
    b.segment.r_index = signal::kWindowPre;
    for (std::size_t i = 0; i < signal::kWindow; ++i) {
      try {
        b.segment.values.push_back(io::parse_double(fields[3 + i]));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    out.push_back(std::move(b));
  }
  if (line_no == 0) throw ParseError("empty corpus file " + path.string(), 1);
  return out;
}

}  // namespace negres::data
