// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails.
//
//   negres_acceptance [--only 1,2,7] [--seeds 1,2,3]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "negres/autodiff.hpp"
#include "negres/config.hpp"
#include "negres/dataset.hpp"
#include "negres/evaluation.hpp"
#include "negres/model.hpp"
#include "negres/signal.hpp"
#include "negres/training.hpp"
#include "support/oracles.hpp"

using namespace negres;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

void report(int id, const char* name, const Verdict& v) {
  std::printf("criterion %2d %s: %s (%s)\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  std::fflush(stdout);
}

void progress(const char* fmt, auto... args) {
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
  std::fflush(stderr);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

model::NetworkSpec random_spec(Rng& rng) {
  model::NetworkSpec s;
  s.input_length = 8 + rng.below(25);
  s.n_classes = 2 + rng.below(5);
  s.stem_channels = 1 + rng.below(3);
  s.stem_kernel = rng.bernoulli(0.5) ? 3 : 5;
  std::size_t ch = s.stem_channels, len = s.input_length;
  const std::size_t blocks = 1 + rng.below(3);
  for (std::size_t b = 0; b < blocks; ++b) {
    model::ResidualBlockSpec blk;
    blk.channels_in = ch;
    blk.channels_out = rng.bernoulli(0.3) ? ch + 1 : ch;
    blk.kernel_size = rng.bernoulli(0.5) ? 3 : 5;
    blk.subsample = len >= 4 && rng.bernoulli(0.4);
    blk.dropout_rate = rng.bernoulli(0.5) ? 0.3 : 0.0;
    if (blk.subsample) len /= 2;
    ch = blk.channels_out;
    s.blocks.push_back(blk);
  }
  s.final_channels = 1 + rng.below(3);
  return s;
}

Verdict gradient_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t coords = 0, bad = 0;
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const auto spec = random_spec(rng);
    model::Network net(spec, rng);
    // Move every parameter off its initial value so zero-initialized gammas
    // do not hide whole branches.
    for (auto& p : net.parameters()) {
      for (double& v : p.value.values()) v += rng.uniform(-0.3, 0.3);
    }
    const std::size_t batch = 1 + rng.below(4);
    Tensor x({batch, 1, spec.input_length});
    for (double& v : x.values()) v = rng.uniform(-1.0, 1.0);
    std::vector<std::size_t> pos(batch), neg(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      pos[i] = rng.below(spec.n_classes);
      neg[i] = (pos[i] + 1 + rng.below(spec.n_classes - 1)) % spec.n_classes;
    }
    const Rng drop_seed = rng.substream(static_cast<std::uint64_t>(n));
    auto loss_on = [&](ad::Tape& tape) {
      Rng drop = drop_seed;
      const auto probs = net.forward(tape, tape.constant(x), ad::Mode::kTrain, drop);
      return ad::add(tape, ad::positive_loss(tape, probs, pos),
                     ad::scale(tape, ad::negative_loss(tape, probs, neg), 0.7));
    };
    ad::zero_grads(net.parameters());
    {
      ad::Tape tape;
      tape.backward(loss_on(tape));
    }
    const std::function<double()> scalar = [&] {
      ad::Tape tape;
      return tape.value(loss_on(tape)).item();
    };
    // Round-off of the difference quotient bounds what can be resolved for
    // coordinates whose true gradient is zero.
    const double h = 1e-4;
    const double resolvable = 100 * std::numeric_limits<double>::epsilon() *
                              std::max(1.0, std::abs(scalar())) / h;
    for (auto& p : net.parameters()) {
      const Tensor analytic = p.grad;
      const auto numeric = oracle::numeric_gradient5(p.value, scalar, h);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        const double e = oracle::relative_error(analytic[i], numeric[i], resolvable / 1e-5);
        worst = std::max(worst, e);
        bad += e > 1e-5;
        ++coords;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 120.0,
          fmt("20 networks, %zu coordinates, %zu above 1e-5, max rel err %.2e (5-point, h 1e-4), %.1f s", coords,
              bad, worst, secs)};
}

// ---------------------------------------------------------------- 2

Verdict loss_identities() {
  ad::Tape tape;
  const auto u = tape.constant(Tensor({1, 6}, 1.0 / 6.0));
  const std::vector<std::size_t> zero{0};
  const double pl = tape.value(ad::positive_loss(tape, u, zero)).item();
  const double nl = tape.value(ad::negative_loss(tape, u, zero)).item();
  const double e_pl = std::abs(pl - std::log(6.0));
  const double e_nl = std::abs(nl + std::log(5.0 / 6.0));
  // NL on p equals PL on the complementary probability 1 - p.
  Rng rng(7);
  std::size_t mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform(1e-9, 1.0 - 1e-9);
    ad::Tape t;
    const auto v = t.constant(Tensor({1, 2}, std::vector<double>{p, 1.0 - p}));
    const std::vector<std::size_t> zero_row{0}, one_row{1};
    const double neg = t.value(ad::negative_loss(t, v, zero_row)).item();
    const double pos = t.value(ad::positive_loss(t, v, one_row)).item();
    mismatches += neg != pos || neg != -std::log(1.0 - p);
  }
  return {e_pl <= 1e-12 && e_nl <= 1e-12 && mismatches == 0,
          fmt("|PL - ln 6| = %.1e, |NL + ln(5/6)| = %.1e, flip mismatches %zu / 10000", e_pl,
              e_nl, mismatches)};
}

// ---------------------------------------------------------------- 3

Verdict complementary_distribution() {
  Rng rng(11);
  const std::size_t source = 0, draws = 100000;
  std::vector<std::size_t> counts(6, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    ++counts[train::gen_complementary_label(source, 6, rng).y_prime];
  }
  const std::vector<std::size_t> others(counts.begin() + 1, counts.end());
  const double stat = oracle::chi_square_stat(others, static_cast<double>(draws) / 5.0);
  const double p = oracle::chi_square_sf_df4(stat);
  return {p > 0.01 && counts[source] == 0,
          fmt("chi2 = %.3f, df 4, p = %.3f, draws equal to source %zu", stat, p, counts[source])};
}

// ---------------------------------------------------------------- 4

Verdict routing_properties() {
  Rng rng(13);
  const auto tax = LabelTaxonomy::full();
  std::size_t violations = 0, rows = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t b = 1 + rng.below(64);
    Tensor p({b, 6});
    std::vector<Label> given(b);
    for (std::size_t i = 0; i < b; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < 6; ++c) s += (p[i * 6 + c] = rng.uniform());
      for (std::size_t c = 0; c < 6; ++c) p[i * 6 + c] /= s;
      given[i] = static_cast<Label>(rng.below(6));
    }
    train::RoutingPolicy lo, hi;
    lo.tau = rng.uniform(0.01, 0.98);
    hi.tau = rng.uniform(lo.tau, 0.99);
    lo.per_class_tau.clear();
    hi.per_class_tau.clear();
    const auto a = train::route_batch(p, given, lo, tax);
    const auto c = train::route_batch(p, given, hi, tax);
    // Partition: every row exactly once, both lists ascending.
    std::vector<int> seen(b, 0);
    for (auto i : a.clean) ++seen[i];
    for (auto i : a.noisy) ++seen[i];
    violations += std::count_if(seen.begin(), seen.end(), [](int s) { return s != 1; });
    violations += !std::is_sorted(a.clean.begin(), a.clean.end());
    violations += !std::is_sorted(a.noisy.begin(), a.noisy.end());
    // Rule: clean iff p[given] >= tau.
    for (auto i : a.clean) violations += !(p[i * 6 + tax.index_of(given[i])] >= lo.tau);
    for (auto i : a.noisy) violations += !(p[i * 6 + tax.index_of(given[i])] < lo.tau);
    // Monotone: a higher tau never moves a row from noisy to clean.
    violations +=
        !std::includes(a.clean.begin(), a.clean.end(), c.clean.begin(), c.clean.end());
    rows += b;
  }
  return {violations == 0, fmt("10000 batches, %zu rows, %zu violations", rows, violations)};
}

// ---------------------------------------------------------------- 5

Verdict qrs_detector() {
  const auto t0 = Clock::now();
  std::size_t truth = 0, hits = 0, found = 0;
  double worst_recall = 1.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    signal::SynthConfig c;
    c.seed = 10000 + seed;
    const auto s = signal::synth_ecg(c, 40, Label::N);
    const auto peaks = signal::detect_qrs(s.trace);
    // +-50 ms at 250 Hz.
    const auto [h, f] = oracle::match_peaks(s.r_peaks, peaks, 12);
    truth += s.r_peaks.size();
    hits += h;
    found += f;
    worst_recall = std::min(worst_recall, static_cast<double>(h) / s.r_peaks.size());
  }
  const double recall = static_cast<double>(hits) / static_cast<double>(truth);
  const double precision = found ? static_cast<double>(hits) / static_cast<double>(found) : 0.0;
  const double secs = seconds_since(t0);
  return {recall >= 0.99 && precision >= 0.99 && secs < 60.0,
          fmt("100 traces, %zu beats, recall %.4f, precision %.4f, worst trace recall %.3f, "
              "%.1f s",
              truth, recall, precision, worst_recall, secs)};
}

// ---------------------------------------------------------------- 6

Verdict normalization() {
  Rng rng(17);
  std::size_t range_bad = 0, extreme_bad = 0;
  double affine_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t len = 2 + rng.below(400);
    std::vector<double> x(len);
    const double scale = std::exp(rng.uniform(-5.0, 5.0));
    const double shift = rng.uniform(-100.0, 100.0);
    for (double& v : x) v = shift + scale * rng.normal();
    auto y = x;
    signal::normalize_in_place(y);
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    range_bad += std::count_if(y.begin(), y.end(), [](double v) { return v < -0.5 || v > 0.5; });
    extreme_bad += *mn != -0.5 || *mx != 0.5;
    const double a = std::exp(rng.uniform(-3.0, 3.0));
    const double b = rng.uniform(-50.0, 50.0);
    auto z = x;
    for (double& v : z) v = a * v + b;
    signal::normalize_in_place(z);
    const auto ref = oracle::midrange_normalize(x);
    for (std::size_t k = 0; k < len; ++k) {
      affine_err = std::max({affine_err, std::abs(z[k] - y[k]), std::abs(ref[k] - y[k])});
    }
  }
  std::vector<double> flat(250, 3.25);
  signal::normalize_in_place(flat);
  const bool zeros = std::all_of(flat.begin(), flat.end(), [](double v) { return v == 0.0; });
  return {range_bad == 0 && extreme_bad == 0 && affine_err <= 1e-9 && zeros,
          fmt("10000 segments, %zu out of range, %zu without exact extremes, max affine err "
              "%.1e, constant -> zeros %s",
              range_bad, extreme_bad, affine_err, zeros ? "yes" : "no")};
}

// ---------------------------------------------------------------- 7-9

// The experiment network is the standard topology at reduced width and
// kernel size so one run fits the time budget on a single CPU core.
const model::NetworkSpec kSurrogateNet = model::NetworkSpec::scaled(8, 9);

struct Surrogate {
  config::ExperimentConfig cfg;
  eval::ExperimentSplit split;
  double flip_fraction = 0.0;
};

Surrogate make_surrogate(std::uint64_t seed, double eta) {
  Surrogate s;
  auto& c = s.cfg;
  c.seed = seed;
  c.synth.beats_per_class = 2000;
  c.synth.patients = 12;
  c.noise.rate = eta;
  c.network = kSurrogateNet;
  c.train.epochs = 30;
  c.train.keep_best = false;
  c.derive_seeds();
  const auto corpus = data::synthesize_corpus(c.synth);
  auto noisy = data::inject_label_noise(corpus, c.noise);
  s.flip_fraction = noisy.flip_fraction();
  Rng split_rng = c.stream("data").substream("split");
  s.split = eval::split_experiment(noisy.beats, 2, 0, split_rng);
  // Final-epoch weights are scored; no selection set.
  s.split.validation.clear();
  return s;
}

struct RunResult {
  double accuracy = 0.0;
  double seconds = 0.0;
  train::TrainResult history;
};

RunResult run_surrogate(const Surrogate& s, double tau, bool baseline) {
  const auto t0 = Clock::now();
  train::TrainConfig tc = s.cfg.train;
  tc.routing.tau = tau;
  if (baseline) tc.routing.warmup_epochs = tc.epochs;
  Rng init(s.cfg.init_seed());
  model::Network net(s.cfg.network, init);
  RunResult r;
  r.history = train::train(net, s.split.train, s.split.validation, tc);
  r.accuracy = eval::evaluate(net, s.split.test).accuracy;
  r.seconds = seconds_since(t0);
  progress("  seed %llu %s tau %.2f: clean-test accuracy %.4f (%.0f s)",
           static_cast<unsigned long long>(s.cfg.seed), baseline ? "PL " : "NL ", tau,
           r.accuracy, r.seconds);
  return r;
}

struct SeedRuns {
  double pl = 0.0, nl = 0.0, seconds = 0.0;
  std::map<double, double> sweep;
};

// Runs shared by criteria 7 and 8, computed once.
std::map<std::uint64_t, SeedRuns> surrogate_runs(const std::vector<std::uint64_t>& seeds,
                                                 bool with_sweep) {
  std::map<std::uint64_t, SeedRuns> out;
  for (auto seed : seeds) {
    const auto s = make_surrogate(seed, 0.3);
    progress("surrogate seed %llu: %zu train / %zu test beats, %.3f of labels flipped",
             static_cast<unsigned long long>(seed), s.split.train.size(), s.split.test.size(),
             s.flip_fraction);
    SeedRuns r;
    const auto nl = run_surrogate(s, 0.8, false);
    const auto pl = run_surrogate(s, 0.8, true);
    r.nl = nl.accuracy;
    r.pl = pl.accuracy;
    r.seconds = nl.seconds + pl.seconds;
    r.sweep[0.8] = nl.accuracy;
    if (with_sweep) {
      for (double tau : {0.99, 0.3}) r.sweep[tau] = run_surrogate(s, tau, false).accuracy;
    }
    out[seed] = r;
  }
  return out;
}

Verdict nl_beats_baseline(const std::map<std::uint64_t, SeedRuns>& runs) {
  double gain = 0.0, slowest = 0.0;
  std::string per_seed;
  for (const auto& [seed, r] : runs) {
    gain += r.nl - r.pl;
    slowest = std::max(slowest, r.seconds);
    per_seed += fmt("%sseed %llu: NL %.4f vs PL %.4f", per_seed.empty() ? "" : "; ",
                    static_cast<unsigned long long>(seed), r.nl, r.pl);
  }
  gain /= static_cast<double>(runs.size());
  return {gain >= 0.03 && slowest < 20 * 60.0,
          fmt("mean gain %+.2f pp (need >= 3), slowest seed %.0f s; ", 100 * gain, slowest) +
              per_seed};
}

Verdict sweep_shape(const std::map<std::uint64_t, SeedRuns>& runs) {
  std::map<double, double> mean;
  for (const auto& [seed, r] : runs) {
    for (const auto& [tau, acc] : r.sweep) mean[tau] += acc / static_cast<double>(runs.size());
  }
  const bool pass = mean[0.8] > mean[0.99] && mean[0.8] > mean[0.3];
  return {pass, fmt("mean accuracy over %zu seeds: tau 0.99 %.4f, 0.8 %.4f, 0.3 %.4f",
                    runs.size(), mean[0.99], mean[0.8], mean[0.3])};
}

Verdict selection_premise(std::uint64_t seed) {
  const auto s = make_surrogate(seed, 0.4);
  progress("selection run seed %llu: %.3f of labels flipped",
           static_cast<unsigned long long>(seed), s.flip_fraction);
  const auto r = run_surrogate(s, 0.8, false);
  double mis = 0.0, cor = 0.0, worst = 1e300;
  std::size_t n = 0;
  for (const auto& h : r.history.history) {
    if (h.epoch < s.cfg.train.routing.warmup_epochs) continue;
    mis += h.nl_rate_mislabeled;
    cor += h.nl_rate_correct;
    worst = std::min(worst, h.nl_rate_mislabeled / h.nl_rate_correct);
    ++n;
  }
  mis /= static_cast<double>(n);
  cor /= static_cast<double>(n);
  const double ratio = mis / cor;
  return {ratio >= 1.5,
          fmt("eta 0.4, %zu post-warmup epochs: NL rate mislabeled %.3f vs correct %.3f, "
              "ratio %.2f (worst epoch %.2f)",
              n, mis, cor, ratio, worst)};
}

// ---------------------------------------------------------------- 10

Verdict published_f1() {
  // Baseline precision, recall and F1 per class as printed in the paper.
  struct Row {
    char label;
    double precision, recall, f1;
  };
  const Row rows[] = {{'N', 0.80, 0.81, 0.80},
                      {'V', 0.87, 0.88, 0.88},
                      {'S', 0.79, 0.91, 0.85},
                      {'Q', 0.92, 0.81, 0.86},
                      {'A', 0.81, 0.87, 0.84}};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows) {
    const double f1 = eval::f1_score(r.precision, r.recall);
    const double oracle_f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    const double diff = std::abs(f1 - r.f1);
    const bool ok = diff <= 0.005 && std::abs(f1 - oracle_f1) < 1e-15;
    pass = pass && ok;
    detail += fmt("%s%c %.2f/%.2f -> %.6f vs %.2f |d| %.6f %s", detail.empty() ? "" : "; ",
                  r.label, r.precision, r.recall, f1, r.f1, diff, ok ? "ok" : "OUT");
  }
  return {pass, detail};
}

std::vector<std::uint64_t> parse_list(const char* s) {
  std::vector<std::uint64_t> out;
  std::string cur;
  for (const char* p = s;; ++p) {
    if (*p == ',' || *p == '\0') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::uint64_t> only;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--only" || a == "--seeds") && i + 1 < argc) {
      const auto v = parse_list(argv[++i]);
      if (a == "--only") {
        only.insert(v.begin(), v.end());
      } else {
        seeds = v;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...] [--seeds 1,2,3]\n", argv[0]);
      return 2;
    }
  }
  auto selected = [&](int id) { return only.empty() || only.contains(id); };

  bool all = true;
  auto check = [&](int id, const char* name, auto fn) {
    if (!selected(id)) return;
    const Verdict v = fn();
    all = all && v.pass;
    report(id, name, v);
  };
  check(1, "gradient oracle", gradient_oracle);
  check(2, "loss identities", loss_identities);
  check(3, "complementary-label distribution", complementary_distribution);
  check(4, "routing partition and monotonicity", routing_properties);
  check(5, "QRS detector", qrs_detector);
  check(6, "normalization", normalization);
  if (selected(7) || selected(8)) {
    const auto runs = surrogate_runs(seeds, selected(8));
    check(7, "surrogate NL vs PL", [&] { return nl_beats_baseline(runs); });
    check(8, "sweep shape", [&] { return sweep_shape(runs); });
  }
  check(9, "selection premise", [&] { return selection_premise(seeds.front()); });
  check(10, "published F1 cross-check", published_f1);
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
