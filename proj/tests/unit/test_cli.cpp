#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "negres/config.hpp"
#include "negres/dataset.hpp"
#include "negres/io.hpp"
#include "negres/signal.hpp"
#include "support/fixtures.hpp"

using namespace negres;
using negres::fixtures::slurp;
using negres::fixtures::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "negres");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Small network and splits so training in tests stays quick.
std::string small_config(const TempDir& dir, const std::string& extra_train = "") {
  const auto path = dir / "small.json";
  io::write_file_atomic(path, R"({"network": {"base_filters": 4, "kernel_size": 3},
    "train": {"batch_size": 8)" + extra_train + R"(},
    "eval": {"test_patients": 1, "validation_patients": 1}})");
  return path.string();
}

std::string toy_corpus_file(const TempDir& dir, std::size_t per_class, std::size_t patients) {
  const auto path = dir / "toy.csv";
  data::write_corpus_csv(fixtures::toy_corpus(per_class, 5, patients), path);
  return path.string();
}

}  // namespace

TEST(CliSynth, CountsDeterminismAndFilter) {
  TempDir dir("cli_synth");
  auto a = run({"synth", "--seed", "4", "--out", (dir / "a").string()});
  ASSERT_EQ(a.code, cli::kOk) << a.err;
  const auto text = slurp(dir / "a" / "corpus.csv");
  EXPECT_EQ(lines(text), 3001u);
  EXPECT_NE(a.out.find("N=500 V=500 S=500 A=500 E=500 Q=500"), std::string::npos);
  ASSERT_EQ(run({"synth", "--seed", "4", "--out", (dir / "b").string()}).code, cli::kOk);
  EXPECT_EQ(slurp(dir / "b" / "corpus.csv"), text);

  ASSERT_EQ(run({"synth", "--seed", "4", "--classes", "NV", "--beats-per-class", "20", "--out",
                 (dir / "c").string()})
                .code,
            cli::kOk);
  const auto beats = data::read_corpus_csv(dir / "c" / "corpus.csv");
  EXPECT_EQ(beats.size(), 40u);
  for (const auto& b : beats) EXPECT_TRUE(b.given_label == Label::N || b.given_label == Label::V);
}

TEST(CliSynth, NoiseKeepsCleanLabels) {
  TempDir dir("cli_noise");
  ASSERT_EQ(run({"synth", "--seed", "2", "--beats-per-class", "50", "--noise-rate", "0.3", "--out",
                 dir.path().string()})
                .code,
            cli::kOk);
  const auto beats = data::read_corpus_csv(dir / "corpus.csv");
  std::size_t flipped = 0;
  for (const auto& b : beats) {
    ASSERT_TRUE(b.clean_label.has_value());
    flipped += b.mislabeled();
  }
  EXPECT_GT(flipped, 0u);
}

TEST(CliConfig, EchoRoundTripsAndFlagsWin) {
  TempDir dir("cli_echo");
  io::write_file_atomic(dir / "in.json", R"({"seed": 3, "noise": {"rate": 0.1}})");
  ASSERT_EQ(run({"synth", "--config", (dir / "in.json").string(), "--seed", "8",
                 "--beats-per-class", "5", "--out", dir.path().string()})
                .code,
            cli::kOk);
  const auto echoed = config::load_experiment_config(dir / "config.json");
  EXPECT_EQ(echoed.seed, 8u);
  EXPECT_EQ(echoed.noise.rate, 0.1);
  EXPECT_EQ(echoed.synth.beats_per_class, 5u);
  EXPECT_EQ(config::to_json(echoed), slurp(dir / "config.json"));
}

TEST(CliErrors, ExitCodes) {
  TempDir dir("cli_err");
  EXPECT_EQ(run({}).code, cli::kUsageError);
  EXPECT_EQ(run({"bogus"}).code, cli::kUsageError);
  EXPECT_EQ(run({"synth", "--seed", "x"}).code, cli::kUsageError);
  const auto missing = run({"train", "--corpus", (dir / "nope.csv").string(), "--out",
                            dir.path().string()});
  EXPECT_EQ(missing.code, cli::kUsageError);
  EXPECT_NE(missing.err.find("not found"), std::string::npos);
  EXPECT_EQ(run({"synth", "--noise-rate", "1.5", "--out", dir.path().string()}).code,
            cli::kUsageError);
  EXPECT_EQ(run({"synth", "--config", (dir / "none.json").string()}).code, cli::kUsageError);
  EXPECT_EQ(run({"synth", "--classes", "NZ", "--out", dir.path().string()}).code,
            cli::kUsageError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(CliPreprocess, SegmentsSyntheticTrace) {
  TempDir dir("cli_pre");
  signal::SynthConfig sc;
  sc.heart_rate_min_bpm = sc.heart_rate_max_bpm = 75.0;
  sc.rr_jitter = 0.0;
  sc.seed = 3;
  const auto s = signal::synth_ecg(sc, 75, Label::N);
  ASSERT_NEAR(static_cast<double>(s.trace.samples.size()) / signal::kSampleRate, 60.0, 1.5);
  auto trace = s.trace;
  trace.patient_id = "P07";
  signal::write_trace_csv(trace, dir / "p07.csv");
  const auto r = run({"preprocess", (dir / "p07.csv").string(), "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const std::string csv = slurp(dir / "segments.csv");
  const std::size_t rows = lines(csv) - 1;
  EXPECT_GE(rows, 72u);
  EXPECT_LE(rows, 75u);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto fields = io::split(line, ',');
    ASSERT_EQ(fields.size(), 253u);
    EXPECT_EQ(fields[0], "P07");
    EXPECT_EQ(fields[1], "");
    for (std::size_t i = 3; i < fields.size(); ++i) {
      const double v = io::parse_double(fields[i]);
      EXPECT_GE(v, -0.5);
      EXPECT_LE(v, 0.5);
    }
  }
}

TEST(CliPreprocess, EmptyAndMalformedTraces) {
  TempDir dir("cli_pre_edge");
  signal::RawTrace empty;
  empty.patient_id = "P01";
  signal::write_trace_csv(empty, dir / "empty.csv");
  const auto r = run({"preprocess", (dir / "empty.csv").string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(lines(slurp(dir / "segments.csv")), 1u);

  io::write_file_atomic(dir / "bad.csv", "patient_id,sample_rate\nP1,250\n0.1\nabc\n");
  const auto bad = run({"preprocess", (dir / "bad.csv").string(), "--out", dir.path().string()});
  EXPECT_EQ(bad.code, cli::kRuntimeFailure);
  EXPECT_NE(bad.err.find("line 4"), std::string::npos) << bad.err;
}

TEST(CliTrain, HistoryBaselineAndEval) {
  TempDir dir("cli_train");
  const auto cfg = small_config(dir);
  const auto corpus = toy_corpus_file(dir, 6, 4);
  const auto nl = run({"train", "--config", cfg, "--corpus", corpus, "--epochs", "3", "--seed",
                       "2", "--out", (dir / "nl").string()});
  ASSERT_EQ(nl.code, cli::kOk) << nl.err;
  const auto base = run({"train", "--config", cfg, "--corpus", corpus, "--epochs", "3", "--seed",
                         "2", "--baseline", "--out", (dir / "pl").string()});
  ASSERT_EQ(base.code, cli::kOk) << base.err;
  const auto h_nl = slurp(dir / "nl" / "history.csv");
  const auto h_pl = slurp(dir / "pl" / "history.csv");
  EXPECT_EQ(lines(h_nl), 4u);
  EXPECT_EQ(lines(h_pl), 4u);
  auto row = [](const std::string& s, std::size_t n) {
    std::istringstream in(s);
    std::string line;
    for (std::size_t i = 0; i <= n; ++i) std::getline(in, line);
    return line;
  };
  EXPECT_EQ(row(h_nl, 1), row(h_pl, 1));
  EXPECT_EQ(config::load_experiment_config(dir / "pl" / "config.json").train.routing.warmup_epochs,
            3u);

  // One-beat corpus.
  auto one = data::read_corpus_csv(corpus);
  one.resize(1);
  data::write_corpus_csv(one, dir / "one.csv");
  const auto ck = (dir / "nl" / "checkpoint").string();
  const auto e1 = run({"eval", "--checkpoint", ck, "--corpus", (dir / "one.csv").string(), "--out",
                       (dir / "e1").string()});
  ASSERT_EQ(e1.code, cli::kOk) << e1.err;
  EXPECT_NE(e1.out.find("/1)"), std::string::npos) << e1.out;

  const auto e2 = run({"eval", "--checkpoint", ck, "--corpus", corpus, "--out",
                       (dir / "e2").string()});
  const auto e3 = run({"eval", "--checkpoint", ck, "--corpus", corpus, "--out",
                       (dir / "e3").string()});
  ASSERT_EQ(e2.code, cli::kOk);
  EXPECT_EQ(slurp(dir / "e2" / "metrics.csv"), slurp(dir / "e3" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "e2" / "confusion.txt"), slurp(dir / "e3" / "confusion.txt"));

  // A config that names a different architecture cannot load the checkpoint.
  io::write_file_atomic(dir / "wide.json", R"({"network": {"base_filters": 8, "kernel_size": 3}})");
  const auto mismatch = run({"eval", "--config", (dir / "wide.json").string(), "--checkpoint", ck,
                             "--corpus", corpus, "--out", (dir / "e4").string()});
  EXPECT_EQ(mismatch.code, cli::kRuntimeFailure);
  EXPECT_NE(mismatch.err.find("checkpoint error"), std::string::npos);
}

TEST(CliTrain, ReproducibleOutputs) {
  TempDir dir("cli_repro");
  const auto cfg = small_config(dir);
  const auto corpus = toy_corpus_file(dir, 4, 4);
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run({"train", "--config", cfg, "--corpus", corpus, "--epochs", "2", "--out",
                   (dir / sub).string()})
                  .code,
              cli::kOk);
  }
  EXPECT_EQ(slurp(dir / "a" / "history.csv"), slurp(dir / "b" / "history.csv"));
  EXPECT_EQ(slurp(dir / "a" / "test.csv"), slurp(dir / "b" / "test.csv"));
  EXPECT_EQ(slurp(dir / "a" / "checkpoint" / "t00000.bin"),
            slurp(dir / "b" / "checkpoint" / "t00000.bin"));
}

TEST(CliEval, SeparableTrainingSetIsLearned) {
  TempDir dir("cli_sep");
  io::write_file_atomic(dir / "sep.json", R"({"network": {"base_filters": 4, "kernel_size": 3},
    "train": {"batch_size": 8, "keep_best": false},
    "eval": {"test_patients": 0, "validation_patients": 0}})");
  const auto corpus = toy_corpus_file(dir, 10, 3);
  ASSERT_EQ(run({"train", "--config", (dir / "sep.json").string(), "--corpus", corpus, "--epochs",
                 "15", "--out", dir.path().string()})
                .code,
            cli::kOk);
  const auto e = run({"eval", "--checkpoint", (dir / "checkpoint").string(), "--corpus", corpus,
                      "--out", (dir / "eval").string()});
  ASSERT_EQ(e.code, cli::kOk);
  const auto pos = e.out.find("accuracy ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GE(std::stod(e.out.substr(pos + 9)), 0.99) << e.out;
}

TEST(CliSweep, RowsAndOrdering) {
  TempDir dir("cli_sweep");
  const auto cfg = small_config(dir);
  const auto corpus = toy_corpus_file(dir, 4, 4);
  const auto r = run({"sweep", "--config", cfg, "--corpus", corpus, "--epochs", "1", "--tau",
                      "0.3", "--tau", "0.99", "--tau", "0.8", "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(lines(csv), 4u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,accuracy");
  EXPECT_NE(csv.find("\n0.99,"), std::string::npos);
  EXPECT_LT(csv.find("\n0.99,"), csv.find("\n0.8,"));
  EXPECT_LT(csv.find("\n0.8,"), csv.find("\n0.3,"));

  const auto one = run({"sweep", "--config", cfg, "--corpus", corpus, "--epochs", "1", "--tau",
                        "0.5", "--out", (dir / "one").string()});
  ASSERT_EQ(one.code, cli::kOk);
  EXPECT_EQ(lines(slurp(dir / "one" / "sweep.csv")), 2u);

  const auto all = run({"sweep", "--config", cfg, "--corpus", corpus, "--epochs", "1", "--out",
                        (dir / "all").string()});
  ASSERT_EQ(all.code, cli::kOk);
  EXPECT_EQ(lines(slurp(dir / "all" / "sweep.csv")), 9u);
}
