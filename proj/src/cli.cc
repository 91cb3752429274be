// Copyright (c) 2026 sasv-fusion authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sasv/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "sasv/fusion.h"
#include "sasv/histogram.h"
#include "sasv/io.h"
#include "sasv/mapping.h"
#include "sasv/metrics.h"
#include "sasv/scoring.h"
#include "sasv/synth.h"
#include "sasv/trainer.h"

namespace sasv {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to `path`, or to `out` when path is "-".
void Emit(const std::string& path, const std::string& text,
          std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
  os << text;
  if (!os) throw Error(ErrorCode::kIo, path + ": write failed");
}

EnrollMode ParseEnrollMode(const std::string& name) {
  return name == "score-mean" ? EnrollMode::kScoreMean
                              : EnrollMode::kEmbeddingMean;
}

const std::vector<std::string> kEnrollModes = {"embedding-mean", "score-mean"};

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::string out_dir;
  WorldSpec spec;
  double head_noise = 0.0;
  std::uint64_t head_noise_seed = 1;
  bool text = false;
};

void RunSynth(const SynthOptions& o, std::ostream& out) {
  World world = GenerateWorld(o.spec);
  fs::create_directories(o.out_dir);
  auto path = [&](const char* name) { return (fs::path(o.out_dir) / name).string(); };
  auto format = o.text ? EmbeddingFormat::kText : EmbeddingFormat::kBinary;
  WriteEmbeddings(path("asv.emb"), world.asv, format);
  WriteEmbeddings(path("cm.emb"), world.cm, format);
  WriteEnrollment(path("enroll.txt"), world.enrollment);
  WriteProtocol(path("train.trials"), world.train);
  WriteProtocol(path("dev.trials"), world.dev);
  WriteProtocol(path("eval.trials"), world.eval);
  WriteCmHead(path("cm_head.txt"), world.true_head);
  if (o.head_noise > 0.0) {
    WriteCmHead(path("cm_head_init.txt"),
                PerturbHead(world.true_head, o.head_noise, o.head_noise_seed));
  }
  out << "wrote " << world.asv.size() << " utterances, "
      << world.enrollment.size() << " speakers, " << world.train.size() << "/"
      << world.dev.size() << "/" << world.eval.size()
      << " train/dev/eval trials to " << o.out_dir << '\n';
}

// ------------------------------------------------------------ calibrate

struct CalibrateOptions {
  std::string asv, enroll, trials, out = "-";
  std::string enroll_mode = "embedding-mean";
  double l2 = kDefaultCalibratorL2;
  int asv_dim = 0;
};

void RunCalibrate(const CalibrateOptions& o, std::ostream& out) {
  EmbeddingTable asv = LoadEmbeddings(o.asv, o.asv_dim);
  EnrollmentMap enrollment = LoadEnrollment(o.enroll);
  std::vector<Trial> trials = LoadProtocol(o.trials);
  SpeakerModels speakers(enrollment, asv, ParseEnrollMode(o.enroll_mode));
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    if (!t.label || *t.label == TrialClass::kSpoof) continue;
    if (!speakers.Contains(t.speaker_id)) {
      throw Error(ErrorCode::kUnresolvedId,
                  o.trials + ": trial " + std::to_string(i) +
                      ": unknown speaker '" + t.speaker_id + "'");
    }
    scores.push_back(speakers.Score(t.speaker_id, asv.At(t.test_utt_id).values));
    labels.push_back(AsvLabel(*t.label));
  }
  CalibratorParams p = FitCalibrator(scores, labels, o.l2);
  std::ostringstream os;
  os << "a " << FormatDouble(p.a, 17) << "\nb " << FormatDouble(p.b, 17) << '\n';
  Emit(o.out, os.str(), out);
}

// ----------------------------------------------------------------- fuse

struct FuseOptions {
  std::string system, asv, cm, enroll, trials, head, calibrator, out = "-";
  std::string enroll_mode = "embedding-mean";
  int asv_dim = 0, cm_dim = 0;
};

void RunFuse(const FuseOptions& o, std::ostream& out) {
  auto system = FindSystem(o.system);
  if (!system) throw UsageError("unknown system '" + o.system + "'");
  if (system->needs_calibrator && o.calibrator.empty()) {
    throw UsageError(o.system + " requires --calibrator");
  }
  if (!system->needs_calibrator && !o.calibrator.empty()) {
    throw UsageError(o.system + " does not take --calibrator");
  }
  FusionStrategy strategy = system->strategy;
  if (system->needs_calibrator) {
    strategy.mapping = Mapping::Calibrated(LoadCalibrator(o.calibrator));
  }
  EmbeddingTable asv = LoadEmbeddings(o.asv, o.asv_dim);
  EmbeddingTable cm = LoadEmbeddings(o.cm, o.cm_dim);
  EnrollmentMap enrollment = LoadEnrollment(o.enroll);
  std::vector<Trial> trials = LoadProtocol(o.trials);
  CmHead head = LoadCmHead(o.head);
  auto records = ScoreAll(trials, enrollment, asv, cm, head,
                          ParseEnrollMode(o.enroll_mode));
  Emit(o.out, FormatScoresTsv(FuseRecords(strategy, std::move(records))), out);
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string asv, cm, enroll, train_trials, dev_trials, head;
  std::string out_head, history = "-";
  std::string mapping = "sigmoid";
  std::string enroll_mode = "embedding-mean";
  std::string mix = "1:1:1";
  TrainConfig config;
};

ClassMix ParseMix(const std::string& text) {
  ClassMix mix;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> mix.target >> c1 >> mix.nontarget >> c2 >> mix.spoof) ||
      c1 != ':' || c2 != ':' || !is.eof()) {
    throw UsageError("--mix expects target:nontarget:spoof, got '" + text + "'");
  }
  return mix;
}

std::string FormatRate(const std::optional<EerResult>& r) {
  return r ? FormatDouble(r->eer, 9) : "NA";
}

void RunTrain(TrainOptions o, std::ostream& out) {
  o.config.mapping =
      o.mapping == "linear" ? Mapping::Linear() : Mapping::Sigmoid();
  o.config.mix = ParseMix(o.mix);
  ValidateTrainConfig(o.config);

  EmbeddingTable asv = LoadEmbeddings(o.asv, 0);
  EmbeddingTable cm = LoadEmbeddings(o.cm, 0);
  EnrollmentMap enrollment = LoadEnrollment(o.enroll);
  std::vector<Trial> train = LoadProtocol(o.train_trials);
  std::vector<Trial> dev_trials = LoadProtocol(o.dev_trials);
  CmHead initial = LoadCmHead(o.head);

  SpeakerModels speakers(enrollment, asv, ParseEnrollMode(o.enroll_mode));
  PairSampler sampler(train, speakers, asv, cm);
  DevSet dev = BuildDevSet(dev_trials, speakers, asv, cm);
  TrainResult result = TrainFinetune(o.config, sampler, dev, initial);

  WriteCmHead(o.out_head, result.best_head);
  std::ostringstream os;
  os << "epoch\tdev_sv_eer\tdev_spf_eer\tdev_sasv_eer\tloss\n";
  for (const auto& e : result.history) {
    os << e.epoch << '\t' << FormatRate(e.dev.sv_eer) << '\t'
       << FormatRate(e.dev.spf_eer) << '\t' << FormatRate(e.dev.sasv_eer)
       << '\t' << FormatDouble(e.loss, 9) << '\n';
  }
  Emit(o.history, os.str(), out);
  if (o.history != "-") {
    out << "best epoch " << result.best_epoch << ", dev SASV-EER "
        << FormatPercent(result.best_dev_sasv_eer) << '\n';
  }
}

// ----------------------------------------------------------------- eval

struct EvalOptions {
  std::vector<std::string> scores;
  std::string column = "s_sasv";
  std::string format = "table";
};

void RunEval(const EvalOptions& o, std::ostream& out) {
  ScoreColumn column = *ParseScoreColumn(o.column);
  std::ostringstream os;
  if (o.format == "table") {
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %22s %22s %22s\n", "system",
                  "SV-EER (thr)", "SPF-EER (thr)", "SASV-EER (thr)");
    os << line;
  }
  for (const auto& path : o.scores) {
    std::vector<ScoreRecord> records = LoadScoresTsv(path);
    bool labeled = !records.empty();
    for (const auto& r : records) labeled = labeled && r.trial.label.has_value();
    if (!labeled) {
      throw Error(ErrorCode::kMalformedLine,
                  path + ": evaluation needs a label on every row");
    }
    MetricSuite suite = Evaluate(records, column);
    const std::string name = fs::path(path).stem().string();
    if (o.format == "kv") {
      auto kv = [&](const char* key, const std::optional<EerResult>& r) {
        os << ' ' << key << "_eer=" << (r ? FormatDouble(r->eer, 9) : "NA")
           << ' ' << key << "_threshold="
           << (r ? FormatDouble(r->threshold, 9) : "NA");
      };
      os << "system=" << name;
      kv("sv", suite.sv_eer);
      kv("spf", suite.spf_eer);
      kv("sasv", suite.sasv_eer);
      os << '\n';
    } else {
      auto cell = [](const std::optional<EerResult>& r) {
        if (!r) return std::string("absent");
        return FormatPercent(r->eer) + " (" + FormatDouble(r->threshold, 4) + ")";
      };
      char line[256];
      std::snprintf(line, sizeof(line), "%-24s %22s %22s %22s\n", name.c_str(),
                    cell(suite.sv_eer).c_str(), cell(suite.spf_eer).c_str(),
                    cell(suite.sasv_eer).c_str());
      os << line;
    }
  }
  out << os.str();
}

// ----------------------------------------------------------------- hist

struct HistOptions {
  std::string scores, out = "-";
  std::string column = "s_sasv";
  int bins = 50;
};

void RunHist(const HistOptions& o, std::ostream& out) {
  std::vector<ScoreRecord> records = LoadScoresTsv(o.scores);
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, o.scores + ": no score rows");
  }
  HistogramData hist =
      BuildHistogram(records, *ParseScoreColumn(o.column), o.bins);
  Emit(o.out, FormatHistogram(hist), out);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Spoofing-aware speaker verification score fusion"};
  app.name(args.empty() ? "sasv" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  const std::vector<std::string> columns = {"s_asv", "s_cm", "s_sasv"};
  std::vector<std::string> system_names;
  for (const auto& s : KnownSystems()) system_names.push_back(s.name);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic embedding world with train/dev/eval trials");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.spec.seed, "World seed")->capture_default_str();
  synth_cmd->add_option("--speakers", synth.spec.n_speakers, "Speakers per split")->capture_default_str();
  synth_cmd->add_option("--utts", synth.spec.utts_per_speaker, "Bona fide utterances per speaker")->capture_default_str();
  synth_cmd->add_option("--spoofs", synth.spec.spoofs_per_speaker, "Spoofed utterances per speaker")->capture_default_str();
  synth_cmd->add_option("--enroll", synth.spec.enroll_per_speaker, "Enrollment utterances per speaker")->capture_default_str();
  synth_cmd->add_option("--asv-dim", synth.spec.asv_dim, "ASV embedding dimension")->capture_default_str();
  synth_cmd->add_option("--cm-dim", synth.spec.cm_dim, "CM embedding dimension")->capture_default_str();
  synth_cmd->add_option("--asv-noise", synth.spec.asv_noise, "Within-speaker ASV noise")->capture_default_str();
  synth_cmd->add_option("--cm-margin", synth.spec.cm_margin, "Bona fide/spoof logit margin")->capture_default_str();
  synth_cmd->add_option("--cm-spread", synth.spec.cm_spread, "CM cluster spread")->capture_default_str();
  synth_cmd->add_option("--spoof-alpha", synth.spec.spoof_asv_alpha, "Spoof similarity to the attacked speaker")->capture_default_str();
  synth_cmd->add_option("--eval-spoof-shift", synth.spec.eval_spoof_shift, "Eval spoof cluster shift toward bona fide")->capture_default_str();
  synth_cmd->add_option("--head-noise", synth.head_noise, "Also write cm_head_init.txt: true head plus N(0, s^2) noise");
  synth_cmd->add_option("--head-noise-seed", synth.head_noise_seed, "Seed of the head perturbation")->capture_default_str();
  synth_cmd->add_flag("--text", synth.text, "Write text embeddings instead of binary");

  CalibrateOptions calib;
  auto* calib_cmd = app.add_subcommand(
      "calibrate", "Fit the logistic ASV calibrator on bona fide trials");
  calib_cmd->add_option("--asv", calib.asv, "ASV embeddings")->required();
  calib_cmd->add_option("--enroll", calib.enroll, "Enrollment map")->required();
  calib_cmd->add_option("--trials", calib.trials, "Labeled (dev) trials")->required();
  calib_cmd->add_option("--l2", calib.l2, "L2 regularization")->capture_default_str()->check(CLI::NonNegativeNumber);
  calib_cmd->add_option("--enroll-mode", calib.enroll_mode, "Enrollment aggregation")->capture_default_str()->check(CLI::IsMember(kEnrollModes));
  calib_cmd->add_option("--asv-dim", calib.asv_dim, "Expected ASV dimension (0: any)")->capture_default_str();
  calib_cmd->add_option("--out", calib.out, "Calibrator file ('-' for stdout)")->capture_default_str();

  FuseOptions fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Score trials and fuse ASV/CM scores");
  fuse_cmd->add_option("--system", fuse.system, "Fusion system")->required()->check(CLI::IsMember(system_names));
  fuse_cmd->add_option("--asv", fuse.asv, "ASV embeddings")->required();
  fuse_cmd->add_option("--cm", fuse.cm, "CM embeddings")->required();
  fuse_cmd->add_option("--enroll", fuse.enroll, "Enrollment map")->required();
  fuse_cmd->add_option("--trials", fuse.trials, "Trial protocol")->required();
  fuse_cmd->add_option("--head", fuse.head, "CM head")->required();
  fuse_cmd->add_option("--calibrator", fuse.calibrator, "ASV calibrator (pr-c-i only)");
  fuse_cmd->add_option("--enroll-mode", fuse.enroll_mode, "Enrollment aggregation")->capture_default_str()->check(CLI::IsMember(kEnrollModes));
  fuse_cmd->add_option("--asv-dim", fuse.asv_dim, "Expected ASV dimension (0: any)")->capture_default_str();
  fuse_cmd->add_option("--cm-dim", fuse.cm_dim, "Expected CM dimension (0: any)")->capture_default_str();
  fuse_cmd->add_option("--out", fuse.out, "Scores TSV ('-' for stdout)")->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Fine-tune the CM head on the fused score");
  train_cmd->add_option("--asv", train.asv, "ASV embeddings")->required();
  train_cmd->add_option("--cm", train.cm, "CM embeddings")->required();
  train_cmd->add_option("--enroll", train.enroll, "Enrollment map")->required();
  train_cmd->add_option("--train-trials", train.train_trials, "Labeled training trials")->required();
  train_cmd->add_option("--dev-trials", train.dev_trials, "Labeled dev trials")->required();
  train_cmd->add_option("--head", train.head, "Initial CM head")->required();
  train_cmd->add_option("--out-head", train.out_head, "Best CM head")->required();
  train_cmd->add_option("--history", train.history, "Per-epoch history TSV ('-' for stdout)")->capture_default_str();
  train_cmd->add_option("--mapping", train.mapping, "ASV mapping")->capture_default_str()->check(CLI::IsMember({"linear", "sigmoid"}));
  train_cmd->add_option("--lr", train.config.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", train.config.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train.config.epochs, "Epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--prior", train.config.target_prior, "Target prior of the weighted BCE")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--seed", train.config.seed, "Pair sampling seed")->capture_default_str();
  train_cmd->add_option("--pairs-per-epoch", train.config.pairs_per_epoch, "Pairs drawn per epoch")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--mix", train.mix, "Class mix target:nontarget:spoof")->capture_default_str();
  train_cmd->add_option("--enroll-mode", train.enroll_mode, "Enrollment aggregation")->capture_default_str()->check(CLI::IsMember(kEnrollModes));

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Print SV-, SPF- and SASV-EER of scored trials");
  eval_cmd->add_option("scores", eval.scores, "Scores TSV files")->required();
  eval_cmd->add_option("--column", eval.column, "Score column")->capture_default_str()->check(CLI::IsMember(columns));
  eval_cmd->add_option("--format", eval.format, "Output format")->capture_default_str()->check(CLI::IsMember({"table", "kv"}));

  HistOptions hist;
  auto* hist_cmd = app.add_subcommand("hist", "Per-class score histograms");
  hist_cmd->add_option("--scores", hist.scores, "Scores TSV")->required();
  hist_cmd->add_option("--column", hist.column, "Score column")->capture_default_str()->check(CLI::IsMember(columns));
  hist_cmd->add_option("--bins", hist.bins, "Number of bins")->capture_default_str()->check(CLI::PositiveNumber);
  hist_cmd->add_option("--out", hist.out, "Histogram file ('-' for stdout)")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string command;
  try {
    if (synth_cmd->parsed()) {
      command = "synth";
      RunSynth(synth, out);
    } else if (calib_cmd->parsed()) {
      command = "calibrate";
      RunCalibrate(calib, out);
    } else if (fuse_cmd->parsed()) {
      command = "fuse";
      RunFuse(fuse, out);
    } else if (train_cmd->parsed()) {
      command = "train";
      RunTrain(train, out);
    } else if (eval_cmd->parsed()) {
      command = "eval";
      RunEval(eval, out);
    } else if (hist_cmd->parsed()) {
      command = "hist";
      RunHist(hist, out);
    }
  } catch (const UsageError& e) {
    err << app.get_name() << ' ' << command << ": usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << app.get_name() << ' ' << command << ": error ("
        << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << app.get_name() << ' ' << command << ": error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace sasv
