// tools/svdistill.cc

// Copyright 2026  The svdistill authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Pipeline driver: gen-data -> train-teacher -> train-student -> finetune
// -> evaluate, each driven by a JSON config and writing its artifacts plus
// an effective-config echo into a run directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "svdistill/backend.h"
#include "svdistill/run_config.h"

namespace fs = std::filesystem;
using namespace svdistill;

namespace {

// Per-stage substreams of the run seed.
enum SeedStream : uint64_t {
  kSeedSourceTrain = 100,
  kSeedSourceEval = 101,
  kSeedTargetFinetune = 102,
  kSeedSourceTrials = 103,
  kSeedTargetTrials = 104,
  kSeedShift = 105,
  kSeedTargetEval = 106,
  kSeedTeacher = 110,
  kSeedStudent = 111,
  kSeedFinetune = 112,
  kSeedEvalCrop = 120,
  kSeedBackendCrop = 121,
};

uint64_t StageSeed(uint64_t run_seed, uint64_t stream) {
  return Rng(run_seed).Fork(stream).seed();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::optional<uint64_t> seed_override;
  std::optional<int> threads_override;
};

RunConfig LoadConfig(const CommonArgs &args) {
  RunConfig cfg = LoadRunConfig(args.config_path);
  if (args.seed_override) cfg.seed = *args.seed_override;
  if (args.threads_override) {
    if (*args.threads_override < 1)
      throw ConfigError("--threads must be >= 1");
    cfg.threads = *args.threads_override;
  }
  return cfg;
}

void EnsureOutDir(const std::string &out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir);
}

void RefuseExisting(const fs::path &path, bool force) {
  if (!force && fs::exists(path))
    throw DataError("output " + path.string() +
                    " exists; pass --force to overwrite");
}

void WriteEcho(const RunConfig &cfg, const std::string &out_dir) {
  std::ofstream os(fs::path(out_dir) / "effective_config.json");
  SVD_CHECK(os.good(), "cannot write effective config");
  os << RunConfigToJson(cfg);
}

void PrintCorpusSummary(const char *name, const Corpus &corpus) {
  if (corpus.utterances.empty()) {
    std::printf("%s: empty\n", name);
    return;
  }
  int min_t = 1 << 30, max_t = 0;
  long total = 0;
  for (const Utterance &u : corpus.utterances) {
    min_t = std::min(min_t, u.features.NumRows());
    max_t = std::max(max_t, u.features.NumRows());
    total += u.features.NumRows();
  }
  std::printf("%s: %d speakers, %zu utterances, frames min/mean/max = "
              "%d/%.1f/%d\n",
              name, corpus.NumSpeakers(), corpus.utterances.size(), min_t,
              static_cast<double>(total) / corpus.utterances.size(), max_t);
  // Six-bin length histogram.
  const int bins = 6;
  std::vector<int> hist(bins, 0);
  const double width =
      std::max(1.0, static_cast<double>(max_t - min_t + 1) / bins);
  for (const Utterance &u : corpus.utterances) {
    int b = static_cast<int>((u.features.NumRows() - min_t) / width);
    hist[std::min(b, bins - 1)]++;
  }
  std::printf("  length histogram:");
  for (int b = 0; b < bins; b++)
    std::printf(" [%d,%d):%d", min_t + static_cast<int>(b * width),
                min_t + static_cast<int>((b + 1) * width), hist[b]);
  std::printf("\n");
}

int CmdGenData(const CommonArgs &args) {
  RunConfig cfg = LoadConfig(args);
  const CorpusSection &c = cfg.RequireCorpus();

  if (fs::exists(args.out_dir) && !fs::is_empty(args.out_dir) && !args.force)
    throw DataError("output directory " + args.out_dir +
                    " exists; pass --force to overwrite");
  EnsureOutDir(args.out_dir);

  auto base_spec = [&]() {
    CorpusSpec spec;
    spec.feature_dim = c.feature_dim;
    spec.long_min = c.long_min;
    spec.long_max = c.long_max;
    spec.short_min = c.short_min;
    spec.short_max = c.short_max;
    spec.sigma_speaker = c.sigma_speaker;
    spec.sigma_channel = c.sigma_channel;
    spec.sigma_frame = c.sigma_frame;
    spec.ar_coeff = c.ar_coeff;
    return spec;
  };

  Rng shift_rng(StageSeed(cfg.seed, kSeedShift));
  DomainShift shift = MakeDomainShift(c.feature_dim, c.shift_scale,
                                      c.shift_bias_norm, &shift_rng);

  CorpusSpec src = base_spec();
  src.n_speakers = c.source_speakers;
  src.utts_per_speaker = c.source_utts;
  src.seed = StageSeed(cfg.seed, kSeedSourceTrain);
  Corpus source_train = GenerateCorpus(src);

  CorpusSpec src_eval = base_spec();
  src_eval.n_speakers = c.source_eval_speakers;
  src_eval.utts_per_speaker = c.source_eval_utts;
  src_eval.seed = StageSeed(cfg.seed, kSeedSourceEval);
  src_eval.first_speaker_id = 100000;
  Corpus source_eval = GenerateCorpus(src_eval);

  CorpusSpec tgt = base_spec();
  tgt.domain = Domain::kTarget;
  tgt.shift = shift;
  tgt.n_speakers = c.target_speakers;
  tgt.utts_per_speaker = c.target_utts;
  tgt.seed = StageSeed(cfg.seed, kSeedTargetFinetune);
  tgt.first_speaker_id = 200000;
  Corpus target_finetune = GenerateCorpus(tgt);

  CorpusSpec tgt_eval = base_spec();
  tgt_eval.domain = Domain::kTarget;
  tgt_eval.shift = shift;  // same target domain as the fine-tune split
  tgt_eval.n_speakers = c.target_eval_speakers;
  tgt_eval.utts_per_speaker = c.target_eval_utts;
  tgt_eval.seed = StageSeed(cfg.seed, kSeedTargetEval);
  tgt_eval.first_speaker_id = 300000;
  Corpus target_eval = GenerateCorpus(tgt_eval);

  Rng src_trial_rng(StageSeed(cfg.seed, kSeedSourceTrials));
  TrialList source_trials = MakeTrials(source_eval, c.n_target_trials,
                                       c.n_nontarget_trials, &src_trial_rng);
  Rng tgt_trial_rng(StageSeed(cfg.seed, kSeedTargetTrials));
  TrialList target_trials = MakeTrials(target_eval, c.n_target_trials,
                                       c.n_nontarget_trials, &tgt_trial_rng);

  const fs::path out(args.out_dir);
  SaveCorpus((out / "source_train.corpus").string(), source_train);
  SaveCorpus((out / "source_eval.corpus").string(), source_eval);
  SaveTrials((out / "source_eval.trials").string(), source_trials);
  SaveCorpus((out / "target_finetune.corpus").string(), target_finetune);
  SaveCorpus((out / "target_eval.corpus").string(), target_eval);
  SaveTrials((out / "target_eval.trials").string(), target_trials);
  WriteEcho(cfg, args.out_dir);

  PrintCorpusSummary("source_train", source_train);
  PrintCorpusSummary("source_eval", source_eval);
  PrintCorpusSummary("target_finetune", target_finetune);
  PrintCorpusSummary("target_eval", target_eval);
  std::printf("trials: %zu source, %zu target\n", source_trials.size(),
              target_trials.size());
  return 0;
}

int CmdTrainTeacher(const CommonArgs &args, const std::string &data_dir) {
  RunConfig cfg = LoadConfig(args);
  const EncoderSection &enc_sec = cfg.RequireEncoder();
  const TrainSection &tsec = cfg.RequireTeacher();

  const fs::path out(args.out_dir);
  EnsureOutDir(args.out_dir);
  RefuseExisting(out / "teacher.model", args.force);

  Corpus corpus =
      LoadCorpus((fs::path(data_dir) / "source_train.corpus").string());
  EncoderConfig enc = enc_sec.ToEncoderConfig(corpus.feature_dim);

  DistillationConfig objective;
  objective.class_loss = tsec.class_loss;
  objective.asoftmax_margin = tsec.asoftmax_margin;

  TrainConfig tc;
  tc.epochs = tsec.epochs;
  tc.batch_size = tsec.batch_size;
  tc.crop_frames = tsec.crop_frames;
  tc.noam = tsec.noam;
  tc.seed = StageSeed(cfg.seed, kSeedTeacher);

  TrainResult res = TrainTeacher(corpus, enc, objective, tc);
  SaveModel((out / "teacher.model").string(), res.cfg, res.params);
  WriteMetricsLog((out / "metrics.tsv").string(), res.log);
  WriteEcho(cfg, args.out_dir);
  std::printf("teacher: %d classes, final loss %.6f\n", res.cfg.num_classes,
              res.log.back().loss_total);
  return 0;
}

int CmdTrainStudent(const CommonArgs &args, const std::string &data_dir,
                    const std::string &teacher_path) {
  RunConfig cfg = LoadConfig(args);
  const TrainSection &ssec = cfg.RequireStudent();
  const DistillationConfig &distill = cfg.RequireDistill();

  const fs::path out(args.out_dir);
  EnsureOutDir(args.out_dir);
  RefuseExisting(out / "student.model", args.force);

  ModelFile teacher = LoadModel(teacher_path);
  Corpus corpus =
      LoadCorpus((fs::path(data_dir) / "source_train.corpus").string());

  TrainConfig tc;
  tc.epochs = ssec.epochs;
  tc.batch_size = ssec.batch_size;
  tc.crop_frames = ssec.crop_frames;
  tc.noam = ssec.noam;
  tc.seed = StageSeed(cfg.seed, kSeedStudent);

  TrainResult res =
      TrainStudent(teacher.cfg, teacher.params, corpus, distill, tc);
  SaveModel((out / "student.model").string(), res.cfg, res.params);
  WriteMetricsLog((out / "metrics.tsv").string(), res.log);
  WriteEcho(cfg, args.out_dir);
  std::printf("student: final loss %.6f\n", res.log.back().loss_total);
  return 0;
}

int CmdFinetune(const CommonArgs &args, const std::string &data_dir,
                const std::string &student_path) {
  RunConfig cfg = LoadConfig(args);
  FineTuneConfig ft = cfg.RequireFinetune();
  ft.seed = StageSeed(cfg.seed, kSeedFinetune);

  const fs::path out(args.out_dir);
  EnsureOutDir(args.out_dir);
  RefuseExisting(out / "finetuned.model", args.force);

  ModelFile student = LoadModel(student_path);
  Corpus target =
      LoadCorpus((fs::path(data_dir) / "target_finetune.corpus").string());

  FineTuneResult res = FineTune(student.cfg, student.params, target, ft);
  SaveModel((out / "finetuned.model").string(), res.cfg, res.params);
  WriteMetricsLog((out / "metrics.tsv").string(), res.log);
  WriteEcho(cfg, args.out_dir);
  std::printf("finetune: regularizer=%s selection=%s final task loss %.6f\n",
              RegKindName(ft.regularizer).c_str(),
              LayerSelectionName(ft.selection).c_str(), res.final_task_loss);
  return 0;
}

int CmdEvaluate(const CommonArgs &args, const std::string &data_dir,
                const std::string &model_path,
                const std::string &backend_override, bool skip_lda) {
  RunConfig cfg = LoadConfig(args);
  // Flag overrides are applied to the config before it is echoed, so a
  // rerun from the echo reproduces the same evaluation.
  if (!cfg.backend) cfg.backend = BackendSection{};
  if (!backend_override.empty())
    cfg.backend->scorer = ParseScorer(backend_override);
  if (skip_lda) cfg.backend->cfg.use_lda = false;
  const BackendSection &bsec = cfg.RequireBackend();
  const EvaluateSection &esec = cfg.RequireEvaluate();

  const fs::path out(args.out_dir);
  EnsureOutDir(args.out_dir);
  RefuseExisting(out / "report.json", args.force);
  RefuseExisting(out / "scores.txt", args.force);

  ModelFile model = LoadModel(model_path);
  const fs::path data(data_dir);
  Corpus backend_train =
      LoadCorpus((data / esec.backend_train_corpus).string());
  Corpus eval_corpus = LoadCorpus((data / esec.eval_corpus).string());
  TrialList trials = LoadTrials((data / esec.trials).string());
  AuditTrials(eval_corpus, trials);

  Matrix train_embs = ExtractEmbeddings(
      model.cfg, model.params, backend_train, esec.backend_crop_frames,
      StageSeed(cfg.seed, kSeedBackendCrop), cfg.threads);
  const std::map<int, int> label_map = backend_train.LabelMap();
  std::vector<int> labels;
  labels.reserve(backend_train.utterances.size());
  for (const Utterance &u : backend_train.utterances)
    labels.push_back(label_map.at(u.speaker_id));
  BackendModel backend = BackendModel::Fit(train_embs, labels, bsec.cfg);

  Matrix eval_embs = ExtractEmbeddings(
      model.cfg, model.params, eval_corpus, esec.eval_crop_frames,
      StageSeed(cfg.seed, kSeedEvalCrop), cfg.threads);
  std::vector<double> scores =
      ScoreTrials(backend, eval_embs, trials, bsec.scorer, cfg.threads);
  SaveScores((out / "scores.txt").string(), trials, scores);

  const EerResult eer = ComputeEer(scores, trials);
  int n_target = 0;
  for (const Trial &t : trials)
    if (t.label == TrialLabel::kTarget) n_target++;

  nlohmann::json report;
  report["eer"] = eer.eer;
  report["threshold"] = eer.threshold;
  report["n_target"] = n_target;
  report["n_nontarget"] = static_cast<int>(trials.size()) - n_target;
  report["n_trials"] = trials.size();
  report["scorer"] = ScorerName(bsec.scorer);
  report["lda"] = bsec.cfg.use_lda;
  {
    std::ofstream os(out / "report.json");
    SVD_CHECK(os.good(), "cannot write report");
    os << report.dump(2) << "\n";
  }
  WriteEcho(cfg, args.out_dir);
  std::printf("eer %.6f at threshold %.6f over %zu trials (%s)\n", eer.eer,
              eer.threshold, trials.size(), ScorerName(bsec.scorer).c_str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"teacher-student distillation and start-point fine-tuning "
               "for short-utterance speaker verification"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string data_dir, teacher_path, student_path, model_path;
  std::string backend_override;
  bool skip_lda = false;
  uint64_t seed_value = 0;
  int threads_value = 0;

  auto add_common = [&](CLI::App *sub, bool needs_data) {
    sub->add_option("--config", common.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", common.out_dir, "output directory")->required();
    sub->add_flag("--force", common.force, "overwrite existing outputs");
    sub->add_option("--seed", seed_value, "override the config seed")
        ->each([&](const std::string &) {
          common.seed_override = seed_value;
        });
    sub->add_option("--threads", threads_value, "worker thread cap")
        ->each([&](const std::string &) {
          common.threads_override = threads_value;
        });
    if (needs_data)
      sub->add_option("--data", data_dir, "directory with corpus files")
          ->required();
  };

  CLI::App *gen = app.add_subcommand("gen-data",
                                     "generate synthetic corpora");
  add_common(gen, false);

  CLI::App *teach =
      app.add_subcommand("train-teacher", "train the long-utterance teacher "
                         "(or a short-crop baseline via crop_frames)");
  add_common(teach, true);

  CLI::App *stud = app.add_subcommand(
      "train-student", "teacher-student training on long/short pairs");
  add_common(stud, true);
  stud->add_option("--teacher", teacher_path, "teacher model file")
      ->required();

  CLI::App *ft = app.add_subcommand(
      "finetune", "start-point fine-tuning on the target corpus");
  add_common(ft, true);
  ft->add_option("--student", student_path, "student model file")->required();

  CLI::App *eval =
      app.add_subcommand("evaluate", "score trials and report EER");
  add_common(eval, true);
  eval->add_option("--model", model_path, "model file to evaluate")
      ->required();
  eval->add_option("--backend", backend_override,
                   "scorer: cosine or plda (overrides config)");
  eval->add_flag("--skip-lda", skip_lda, "disable the LDA projection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return CmdGenData(common);
    if (teach->parsed()) return CmdTrainTeacher(common, data_dir);
    if (stud->parsed()) return CmdTrainStudent(common, data_dir, teacher_path);
    if (ft->parsed()) return CmdFinetune(common, data_dir, student_path);
    if (eval->parsed())
      return CmdEvaluate(common, data_dir, model_path, backend_override,
                         skip_lda);
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
