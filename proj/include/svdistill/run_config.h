// svdistill/run_config.h

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

#ifndef SVDISTILL_RUN_CONFIG_H_
#define SVDISTILL_RUN_CONFIG_H_

#include <optional>
#include <string>

#include "svdistill/backend.h"
#include "svdistill/training.h"

namespace svdistill {

// Pipeline configuration, loaded from a versioned JSON file with strict
// unknown-key rejection. Missing keys inside a present section take the
// defaults below; a stage refuses to run if its required sections are
// absent. The effective (defaults-filled) config is echoed into each run
// directory and re-runs identically from that echo.

struct CorpusSection {
  int feature_dim = 30;
  double sigma_speaker = 1.0;
  double sigma_channel = 0.8;
  double sigma_frame = 1.2;
  double ar_coeff = 0.85;
  int long_min = 300, long_max = 800;
  int short_min = 80, short_max = 240;
  double shift_scale = 0.9;
  double shift_bias_norm = 1.0;
  int source_speakers = 200, source_utts = 20;
  int source_eval_speakers = 20, source_eval_utts = 8;
  int target_speakers = 30, target_utts = 12;
  int target_eval_speakers = 10, target_eval_utts = 12;
  int n_target_trials = 500, n_nontarget_trials = 2000;
};

struct EncoderSection {
  std::vector<int> block_widths = {32, 32, 32};
  int conv_context = 3;
  Pooling pooling = Pooling::kLde;
  int lde_components = 4;
  int embedding_dim = 24;

  // input_dim and num_classes come from the data at train time.
  EncoderConfig ToEncoderConfig(int input_dim) const;
};

struct TrainSection {
  int epochs = 30;
  int batch_size = 64;
  int crop_frames = 0;  // teacher default; the student section uses 200
  NoamConfig noam;
  ClassLoss class_loss = ClassLoss::kSoftmax;  // used by train-teacher
  int asoftmax_margin = 2;
};

struct BackendSection {
  BackendConfig cfg;
  Scorer scorer = Scorer::kPlda;
};

struct EvaluateSection {
  std::string eval_corpus = "target_eval.corpus";
  std::string trials = "target_eval.trials";
  std::string backend_train_corpus = "target_finetune.corpus";
  int eval_crop_frames = 0;
  int backend_crop_frames = 0;
};

struct RunConfig {
  uint64_t seed = 0;
  int threads = 1;
  std::optional<CorpusSection> corpus;
  std::optional<EncoderSection> encoder;
  std::optional<TrainSection> teacher;
  std::optional<TrainSection> student;
  std::optional<DistillationConfig> distill;
  std::optional<FineTuneConfig> finetune;
  std::optional<BackendSection> backend;
  std::optional<EvaluateSection> evaluate;

  // Throws ConfigError when the named section is missing.
  const CorpusSection &RequireCorpus() const;
  const EncoderSection &RequireEncoder() const;
  const TrainSection &RequireTeacher() const;
  const TrainSection &RequireStudent() const;
  const DistillationConfig &RequireDistill() const;
  const FineTuneConfig &RequireFinetune() const;
  const BackendSection &RequireBackend() const;
  const EvaluateSection &RequireEvaluate() const;
};

RunConfig LoadRunConfig(const std::string &path);
RunConfig ParseRunConfig(const std::string &json_text);
// Defaults-filled echo; parses back to an identical config.
std::string RunConfigToJson(const RunConfig &cfg);

}  // namespace svdistill

#endif  // SVDISTILL_RUN_CONFIG_H_
