// svdistill/training.h

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

#ifndef SVDISTILL_TRAINING_H_
#define SVDISTILL_TRAINING_H_

#include <string>
#include <vector>

#include "svdistill/data.h"
#include "svdistill/objectives.h"
#include "svdistill/optimizer.h"
#include "svdistill/regularizers.h"

namespace svdistill {

struct NoamConfig {
  double model_size = 32.0;
  int64_t warmup = 400;
  double factor = 1.0;
};

struct TrainConfig {
  int batch_size = 64;
  int epochs = 30;
  NoamConfig noam;
  // 0 trains on whole utterances (teacher); the student uses 200-frame
  // random crops. Utterances shorter than the crop are used whole.
  int crop_frames = 0;
  uint64_t seed = 0;

  void Validate() const;
};

struct FineTuneConfig {
  RegKind regularizer = RegKind::kNone;
  double alpha = 0.1;
  double beta = 0.01;
  LayerSelection selection = LayerSelection::kLast2Fc;
  double lr_replaced = 1e-3;
  double lr_rest = 1e-5;
  int lr_decay_epochs = 15;  // divide both rates by 10 every 15 epochs
  int epochs = 45;
  int batch_size = 32;
  bool include_biases = true;
  ClassLoss class_loss = ClassLoss::kSoftmax;
  int asoftmax_margin = 2;
  uint64_t seed = 0;

  void Validate() const;
};

struct EpochMetrics {
  int epoch;
  double loss_total;
  double loss_class, loss_kld, loss_emd;  // mean per-term values (0 if off)
  double penalty;
  double lr;
  double wall_ms;
};

using MetricsLog = std::vector<EpochMetrics>;

// One header line, then one tab-separated row per epoch.
void WriteMetricsLog(const std::string &path, const MetricsLog &log);

struct TrainResult {
  EncoderConfig cfg;  // num_classes filled from the corpus
  ParameterSet params;
  MetricsLog log;
};

// Classification-only training from a fresh init on the corpus (full
// utterances, or random crops when cfg.crop_frames > 0), Adam with the
// Noam schedule. Labels are the corpus speaker ids mapped to contiguous
// classes. `objective` must have no distillation terms active.
TrainResult TrainTeacher(const Corpus &corpus, EncoderConfig enc,
                         const DistillationConfig &objective,
                         const TrainConfig &cfg);

// Teacher-student training: the student starts as a copy of the teacher;
// each batch item pairs the full utterance (frozen teacher, forward only)
// with a fresh random crop of the same utterance (student), optimized on
// the composite objective.
TrainResult TrainStudent(const EncoderConfig &teacher_cfg,
                         const ParameterSet &teacher, const Corpus &corpus,
                         const DistillationConfig &distill,
                         const TrainConfig &cfg);

struct FineTuneResult {
  EncoderConfig cfg;  // num_classes = target speaker count
  ParameterSet params;
  SpReference reference;  // snapshot taken after head replacement,
                          // before any update
  MetricsLog log;
  double final_task_loss;  // mean class loss over the corpus, post-training
};

// Start-point fine-tuning on the target corpus: classifier replaced for the
// target classes, SP reference snapshotted before any update, only the
// selected groups updated, Adam with lr_replaced on fc2 and lr_rest
// elsewhere, both step-decayed.
FineTuneResult FineTune(const EncoderConfig &student_cfg,
                        const ParameterSet &student, const Corpus &target,
                        const FineTuneConfig &cfg);

// Fraction of utterances whose head logits argmax to the true class.
double ClosedSetAccuracy(const EncoderConfig &cfg, const ParameterSet &params,
                         const Corpus &corpus, ClassLoss head);

// Mean class loss over the corpus at fixed parameters (no crops).
double MeanClassLoss(const EncoderConfig &cfg, const ParameterSet &params,
                     const Corpus &corpus, ClassLoss head, int margin);

// |W_s - W_s0|_2 over the shared groups of ref.
double SharedDistance(const ParameterSet &params, const SpReference &ref);

}  // namespace svdistill

#endif  // SVDISTILL_TRAINING_H_
