// svdistill/training.cc

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

#include "svdistill/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace svdistill {

namespace {

constexpr uint64_t kInitStream = 1;
constexpr uint64_t kShuffleStream = 2;
constexpr uint64_t kCropStream = 3;

double NowMs() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void ShuffleIndices(std::vector<int> *v, Rng *rng) {
  for (size_t i = v->size(); i > 1; i--) {
    const size_t j = static_cast<size_t>(rng->NextInt(static_cast<int64_t>(i)));
    std::swap((*v)[i - 1], (*v)[j]);
  }
}

std::vector<int> CorpusLabels(const Corpus &corpus) {
  const std::map<int, int> label_map = corpus.LabelMap();
  std::vector<int> labels(corpus.utterances.size());
  for (size_t i = 0; i < corpus.utterances.size(); i++)
    labels[i] = label_map.at(corpus.utterances[i].speaker_id);
  return labels;
}

// Whole utterance, or a fresh random crop when crop_frames > 0 and the
// utterance is long enough; shorter utterances are used whole.
FeatureSequence PickInput(const Utterance &utt, int crop_frames, Rng *rng) {
  if (crop_frames > 0 && utt.features.NumRows() > crop_frames)
    return Crop(utt, crop_frames, rng);
  return utt.features;
}

struct TermSums {
  double total = 0, cls = 0, kld = 0, emd = 0;
  int items = 0;

  void Add(const LossReport &r) {
    total += r.total;
    if (r.HasTerm("class")) cls += r.Term("class");
    if (r.HasTerm("kld")) kld += r.Term("kld");
    if (r.HasTerm("emd")) emd += r.Term("emd");
    items++;
  }
};

// Forward/loss/backward for one batch item; gradient contributions
// accumulate unscaled into params->grads.
LossReport AccumulateItem(const EncoderConfig &enc,
                          const DistillationConfig &obj,
                          const TeacherOutputs *teacher,
                          const FeatureSequence &input, int label,
                          const GroupMask &mask, ParameterSet *params) {
  const ForwardTrace trace = Forward(*params, enc, input);
  ParamGroup &fc2 = params->Group("fc2");
  CompositeResult comp =
      CompositeLoss(obj, teacher, trace, fc2.values[0], label);
  Backward(enc, *params, trace, comp.d_logits, comp.d_embedding, mask,
           params);
  if (!comp.d_classifier_weight.Empty() &&
      mask[params->FindGroup("fc2")])
    fc2.grads[0].AddScaled(comp.d_classifier_weight, 1.0);
  return std::move(comp.report);
}

}  // namespace

void TrainConfig::Validate() const {
  SVD_CHECK(batch_size >= 1, "batch_size ", batch_size);
  SVD_CHECK(epochs >= 1, "epochs ", epochs);
  SVD_CHECK(crop_frames >= 0, "crop_frames ", crop_frames);
  SVD_CHECK(noam.warmup >= 1 && noam.factor > 0 && noam.model_size > 0,
            "invalid Noam schedule");
}

void FineTuneConfig::Validate() const {
  SVD_CHECK(alpha >= 0 && beta >= 0, "negative penalty weight");
  SVD_CHECK(lr_replaced > 0 && lr_rest > 0, "learning rates must be > 0");
  SVD_CHECK(lr_decay_epochs >= 1, "lr_decay_epochs ", lr_decay_epochs);
  SVD_CHECK(epochs >= 1 && batch_size >= 1, "epochs/batch_size");
  SVD_CHECK(asoftmax_margin >= 1, "A-softmax margin ", asoftmax_margin);
}

void WriteMetricsLog(const std::string &path, const MetricsLog &log) {
  std::ofstream os(path);
  SVD_CHECK(os.good(), "cannot open ", path, " for writing");
  os << "epoch\tloss_total\tloss_class\tloss_kld\tloss_emd\tpenalty\tlr\t"
        "wall_ms\n";
  char buf[256];
  for (const EpochMetrics &m : log) {
    std::snprintf(buf, sizeof(buf),
                  "%d\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.3f\n",
                  m.epoch, m.loss_total, m.loss_class, m.loss_kld, m.loss_emd,
                  m.penalty, m.lr, m.wall_ms);
    os << buf;
  }
  SVD_CHECK(os.good(), "write failed for ", path);
}

TrainResult TrainTeacher(const Corpus &corpus, EncoderConfig enc,
                         const DistillationConfig &objective,
                         const TrainConfig &cfg) {
  cfg.Validate();
  SVD_CHECK(!objective.use_kld && !objective.use_emd,
            "classification-only training cannot use distillation terms");
  SVD_CHECK(corpus.NumSpeakers() >= 2, "degenerate corpus: ",
            corpus.NumSpeakers(), " speakers");
  SVD_CHECK(!corpus.utterances.empty(), "empty corpus");
  enc.num_classes = corpus.NumSpeakers();
  enc.Validate();

  Rng base(cfg.seed);
  Rng init_rng = base.Fork(kInitStream);
  Rng shuffle_rng = base.Fork(kShuffleStream);
  Rng crop_rng = base.Fork(kCropStream);

  TrainResult res;
  res.cfg = enc;
  res.params = InitParameters(enc, &init_rng);
  const GroupMask mask = FullMask(res.params);
  AdamState adam(res.params);
  const std::vector<int> labels = CorpusLabels(corpus);

  std::vector<int> order(corpus.utterances.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    const double start_ms = NowMs();
    ShuffleIndices(&order, &shuffle_rng);
    TermSums sums;
    double lr = 0.0;
    for (size_t off = 0; off < order.size(); off += cfg.batch_size) {
      const size_t end = std::min(off + cfg.batch_size, order.size());
      res.params.ZeroGrads();
      for (size_t i = off; i < end; i++) {
        const int idx = order[i];
        const FeatureSequence input =
            PickInput(corpus.utterances[idx], cfg.crop_frames, &crop_rng);
        sums.Add(AccumulateItem(enc, objective, nullptr, input, labels[idx],
                                mask, &res.params));
      }
      res.params.ScaleGrads(1.0 / static_cast<double>(end - off));
      lr = NoamLr(adam.step_count() + 1, cfg.noam.model_size, cfg.noam.warmup,
                  cfg.noam.factor);
      adam.Step(&res.params, mask, lr);
    }
    res.log.push_back({epoch, sums.total / sums.items, sums.cls / sums.items,
                       0.0, 0.0, 0.0, lr, NowMs() - start_ms});
  }
  return res;
}

TrainResult TrainStudent(const EncoderConfig &teacher_cfg,
                         const ParameterSet &teacher, const Corpus &corpus,
                         const DistillationConfig &distill,
                         const TrainConfig &cfg) {
  cfg.Validate();
  distill.Validate();
  SVD_CHECK(corpus.NumSpeakers() >= 2, "degenerate corpus");
  SVD_CHECK(corpus.NumSpeakers() == teacher_cfg.num_classes,
            "teacher trained for ", teacher_cfg.num_classes,
            " classes but corpus has ", corpus.NumSpeakers(), " speakers");
  const EncoderConfig enc = teacher_cfg;

  Rng base(cfg.seed);
  Rng shuffle_rng = base.Fork(kShuffleStream);
  Rng crop_rng = base.Fork(kCropStream);

  TrainResult res;
  res.cfg = enc;
  res.params = teacher;  // student initialized identical to the teacher
  const GroupMask mask = FullMask(res.params);
  AdamState adam(res.params);
  const std::vector<int> labels = CorpusLabels(corpus);

  // The frozen teacher sees the full stored utterance on every visit, so
  // its outputs are fixed; compute them once.
  const bool needs_teacher = distill.use_kld || distill.use_emd;
  std::vector<TeacherOutputs> teacher_out;
  if (needs_teacher) {
    teacher_out.reserve(corpus.utterances.size());
    const Matrix &fc2_w = teacher.Group("fc2").values[0];
    for (const Utterance &u : corpus.utterances)
      teacher_out.push_back(MakeTeacherOutputs(
          distill.class_loss, Forward(teacher, enc, u.features), fc2_w));
  }

  std::vector<int> order(corpus.utterances.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    const double start_ms = NowMs();
    ShuffleIndices(&order, &shuffle_rng);
    TermSums sums;
    double lr = 0.0;
    for (size_t off = 0; off < order.size(); off += cfg.batch_size) {
      const size_t end = std::min(off + cfg.batch_size, order.size());
      res.params.ZeroGrads();
      for (size_t i = off; i < end; i++) {
        const int idx = order[i];
        const FeatureSequence input =
            PickInput(corpus.utterances[idx], cfg.crop_frames, &crop_rng);
        sums.Add(AccumulateItem(enc, distill,
                                needs_teacher ? &teacher_out[idx] : nullptr,
                                input, labels[idx], mask, &res.params));
      }
      res.params.ScaleGrads(1.0 / static_cast<double>(end - off));
      lr = NoamLr(adam.step_count() + 1, cfg.noam.model_size, cfg.noam.warmup,
                  cfg.noam.factor);
      adam.Step(&res.params, mask, lr);
    }
    res.log.push_back({epoch, sums.total / sums.items, sums.cls / sums.items,
                       distill.use_kld ? sums.kld / sums.items : 0.0,
                       distill.use_emd ? sums.emd / sums.items : 0.0, 0.0, lr,
                       NowMs() - start_ms});
  }
  return res;
}

FineTuneResult FineTune(const EncoderConfig &student_cfg,
                        const ParameterSet &student, const Corpus &target,
                        const FineTuneConfig &cfg) {
  cfg.Validate();
  SVD_CHECK(target.NumSpeakers() >= 2, "degenerate target corpus");

  Rng base(cfg.seed);
  Rng replace_rng = base.Fork(kInitStream);
  Rng shuffle_rng = base.Fork(kShuffleStream);

  FineTuneResult res;
  res.cfg = student_cfg;
  res.params = ReplaceClassifier(student, &res.cfg, target.NumSpeakers(),
                                 &replace_rng);
  // Start-point reference: snapshot before any update; the replaced
  // classifier is the modified architecture W_m, everything else W_s.
  res.reference.snapshot = res.params.Snapshot();
  for (int i = 0; i < res.params.NumGroups(); i++) {
    const std::string &name = res.params.Group(i).name;
    if (name == "fc2")
      res.reference.modified_groups.push_back(name);
    else
      res.reference.shared_groups.push_back(name);
  }
  res.reference.Validate(res.params);

  const GroupMask mask = SelectGroups(res.params, cfg.selection);
  AdamState adam(res.params);
  const std::vector<int> labels = CorpusLabels(target);

  DistillationConfig obj;
  obj.class_loss = cfg.class_loss;
  obj.asoftmax_margin = cfg.asoftmax_margin;

  std::vector<int> order(target.utterances.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    const double start_ms = NowMs();
    ShuffleIndices(&order, &shuffle_rng);
    const double decay =
        std::pow(10.0, -static_cast<double>(epoch / cfg.lr_decay_epochs));
    const double lr_fc2 = cfg.lr_replaced * decay;
    const double lr_rest = cfg.lr_rest * decay;
    TermSums sums;
    double penalty_sum = 0.0;
    int steps = 0;
    for (size_t off = 0; off < order.size(); off += cfg.batch_size) {
      const size_t end = std::min(off + cfg.batch_size, order.size());
      res.params.ZeroGrads();
      for (size_t i = off; i < end; i++) {
        const int idx = order[i];
        sums.Add(AccumulateItem(res.cfg, obj, nullptr,
                                target.utterances[idx].features, labels[idx],
                                mask, &res.params));
      }
      res.params.ScaleGrads(1.0 / static_cast<double>(end - off));
      penalty_sum +=
          ApplyPenalty(cfg.regularizer, &res.params, mask, &res.reference,
                       cfg.alpha, cfg.beta, cfg.include_biases);
      steps++;
      adam.Step(&res.params, mask, [&](const std::string &name) {
        return name == "fc2" ? lr_fc2 : lr_rest;
      });
    }
    res.log.push_back({epoch, sums.total / sums.items, sums.cls / sums.items,
                       0.0, 0.0, penalty_sum / steps, lr_fc2,
                       NowMs() - start_ms});
  }
  res.final_task_loss = MeanClassLoss(res.cfg, res.params, target,
                                      cfg.class_loss, cfg.asoftmax_margin);
  return res;
}

double ClosedSetAccuracy(const EncoderConfig &cfg, const ParameterSet &params,
                         const Corpus &corpus, ClassLoss head) {
  SVD_CHECK(!corpus.utterances.empty(), "empty corpus");
  const std::vector<int> labels = CorpusLabels(corpus);
  const Matrix &fc2_w = params.Group("fc2").values[0];
  int correct = 0;
  for (size_t i = 0; i < corpus.utterances.size(); i++) {
    const ForwardTrace trace =
        Forward(params, cfg, corpus.utterances[i].features);
    const std::vector<double> logits = HeadLogits(head, trace, fc2_w);
    const int pred = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (pred == labels[i]) correct++;
  }
  return static_cast<double>(correct) / corpus.utterances.size();
}

double MeanClassLoss(const EncoderConfig &cfg, const ParameterSet &params,
                     const Corpus &corpus, ClassLoss head, int margin) {
  SVD_CHECK(!corpus.utterances.empty(), "empty corpus");
  const std::vector<int> labels = CorpusLabels(corpus);
  const Matrix &fc2_w = params.Group("fc2").values[0];
  double total = 0.0;
  for (size_t i = 0; i < corpus.utterances.size(); i++) {
    const ForwardTrace trace =
        Forward(params, cfg, corpus.utterances[i].features);
    if (head == ClassLoss::kSoftmax)
      total += SoftmaxCrossEntropy(trace.logits, labels[i]).value;
    else
      total +=
          AsoftmaxCrossEntropy(fc2_w, trace.embedding, labels[i], margin)
              .value;
  }
  return total / corpus.utterances.size();
}

double SharedDistance(const ParameterSet &params, const SpReference &ref) {
  double sq = 0.0;
  for (const std::string &name : ref.shared_groups) {
    const ParamGroup &live = params.Group(name);
    const ParamGroup &snap = ref.snapshot.Group(name);
    for (size_t j = 0; j < live.values.size(); j++) {
      const std::vector<double> &w = live.values[j].Data();
      const std::vector<double> &w0 = snap.values[j].Data();
      for (size_t i = 0; i < w.size(); i++) {
        const double d = w[i] - w0[i];
        sq += d * d;
      }
    }
  }
  return std::sqrt(sq);
}

}  // namespace svdistill
