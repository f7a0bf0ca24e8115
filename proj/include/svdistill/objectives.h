// svdistill/objectives.h

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

#ifndef SVDISTILL_OBJECTIVES_H_
#define SVDISTILL_OBJECTIVES_H_

#include <string>
#include <vector>

#include "svdistill/network.h"

namespace svdistill {

enum class ClassLoss { kSoftmax, kAsoftmax };

ClassLoss ParseClassLoss(const std::string &name);
std::string ClassLossName(ClassLoss cl);

// Which loss terms the student objective combines, and how. With the
// A-softmax head, the margin applies only to the true-class logit of the
// classification term; posterior (distillation) logits are the plain
// cosine logits of normalized class weights.
struct DistillationConfig {
  ClassLoss class_loss = ClassLoss::kSoftmax;
  int asoftmax_margin = 2;
  bool use_kld = false;
  bool use_emd = false;
  double weight_class = 1.0;
  double weight_kld = 1.0;
  double weight_emd = 1.0;
  double temperature = 1.0;

  void Validate() const;
};

struct LossReport {
  double total = 0.0;
  // Unweighted per-term values keyed "class" / "kld" / "emd".
  std::vector<std::pair<std::string, double>> terms;

  double Term(const std::string &name) const;
  bool HasTerm(const std::string &name) const;
};

struct SoftmaxCeResult {
  double value;
  std::vector<double> d_logits;  // softmax(logits) - onehot(label)
};
SoftmaxCeResult SoftmaxCrossEntropy(std::span<const double> logits,
                                    int label);

// Angular-margin softmax: class weight rows are normalized to unit norm,
// non-target logits are |e| cos(theta_j), and the target logit is
// |e| psi(theta) with psi(theta) = (-1)^k cos(m theta) - 2k on
// theta in [k pi/m, (k+1) pi/m]. Cross-entropy over those logits, with
// gradients w.r.t. the unnormalized weights and the embedding.
struct AsoftmaxCeResult {
  double value;
  Matrix d_weights;
  std::vector<double> d_embedding;
};
AsoftmaxCeResult AsoftmaxCrossEntropy(const Matrix &weights,
                                      std::span<const double> embedding,
                                      int label, int margin);

// Teacher-posterior cross-entropy -sum_n P_T(n) log P_S(n) with
// P = softmax(logits / temperature); the teacher side is a constant, the
// student gradient is (P_S - P_T) / temperature.
struct KldResult {
  double value;
  std::vector<double> d_student_logits;
};
KldResult KldDistill(std::span<const double> teacher_logits,
                     std::span<const double> student_logits,
                     double temperature);

// -cos(teacher_emb, student_emb); gradient w.r.t. the student side only.
struct EmdResult {
  double value;
  std::vector<double> d_student_embedding;
};
EmdResult EmdCosine(std::span<const double> teacher_emb,
                    std::span<const double> student_emb);

// Sum of EmdCosine values over aligned pairs (rows).
double EmdCosineBatch(const Matrix &teacher_embs, const Matrix &student_embs);

// Margin-free logits of a normalized-weight classifier: z_j = (w_j/|w_j|).e.
// Used for posteriors under the A-softmax head.
std::vector<double> CosineLogits(const Matrix &weights,
                                 std::span<const double> embedding);
void CosineLogitsBackward(const Matrix &weights,
                          std::span<const double> embedding,
                          std::span<const double> d_logits, Matrix *d_weights,
                          std::vector<double> *d_embedding);

// Classifier logits under the configured head (plain fc2 logits for
// softmax; cosine logits for A-softmax).
std::vector<double> HeadLogits(ClassLoss head, const ForwardTrace &trace,
                               const Matrix &classifier_weight);

struct TeacherOutputs {
  std::vector<double> logits;     // head-consistent posteriors' logits
  std::vector<double> embedding;  // epsilon_T
};

TeacherOutputs MakeTeacherOutputs(ClassLoss head, const ForwardTrace &trace,
                                  const Matrix &classifier_weight);

// Weighted combination of the active terms for one batch item. d_logits
// feeds the plain-logit path of Backward and d_embedding the embedding
// path; d_classifier_weight is non-empty only with the A-softmax head,
// whose class/posterior terms touch the fc2 weight directly.
struct CompositeResult {
  LossReport report;
  std::vector<double> d_logits;
  std::vector<double> d_embedding;
  Matrix d_classifier_weight;
};
CompositeResult CompositeLoss(const DistillationConfig &cfg,
                              const TeacherOutputs *teacher,
                              const ForwardTrace &student,
                              const Matrix &classifier_weight, int label);

}  // namespace svdistill

#endif  // SVDISTILL_OBJECTIVES_H_
