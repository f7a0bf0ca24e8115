// svdistill/objectives.cc

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

#include "svdistill/objectives.h"

#include <algorithm>
#include <cmath>

namespace svdistill {

ClassLoss ParseClassLoss(const std::string &name) {
  if (name == "softmax") return ClassLoss::kSoftmax;
  if (name == "asoftmax") return ClassLoss::kAsoftmax;
  throw ConfigError("unknown class loss: " + name);
}

std::string ClassLossName(ClassLoss cl) {
  return cl == ClassLoss::kSoftmax ? "softmax" : "asoftmax";
}

void DistillationConfig::Validate() const {
  SVD_CHECK(asoftmax_margin >= 1, "A-softmax margin ", asoftmax_margin);
  SVD_CHECK(temperature > 0.0, "temperature ", temperature);
  SVD_CHECK(weight_class >= 0 && weight_kld >= 0 && weight_emd >= 0,
            "negative loss weight");
  SVD_CHECK(weight_class > 0 || use_kld || use_emd,
            "no active loss term in distillation config");
}

double LossReport::Term(const std::string &name) const {
  for (const auto &[k, v] : terms)
    if (k == name) return v;
  throw DataError("no loss term named " + name);
}

bool LossReport::HasTerm(const std::string &name) const {
  for (const auto &[k, v] : terms)
    if (k == name) return true;
  return false;
}

SoftmaxCeResult SoftmaxCrossEntropy(std::span<const double> logits,
                                    int label) {
  SVD_CHECK(label >= 0 && label < static_cast<int>(logits.size()),
            "label ", label, " out of range for ", logits.size(), " classes");
  std::vector<double> logp = LogSoftmax(logits);
  SoftmaxCeResult res;
  res.value = -logp[label];
  res.d_logits.resize(logits.size());
  for (size_t i = 0; i < logits.size(); i++)
    res.d_logits[i] = std::exp(logp[i]);
  res.d_logits[label] -= 1.0;
  return res;
}

namespace {

// Chebyshev polynomials: T_m(u) = cos(m theta), U_{m-1}(u) = sin(m theta) /
// sin(theta) for u = cos(theta); psi'(u) = (-1)^k m U_{m-1}(u).
double ChebyshevT(int m, double u) {
  double tp = 1.0, t = u;
  if (m == 0) return tp;
  for (int i = 1; i < m; i++) {
    const double next = 2.0 * u * t - tp;
    tp = t;
    t = next;
  }
  return t;
}

double ChebyshevU(int m, double u) {
  double up = 1.0, v = 2.0 * u;
  if (m == 0) return up;
  for (int i = 1; i < m; i++) {
    const double next = 2.0 * u * v - up;
    up = v;
    v = next;
  }
  return v;
}

// psi(u) and d psi / du at u = cos(theta).
void MarginPsi(int m, double u, double *psi, double *dpsi) {
  const double theta = std::acos(std::clamp(u, -1.0, 1.0));
  int k = static_cast<int>(std::floor(m * theta / M_PI));
  k = std::clamp(k, 0, m - 1);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  *psi = sign * ChebyshevT(m, u) - 2.0 * k;
  *dpsi = sign * m * ChebyshevU(m - 1, u);
}

}  // namespace

AsoftmaxCeResult AsoftmaxCrossEntropy(const Matrix &weights,
                                      std::span<const double> embedding,
                                      int label, int margin) {
  SVD_CHECK(margin >= 1, "A-softmax margin ", margin);
  const int n = weights.NumRows(), e_dim = weights.NumCols();
  SVD_CHECK(static_cast<int>(embedding.size()) == e_dim, "embedding dim ",
            embedding.size(), " vs ", e_dim);
  SVD_CHECK(label >= 0 && label < n, "label ", label, " out of range");
  const double ne = Norm2(embedding);
  SVD_CHECK(ne > 0.0, "zero embedding in A-softmax");

  std::vector<double> wnorm(n), cosines(n), logits(n);
  for (int j = 0; j < n; j++) {
    wnorm[j] = Norm2(weights.Row(j));
    SVD_CHECK(wnorm[j] > 0.0, "zero class weight row ", j);
    cosines[j] = std::clamp(Dot(weights.Row(j), embedding) / (wnorm[j] * ne),
                            -1.0, 1.0);
    logits[j] = ne * cosines[j];
  }
  double psi, dpsi;
  MarginPsi(margin, cosines[label], &psi, &dpsi);
  logits[label] = ne * psi;

  SoftmaxCeResult ce = SoftmaxCrossEntropy(logits, label);

  AsoftmaxCeResult res;
  res.value = ce.value;
  res.d_weights = Matrix(n, e_dim);
  res.d_embedding.assign(e_dim, 0.0);
  for (int j = 0; j < n; j++) {
    const double dz = ce.d_logits[j];
    const double *w = weights.RowData(j);
    double *dw = res.d_weights.RowData(j);
    const double u = cosines[j];
    if (j == label) {
      // z_y = |e| psi(u):  dz/de = psi e^ + psi' (w^ - u e^),
      //                    dz/dw = |e| psi' (e^ - u w^) / |w|
      for (int i = 0; i < e_dim; i++) {
        const double ehat = embedding[i] / ne;
        const double what = w[i] / wnorm[j];
        res.d_embedding[i] += dz * (psi * ehat + dpsi * (what - u * ehat));
        dw[i] += dz * ne * dpsi * (ehat - u * what) / wnorm[j];
      }
    } else {
      // z_j = e . w^:  dz/de = w^,  dz/dw = (e - z_j w^) / |w|
      for (int i = 0; i < e_dim; i++) {
        const double what = w[i] / wnorm[j];
        res.d_embedding[i] += dz * what;
        dw[i] += dz * (embedding[i] - logits[j] * what) / wnorm[j];
      }
    }
  }
  return res;
}

KldResult KldDistill(std::span<const double> teacher_logits,
                     std::span<const double> student_logits,
                     double temperature) {
  SVD_CHECK(teacher_logits.size() == student_logits.size(),
            "class count mismatch ", teacher_logits.size(), " vs ",
            student_logits.size());
  SVD_CHECK(temperature > 0.0, "temperature ", temperature);
  const size_t n = teacher_logits.size();
  std::vector<double> t_scaled(n), s_scaled(n);
  for (size_t i = 0; i < n; i++) {
    t_scaled[i] = teacher_logits[i] / temperature;
    s_scaled[i] = student_logits[i] / temperature;
  }
  std::vector<double> p_t = Softmax(t_scaled);
  std::vector<double> logp_s = LogSoftmax(s_scaled);

  KldResult res;
  res.value = 0.0;
  for (size_t i = 0; i < n; i++) res.value -= p_t[i] * logp_s[i];
  res.d_student_logits.resize(n);
  for (size_t i = 0; i < n; i++)
    res.d_student_logits[i] = (std::exp(logp_s[i]) - p_t[i]) / temperature;
  return res;
}

EmdResult EmdCosine(std::span<const double> teacher_emb,
                    std::span<const double> student_emb) {
  SVD_CHECK(teacher_emb.size() == student_emb.size(),
            "embedding dim mismatch");
  const double tt = Dot(teacher_emb, teacher_emb);
  const double ss = Dot(student_emb, student_emb);
  SVD_CHECK(tt > 0.0 && ss > 0.0, "zero-norm embedding in cosine loss");
  // Identical pairs give exactly -1 (IEEE sqrt(x * x) = x).
  const double denom = std::sqrt(tt * ss);
  const double c = Dot(teacher_emb, student_emb) / denom;

  EmdResult res;
  res.value = -c;
  res.d_student_embedding.resize(student_emb.size());
  for (size_t i = 0; i < student_emb.size(); i++)
    res.d_student_embedding[i] =
        -(teacher_emb[i] / denom - c * student_emb[i] / ss);
  return res;
}

double EmdCosineBatch(const Matrix &teacher_embs, const Matrix &student_embs) {
  SVD_CHECK(teacher_embs.SameDim(student_embs), "batch shape mismatch");
  double total = 0.0;
  for (int i = 0; i < teacher_embs.NumRows(); i++)
    total += EmdCosine(teacher_embs.Row(i), student_embs.Row(i)).value;
  return total;
}

std::vector<double> CosineLogits(const Matrix &weights,
                                 std::span<const double> embedding) {
  SVD_CHECK(static_cast<int>(embedding.size()) == weights.NumCols(),
            "embedding dim ", embedding.size(), " vs ", weights.NumCols());
  std::vector<double> z(weights.NumRows());
  for (int j = 0; j < weights.NumRows(); j++) {
    const double nw = Norm2(weights.Row(j));
    SVD_CHECK(nw > 0.0, "zero class weight row ", j);
    z[j] = Dot(weights.Row(j), embedding) / nw;
  }
  return z;
}

void CosineLogitsBackward(const Matrix &weights,
                          std::span<const double> embedding,
                          std::span<const double> d_logits, Matrix *d_weights,
                          std::vector<double> *d_embedding) {
  const int n = weights.NumRows(), e_dim = weights.NumCols();
  SVD_CHECK(static_cast<int>(d_logits.size()) == n, "d_logits length");
  for (int j = 0; j < n; j++) {
    const double dz = d_logits[j];
    if (dz == 0.0) continue;
    const double nw = Norm2(weights.Row(j));
    const double zj = Dot(weights.Row(j), embedding) / nw;
    const double *w = weights.RowData(j);
    double *dw = d_weights->RowData(j);
    for (int i = 0; i < e_dim; i++) {
      const double what = w[i] / nw;
      (*d_embedding)[i] += dz * what;
      dw[i] += dz * (embedding[i] - zj * what) / nw;
    }
  }
}

std::vector<double> HeadLogits(ClassLoss head, const ForwardTrace &trace,
                               const Matrix &classifier_weight) {
  if (head == ClassLoss::kSoftmax) return trace.logits;
  return CosineLogits(classifier_weight, trace.embedding);
}

TeacherOutputs MakeTeacherOutputs(ClassLoss head, const ForwardTrace &trace,
                                  const Matrix &classifier_weight) {
  return {HeadLogits(head, trace, classifier_weight), trace.embedding};
}

CompositeResult CompositeLoss(const DistillationConfig &cfg,
                              const TeacherOutputs *teacher,
                              const ForwardTrace &student,
                              const Matrix &classifier_weight, int label) {
  cfg.Validate();
  if (cfg.use_kld || cfg.use_emd)
    SVD_CHECK(teacher != nullptr,
              "teacher outputs required when a distillation term is active");

  CompositeResult res;
  res.d_logits.assign(student.logits.size(), 0.0);
  res.d_embedding.assign(student.embedding.size(), 0.0);
  const bool angular = cfg.class_loss == ClassLoss::kAsoftmax;
  if (angular)
    res.d_classifier_weight =
        Matrix(classifier_weight.NumRows(), classifier_weight.NumCols());

  double total = 0.0;
  if (cfg.weight_class > 0) {
    double value;
    if (angular) {
      AsoftmaxCeResult ce = AsoftmaxCrossEntropy(
          classifier_weight, student.embedding, label, cfg.asoftmax_margin);
      value = ce.value;
      res.d_classifier_weight.AddScaled(ce.d_weights, cfg.weight_class);
      for (size_t i = 0; i < res.d_embedding.size(); i++)
        res.d_embedding[i] += cfg.weight_class * ce.d_embedding[i];
    } else {
      SoftmaxCeResult ce = SoftmaxCrossEntropy(student.logits, label);
      value = ce.value;
      for (size_t i = 0; i < res.d_logits.size(); i++)
        res.d_logits[i] += cfg.weight_class * ce.d_logits[i];
    }
    res.report.terms.emplace_back("class", value);
    total += cfg.weight_class * value;
  }
  if (cfg.use_kld) {
    std::vector<double> student_logits =
        HeadLogits(cfg.class_loss, student, classifier_weight);
    KldResult kld =
        KldDistill(teacher->logits, student_logits, cfg.temperature);
    if (angular) {
      std::vector<double> d_scaled(kld.d_student_logits.size());
      for (size_t i = 0; i < d_scaled.size(); i++)
        d_scaled[i] = cfg.weight_kld * kld.d_student_logits[i];
      CosineLogitsBackward(classifier_weight, student.embedding, d_scaled,
                           &res.d_classifier_weight, &res.d_embedding);
    } else {
      for (size_t i = 0; i < res.d_logits.size(); i++)
        res.d_logits[i] += cfg.weight_kld * kld.d_student_logits[i];
    }
    res.report.terms.emplace_back("kld", kld.value);
    total += cfg.weight_kld * kld.value;
  }
  if (cfg.use_emd) {
    EmdResult emd = EmdCosine(teacher->embedding, student.embedding);
    for (size_t i = 0; i < res.d_embedding.size(); i++)
      res.d_embedding[i] += cfg.weight_emd * emd.d_student_embedding[i];
    res.report.terms.emplace_back("emd", emd.value);
    total += cfg.weight_emd * emd.value;
  }
  res.report.total = total;
  return res;
}

}  // namespace svdistill
