// svdistill/backend.cc

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

#include "svdistill/backend.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "svdistill/eigh.h"
#include "svdistill/parallel.h"

namespace svdistill {

namespace {

constexpr double kEigFloor = 1e-8;

std::vector<double> ColumnMean(const Matrix &x) {
  std::vector<double> mean(x.NumCols(), 0.0);
  for (int i = 0; i < x.NumRows(); i++)
    for (int j = 0; j < x.NumCols(); j++) mean[j] += x(i, j);
  for (double &v : mean) v /= x.NumRows();
  return mean;
}

// sum of x_i x_i^T / n for the rows of x (optionally mean-subtracted).
Matrix Covariance(const Matrix &x, const std::vector<double> *mean) {
  const int n = x.NumRows(), d = x.NumCols();
  Matrix cov(d, d);
  std::vector<double> row(d);
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < d; j++)
      row[j] = mean ? x(i, j) - (*mean)[j] : x(i, j);
    for (int a = 0; a < d; a++) {
      const double ra = row[a];
      double *out = cov.RowData(a);
      for (int b = 0; b < d; b++) out[b] += ra * row[b];
    }
  }
  cov.Scale(1.0 / n);
  return cov;
}

void LengthNormalizeRow(double *row, int d) {
  double n = 0.0;
  for (int j = 0; j < d; j++) n += row[j] * row[j];
  n = std::sqrt(n);
  SVD_CHECK(n > 0.0, "zero-norm embedding after processing");
  for (int j = 0; j < d; j++) row[j] /= n;
}

}  // namespace

std::vector<double> LengthNormalize(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  LengthNormalizeRow(out.data(), static_cast<int>(out.size()));
  return out;
}

namespace {

Matrix Symmetrize(const Matrix &m) {
  Matrix out(m.NumRows(), m.NumCols());
  for (int i = 0; i < m.NumRows(); i++)
    for (int j = 0; j < m.NumCols(); j++)
      out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

double QuadraticForm(const Matrix &m, std::span<const double> a,
                     std::span<const double> b) {
  double s = 0.0;
  for (int i = 0; i < m.NumRows(); i++) s += a[i] * Dot(m.Row(i), b);
  return s;
}

}  // namespace

Matrix ExtractEmbeddings(const EncoderConfig &cfg, const ParameterSet &params,
                         const Corpus &corpus, int crop_frames, uint64_t seed,
                         int threads) {
  SVD_CHECK(corpus.feature_dim == cfg.input_dim, "corpus features of dim ",
            corpus.feature_dim, " but model expects ", cfg.input_dim);
  Matrix embs(static_cast<int>(corpus.utterances.size()), cfg.embedding_dim);
  const Rng base(seed);
  ParallelFor(corpus.utterances.size(), threads, [&](size_t i) {
    const Utterance &u = corpus.utterances[i];
    FeatureSequence input = u.features;
    if (crop_frames > 0 && u.features.NumRows() > crop_frames) {
      Rng rng = base.Fork(i);
      input = Crop(u, crop_frames, &rng);
    }
    const ForwardTrace trace = Forward(params, cfg, input);
    std::copy(trace.embedding.begin(), trace.embedding.end(),
              embs.RowData(static_cast<int>(i)));
  });
  return embs;
}

Scorer ParseScorer(const std::string &name) {
  if (name == "cosine") return Scorer::kCosine;
  if (name == "plda") return Scorer::kPlda;
  throw ConfigError("unknown backend scorer: " + name);
}

std::string ScorerName(Scorer s) {
  return s == Scorer::kCosine ? "cosine" : "plda";
}

BackendModel BackendModel::Fit(const Matrix &embeddings,
                               const std::vector<int> &speaker_labels,
                               const BackendConfig &cfg) {
  const int n = embeddings.NumRows(), d = embeddings.NumCols();
  SVD_CHECK(n >= 2, "backend fit needs >= 2 embeddings");
  SVD_CHECK(static_cast<int>(speaker_labels.size()) == n,
            "labels/embeddings mismatch");

  BackendModel m;
  m.dim_ = d;
  m.use_lda_ = cfg.use_lda;

  // Center and whiten with the inverse square root of total covariance.
  m.center_ = ColumnMean(embeddings);
  Matrix centered = embeddings;
  for (int i = 0; i < n; i++)
    for (int j = 0; j < d; j++) centered(i, j) -= m.center_[j];
  m.whitener_ = InverseSqrtPsd(Covariance(centered, nullptr), kEigFloor);
  Matrix z = MatMul(centered, m.whitener_);  // whitener is symmetric
  for (int i = 0; i < n; i++) LengthNormalizeRow(z.RowData(i), d);

  // Per-speaker statistics in the length-normalized space.
  std::map<int, std::vector<int>> by_speaker;
  for (int i = 0; i < n; i++) by_speaker[speaker_labels[i]].push_back(i);
  const int n_speakers = static_cast<int>(by_speaker.size());
  int speakers_with_two = 0;
  for (const auto &[id, rows] : by_speaker)
    if (rows.size() >= 2) speakers_with_two++;

  auto scatter_stats = [&](const Matrix &y, Matrix *s_w, Matrix *s_b,
                           std::vector<double> *mean_out) {
    const int dim = y.NumCols();
    std::vector<double> mean = ColumnMean(y);
    *s_w = Matrix(dim, dim);
    *s_b = Matrix(dim, dim);
    std::vector<double> dev(dim);
    for (const auto &[id, rows] : by_speaker) {
      std::vector<double> mu(dim, 0.0);
      for (int r : rows)
        for (int j = 0; j < dim; j++) mu[j] += y(r, j);
      for (double &v : mu) v /= rows.size();
      for (int r : rows) {
        for (int j = 0; j < dim; j++) dev[j] = y(r, j) - mu[j];
        for (int a = 0; a < dim; a++)
          for (int b = 0; b < dim; b++)
            (*s_w)(a, b) += dev[a] * dev[b];
      }
      for (int j = 0; j < dim; j++) dev[j] = mu[j] - mean[j];
      const double w = static_cast<double>(rows.size());
      for (int a = 0; a < dim; a++)
        for (int b = 0; b < dim; b++) (*s_b)(a, b) += w * dev[a] * dev[b];
    }
    s_w->Scale(1.0 / n);
    s_b->Scale(1.0 / n);
    if (mean_out) *mean_out = std::move(mean);
  };

  Matrix projected = z;
  if (cfg.use_lda) {
    const int l = cfg.lda_dim;
    SVD_CHECK(l >= 1, "lda_dim ", l);
    SVD_CHECK(l < d, "lda_dim ", l, " must be < embedding dim ", d);
    SVD_CHECK(l < n_speakers, "lda_dim ", l, " must be < speaker count ",
              n_speakers);
    SVD_CHECK(speakers_with_two >= l + 1, "LDA needs >= ", l + 1,
              " speakers with >= 2 utterances, got ", speakers_with_two);
    Matrix s_w, s_b;
    scatter_stats(z, &s_w, &s_b, nullptr);
    // Generalized eigenproblem S_b v = lambda S_w v via the symmetric
    // form T S_b T with T = S_w^{-1/2}.
    Matrix t = InverseSqrtPsd(s_w, kEigFloor);
    EighResult eig = EighSymmetric(Symmetrize(MatMul(MatMul(t, s_b), t)));
    m.lda_ = Matrix(l, d);
    for (int k = 0; k < l; k++) {
      // direction = T u_k, stored as a row of the projection
      for (int i = 0; i < d; i++) {
        double v = 0.0;
        for (int j = 0; j < d; j++) v += t(i, j) * eig.eigenvectors(j, k);
        m.lda_(k, i) = v;
      }
    }
    projected = MatMul(z, Transpose(m.lda_));
  }

  scatter_stats(projected, &m.sigma_w_, &m.sigma_b_, &m.plda_mean_);
  m.sigma_w_ = SymmetricFunction(
      Symmetrize(m.sigma_w_), [](double x) { return x; }, kEigFloor);
  m.sigma_b_ = Symmetrize(m.sigma_b_);
  m.plda_ = PldaScorer(m.sigma_b_, m.sigma_w_);
  return m;
}

PldaScorer::PldaScorer(const Matrix &sigma_b, const Matrix &sigma_w) {
  SVD_CHECK(sigma_b.SameDim(sigma_w) && sigma_b.NumRows() == sigma_b.NumCols(),
            "PLDA covariance shapes");
  // With A = S_b + S_w and the same/different block covariances,
  // llr = 0.5 a'Ga + 0.5 b'Gb - a'Qb + const where
  // P = (A - S_b A^-1 S_b)^-1, Q = -A^-1 S_b P, G = A^-1 - P and
  // const = logdet A - 0.5 logdet(A + S_b) - 0.5 logdet(A - S_b).
  const int pd = sigma_b.NumRows();
  for (double lam : EighSymmetric(sigma_b).eigenvalues)
    SVD_CHECK(lam > -1e-10, "non-PSD between-class covariance in PLDA");
  for (double lam : EighSymmetric(sigma_w).eigenvalues)
    SVD_CHECK(lam > 0.0, "non-PSD within-class covariance in PLDA");
  Matrix a(pd, pd);
  for (int i = 0; i < pd; i++)
    for (int j = 0; j < pd; j++) a(i, j) = sigma_b(i, j) + sigma_w(i, j);
  Matrix a_inv = InversePsd(a, 0.0);
  Matrix bab = MatMul(MatMul(sigma_b, a_inv), sigma_b);
  Matrix p_arg = a;
  p_arg.AddScaled(Symmetrize(bab), -1.0);
  Matrix p = InversePsd(Symmetrize(p_arg), 0.0);
  Matrix q = MatMul(MatMul(a_inv, sigma_b), p);
  q_ = Symmetrize(q);
  q_.Scale(-1.0);
  g_ = a_inv;
  g_.AddScaled(p, -1.0);
  g_ = Symmetrize(g_);
  Matrix a_plus_b = a, a_minus_b = a;
  a_plus_b.AddScaled(sigma_b, 1.0);
  a_minus_b.AddScaled(sigma_b, -1.0);
  constant_ = LogDetPsd(a) - 0.5 * LogDetPsd(Symmetrize(a_plus_b)) -
              0.5 * LogDetPsd(Symmetrize(a_minus_b));
}

double PldaScorer::Llr(std::span<const double> a,
                       std::span<const double> b) const {
  SVD_CHECK(!g_.Empty(), "PLDA scorer not fitted");
  SVD_CHECK(static_cast<int>(a.size()) == g_.NumRows() &&
                a.size() == b.size(),
            "PLDA dim mismatch");
  // Grouped so that swapping a and b reorders only commutative additions:
  // the score is bitwise symmetric.
  const double quad =
      0.5 * QuadraticForm(g_, a, a) + 0.5 * QuadraticForm(g_, b, b);
  const double cross =
      0.5 * (QuadraticForm(q_, a, b) + QuadraticForm(q_, b, a));
  return quad - cross + constant_;
}

std::vector<double> BackendModel::Process(
    std::span<const double> embedding) const {
  SVD_CHECK(static_cast<int>(embedding.size()) == dim_, "embedding dim ",
            embedding.size(), " vs backend dim ", dim_);
  std::vector<double> x(embedding.begin(), embedding.end());
  for (int j = 0; j < dim_; j++) x[j] -= center_[j];
  std::vector<double> w = MatVec(whitener_, x);
  LengthNormalizeRow(w.data(), dim_);
  if (!use_lda_) return w;
  return MatVec(lda_, w);
}

double BackendModel::ScoreCosine(std::span<const double> enroll,
                                 std::span<const double> test) const {
  return CosineSimilarity(Process(enroll), Process(test));
}

double BackendModel::ScorePlda(std::span<const double> enroll,
                               std::span<const double> test) const {
  std::vector<double> e = Process(enroll), t = Process(test);
  for (size_t j = 0; j < e.size(); j++) {
    e[j] -= plda_mean_[j];
    t[j] -= plda_mean_[j];
  }
  return plda_.Llr(e, t);
}

double BackendModel::Score(Scorer scorer, std::span<const double> enroll,
                           std::span<const double> test) const {
  return scorer == Scorer::kCosine ? ScoreCosine(enroll, test)
                                   : ScorePlda(enroll, test);
}

std::vector<double> ScoreTrials(const BackendModel &backend,
                                const Matrix &embeddings,
                                const TrialList &trials, Scorer scorer,
                                int threads) {
  for (const Trial &t : trials)
    SVD_CHECK(t.enroll >= 0 && t.enroll < embeddings.NumRows() &&
                  t.test >= 0 && t.test < embeddings.NumRows(),
              "trial index out of range");
  std::vector<double> scores(trials.size());
  ParallelFor(trials.size(), threads, [&](size_t i) {
    const Trial &t = trials[i];
    scores[i] = backend.Score(scorer, embeddings.Row(t.enroll),
                              embeddings.Row(t.test));
  });
  for (double s : scores) SVD_CHECK(std::isfinite(s), "non-finite score");
  return scores;
}

EerResult ComputeEer(const std::vector<double> &scores,
                     const std::vector<bool> &is_target) {
  SVD_CHECK(scores.size() == is_target.size(), "scores/labels mismatch");
  int n_tar = 0, n_non = 0;
  for (bool b : is_target) (b ? n_tar : n_non)++;
  SVD_CHECK(n_tar >= 1 && n_non >= 1,
            "EER needs at least one target and one nontarget score");

  // Operating points at thresholds midway between consecutive distinct
  // scores, plus one below the minimum and one above the maximum. One
  // sorted sweep maintains the counts: passing a group of tied scores
  // moves its targets from accepted to rejected and its nontargets from
  // falsely accepted to rejected.
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](size_t a, size_t b) { return scores[a] < scores[b]; });

  // far(t) = P(nontarget >= t) falls and frr(t) = P(target < t) rises with
  // t, so far - frr crosses zero exactly once.
  double prev_t = scores[order.front()] - 1.0;
  double prev_far = 1.0, prev_frr = 0.0;
  int fa = n_non, fr = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    size_t j = i;
    while (j < order.size() && scores[order[j]] == s) {
      if (is_target[order[j]])
        fr++;
      else
        fa--;
      j++;
    }
    const double t = j < order.size() ? 0.5 * (s + scores[order[j]])
                                      : s + 1.0;
    const double far = static_cast<double>(fa) / n_non;
    const double frr = static_cast<double>(fr) / n_tar;
    const double prev_diff = prev_far - prev_frr;
    const double diff = far - frr;
    if (prev_diff >= 0.0 && diff <= 0.0) {
      if (prev_diff == 0.0) return {prev_far, prev_t};
      // Linear interpolation along the ROC segment between the two
      // operating points.
      const double u = prev_diff / (prev_diff - diff);
      return {prev_far + u * (far - prev_far), prev_t + u * (t - prev_t)};
    }
    prev_far = far;
    prev_frr = frr;
    prev_t = t;
    i = j;
  }
  return {prev_far, prev_t};  // unreachable for valid inputs
}

EerResult ComputeEer(const std::vector<double> &scores,
                     const TrialList &trials) {
  SVD_CHECK(scores.size() == trials.size(), "scores/trials mismatch");
  std::vector<bool> is_target(trials.size());
  for (size_t i = 0; i < trials.size(); i++)
    is_target[i] = trials[i].label == TrialLabel::kTarget;
  return ComputeEer(scores, is_target);
}

void SaveScores(const std::string &path, const TrialList &trials,
                const std::vector<double> &scores) {
  SVD_CHECK(scores.size() == trials.size(), "scores/trials mismatch");
  std::ofstream os(path);
  SVD_CHECK(os.good(), "cannot open ", path, " for writing");
  char buf[96];
  for (size_t i = 0; i < trials.size(); i++) {
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%.17g\n", trials[i].enroll,
                  trials[i].test, scores[i]);
    os << buf;
  }
  SVD_CHECK(os.good(), "write failed for ", path);
}

}  // namespace svdistill
