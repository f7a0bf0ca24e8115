// svdistill/backend.h

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

#ifndef SVDISTILL_BACKEND_H_
#define SVDISTILL_BACKEND_H_

#include <string>
#include <vector>

#include "svdistill/data.h"
#include "svdistill/network.h"

namespace svdistill {

// One embedding per utterance via Forward. crop_frames > 0 crops each
// utterance deterministically (substream per utterance index); shorter
// utterances are used whole.
Matrix ExtractEmbeddings(const EncoderConfig &cfg, const ParameterSet &params,
                         const Corpus &corpus, int crop_frames, uint64_t seed,
                         int threads = 1);

struct BackendConfig {
  int lda_dim = 16;
  bool use_lda = true;
};

// x / |x|; throws on zero norm. Idempotent.
std::vector<double> LengthNormalize(std::span<const double> x);

// Closed-form log-likelihood-ratio scoring for the two-covariance model
// x = y + e with y ~ N(mu, sigma_b) and e ~ N(0, sigma_w):
//   llr = log p(a, b | same speaker) - log p(a, b | different speakers).
// Inputs to Llr must already have mu subtracted.
class PldaScorer {
 public:
  PldaScorer() = default;
  PldaScorer(const Matrix &sigma_b, const Matrix &sigma_w);
  double Llr(std::span<const double> a, std::span<const double> b) const;

 private:
  Matrix g_, q_;
  double constant_ = 0.0;
};

enum class Scorer { kCosine, kPlda };

Scorer ParseScorer(const std::string &name);
std::string ScorerName(Scorer s);

// Embedding processing order is fixed as: center -> whiten -> length-norm
// -> LDA; PLDA or cosine scoring runs in the processed space. The whitener
// is the inverse square root of total covariance (eigenvalues floored at
// 1e-8); PLDA is the two-covariance model fitted by between/within scatter
// estimates with closed-form log-likelihood-ratio scoring.
class BackendModel {
 public:
  static BackendModel Fit(const Matrix &embeddings,
                          const std::vector<int> &speaker_labels,
                          const BackendConfig &cfg);

  std::vector<double> Process(std::span<const double> embedding) const;
  double ScoreCosine(std::span<const double> enroll,
                     std::span<const double> test) const;
  double ScorePlda(std::span<const double> enroll,
                   std::span<const double> test) const;
  double Score(Scorer scorer, std::span<const double> enroll,
               std::span<const double> test) const;

  int processed_dim() const { return use_lda_ ? lda_.NumRows() : dim_; }
  const Matrix &sigma_between() const { return sigma_b_; }
  const Matrix &sigma_within() const { return sigma_w_; }
  const Matrix &whitener() const { return whitener_; }
  const Matrix &lda() const { return lda_; }

 private:
  int dim_ = 0;
  bool use_lda_ = true;
  std::vector<double> center_;
  Matrix whitener_;            // dim x dim
  Matrix lda_;                 // lda_dim x dim
  std::vector<double> plda_mean_;
  Matrix sigma_b_, sigma_w_;   // processed-space covariances
  PldaScorer plda_;
};

std::vector<double> ScoreTrials(const BackendModel &backend,
                                const Matrix &embeddings,
                                const TrialList &trials, Scorer scorer,
                                int threads = 1);

struct EerResult {
  double eer;        // in [0, 1]
  double threshold;  // score at the crossing
};

// Threshold sweep over score midpoints with linear interpolation of the
// ROC between adjacent operating points; FAR(t) = P(nontarget >= t),
// FRR(t) = P(target < t). Needs at least one score of each class.
EerResult ComputeEer(const std::vector<double> &scores,
                     const std::vector<bool> &is_target);

EerResult ComputeEer(const std::vector<double> &scores,
                     const TrialList &trials);

// One line per trial: enroll <TAB> test <TAB> score (17 significant digits).
void SaveScores(const std::string &path, const TrialList &trials,
                const std::vector<double> &scores);

}  // namespace svdistill

#endif  // SVDISTILL_BACKEND_H_
