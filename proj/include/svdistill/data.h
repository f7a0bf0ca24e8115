// svdistill/data.h

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

#ifndef SVDISTILL_DATA_H_
#define SVDISTILL_DATA_H_

#include <map>
#include <string>
#include <vector>

#include "svdistill/network.h"
#include "svdistill/rng.h"

namespace svdistill {

enum class Domain { kSource, kTarget };

struct Utterance {
  int speaker_id;
  Domain domain;
  FeatureSequence features;  // T x D
};

struct Corpus {
  int feature_dim = 0;
  std::vector<Utterance> utterances;

  std::vector<int> SpeakerIds() const;  // sorted unique
  int NumSpeakers() const { return static_cast<int>(SpeakerIds().size()); }
  // speaker id -> contiguous class index, by sorted id order
  std::map<int, int> LabelMap() const;
};

// Linear map x -> A x + b applied per frame to target-domain utterances.
struct DomainShift {
  Matrix a;               // D x D; empty = identity
  std::vector<double> b;  // D; empty = zero

  bool IsIdentity() const { return a.Empty() && b.empty(); }
};

// A = scale * (random orthonormal D x D), b = random direction * bias_norm.
DomainShift MakeDomainShift(int dim, double scale, double bias_norm,
                            Rng *rng);

// Statistical description of one synthetic corpus. Speaker means are
// N(0, sigma_speaker^2 I); each utterance adds a channel offset
// N(0, sigma_channel^2 I) and stationary AR(1) frame noise
// n_t = rho n_{t-1} + sqrt(1 - rho^2) sigma_frame w_t. Target-domain
// utterances are mapped through `shift` and use the short length range;
// source utterances use the long range.
struct CorpusSpec {
  int n_speakers = 200;
  int utts_per_speaker = 20;
  int feature_dim = 30;
  int long_min = 300, long_max = 800;
  int short_min = 80, short_max = 240;
  double sigma_speaker = 1.0;
  double sigma_channel = 0.3;
  double sigma_frame = 0.5;
  double ar_coeff = 0.7;
  Domain domain = Domain::kSource;
  DomainShift shift;
  uint64_t seed = 0;
  int first_speaker_id = 0;

  void Validate() const;
};

// Deterministic per seed: speaker s draws from substream (1<<32)+s and
// utterance u (global index) from substream (2<<32)+u, so generation order
// does not matter.
Corpus GenerateCorpus(const CorpusSpec &spec);

// Contiguous random slice of `frames` rows, start uniform in [0, T-frames].
FeatureSequence Crop(const Utterance &utt, int frames, Rng *rng);

enum class TrialLabel { kTarget, kNontarget };

struct Trial {
  int enroll;  // utterance index within the corpus
  int test;
  TrialLabel label;
};

using TrialList = std::vector<Trial>;

// Sampled trials with labels correct by construction; an utterance is never
// paired with itself (repeated pairs may occur).
TrialList MakeTrials(const Corpus &corpus, int n_target, int n_nontarget,
                     Rng *rng);

// Recomputes every label from speaker ids; throws on any inconsistency.
void AuditTrials(const Corpus &corpus, const TrialList &trials);

// Corpus and trial files: see docs/file_formats.md. Features are stored as
// little-endian IEEE-754 float32.
void SaveCorpus(const std::string &path, const Corpus &corpus);
Corpus LoadCorpus(const std::string &path);
void SaveTrials(const std::string &path, const TrialList &trials);
TrialList LoadTrials(const std::string &path);

}  // namespace svdistill

#endif  // SVDISTILL_DATA_H_
