// svdistill/data.cc

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

#include "svdistill/data.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace svdistill {

namespace {

constexpr char kCorpusMagic[4] = {'S', 'V', 'C', 'P'};
constexpr uint32_t kCorpusVersion = 1;

constexpr uint64_t kSpeakerStream = 1ull << 32;
constexpr uint64_t kUtteranceStream = 2ull << 32;

void WriteU32(std::ostream &os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; i++) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char *>(b), 4);
}

void WriteF32(std::ostream &os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  WriteU32(os, v);
}

bool TryReadU32(std::istream &is, uint32_t *out) {
  unsigned char b[4];
  is.read(reinterpret_cast<char *>(b), 4);
  if (is.gcount() != 4) return false;
  *out = 0;
  for (int i = 0; i < 4; i++) *out |= static_cast<uint32_t>(b[i]) << (8 * i);
  return true;
}

uint32_t ReadU32(std::istream &is, const char *what) {
  uint32_t v;
  if (!TryReadU32(is, &v))
    throw DataError(std::string("corrupt corpus file: truncated ") + what);
  return v;
}

float ReadF32(std::istream &is, const char *what) {
  const uint32_t v = ReadU32(is, what);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

std::vector<int> Corpus::SpeakerIds() const {
  std::set<int> ids;
  for (const Utterance &u : utterances) ids.insert(u.speaker_id);
  return {ids.begin(), ids.end()};
}

std::map<int, int> Corpus::LabelMap() const {
  std::map<int, int> m;
  for (int id : SpeakerIds()) {
    const int next = static_cast<int>(m.size());
    m[id] = next;
  }
  return m;
}

DomainShift MakeDomainShift(int dim, double scale, double bias_norm,
                            Rng *rng) {
  // Modified Gram-Schmidt on a gaussian matrix gives the orthonormal factor.
  Matrix g = GaussianMatrix(rng, 0.0, 1.0, dim, dim);
  Matrix q(dim, dim);
  for (int i = 0; i < dim; i++) {
    std::vector<double> v(g.Row(i).begin(), g.Row(i).end());
    for (int k = 0; k < i; k++) {
      const double proj = Dot(q.Row(k), v);
      for (int j = 0; j < dim; j++) v[j] -= proj * q(k, j);
    }
    const double n = Norm2(v);
    SVD_CHECK(n > 1e-12, "degenerate random rotation");
    for (int j = 0; j < dim; j++) q(i, j) = v[j] / n;
  }
  DomainShift shift;
  shift.a = q;
  shift.a.Scale(scale);
  Matrix dir = GaussianMatrix(rng, 0.0, 1.0, 1, dim);
  const double n = Norm2(dir.Row(0));
  shift.b.resize(dim);
  for (int j = 0; j < dim; j++) shift.b[j] = bias_norm * dir(0, j) / n;
  return shift;
}

void CorpusSpec::Validate() const {
  SVD_CHECK(n_speakers >= 1 && utts_per_speaker >= 1, "empty corpus spec");
  SVD_CHECK(feature_dim >= 1, "feature_dim ", feature_dim);
  SVD_CHECK(long_min >= 1 && long_min <= long_max, "long frame range");
  SVD_CHECK(short_min >= 1 && short_min <= short_max, "short frame range");
  SVD_CHECK(sigma_speaker >= 0 && sigma_channel >= 0 && sigma_frame >= 0,
            "negative spread");
  SVD_CHECK(ar_coeff >= 0.0 && ar_coeff < 1.0, "ar_coeff ", ar_coeff);
  if (!shift.IsIdentity()) {
    SVD_CHECK(shift.a.NumRows() == feature_dim &&
                  shift.a.NumCols() == feature_dim,
              "domain shift A must be ", feature_dim, "x", feature_dim);
    SVD_CHECK(static_cast<int>(shift.b.size()) == feature_dim,
              "domain shift b must have dim ", feature_dim);
  }
}

Corpus GenerateCorpus(const CorpusSpec &spec) {
  spec.Validate();
  const int d = spec.feature_dim;
  const bool target = spec.domain == Domain::kTarget;
  const int len_min = target ? spec.short_min : spec.long_min;
  const int len_max = target ? spec.short_max : spec.long_max;
  Rng base(spec.seed);

  std::vector<Matrix> speaker_means;
  speaker_means.reserve(spec.n_speakers);
  for (int s = 0; s < spec.n_speakers; s++) {
    Rng rng = base.Fork(kSpeakerStream + static_cast<uint64_t>(s));
    speaker_means.push_back(
        GaussianMatrix(&rng, 0.0, spec.sigma_speaker, 1, d));
  }

  Corpus corpus;
  corpus.feature_dim = d;
  corpus.utterances.reserve(static_cast<size_t>(spec.n_speakers) *
                            spec.utts_per_speaker);
  const double ar_in = std::sqrt(1.0 - spec.ar_coeff * spec.ar_coeff);
  for (int s = 0; s < spec.n_speakers; s++) {
    const double *mean = speaker_means[s].RowData(0);
    for (int j = 0; j < spec.utts_per_speaker; j++) {
      const uint64_t u =
          static_cast<uint64_t>(s) * spec.utts_per_speaker + j;
      Rng rng = base.Fork(kUtteranceStream + u);
      const int t_len =
          len_min + static_cast<int>(rng.NextInt(len_max - len_min + 1));
      std::vector<double> channel(d), noise(d);
      for (int i = 0; i < d; i++)
        channel[i] = spec.sigma_channel * rng.NextGaussian();
      Matrix x(t_len, d);
      for (int t = 0; t < t_len; t++) {
        double *row = x.RowData(t);
        for (int i = 0; i < d; i++) {
          const double w = spec.sigma_frame * rng.NextGaussian();
          noise[i] = t == 0 ? w : spec.ar_coeff * noise[i] + ar_in * w;
          row[i] = mean[i] + channel[i] + noise[i];
        }
      }
      if (target && !spec.shift.IsIdentity()) {
        Matrix shifted = MatMul(x, Transpose(spec.shift.a));
        for (int t = 0; t < t_len; t++) {
          double *row = shifted.RowData(t);
          for (int i = 0; i < d; i++) row[i] += spec.shift.b[i];
        }
        x = std::move(shifted);
      }
      corpus.utterances.push_back(
          {spec.first_speaker_id + s, spec.domain, std::move(x)});
    }
  }
  return corpus;
}

FeatureSequence Crop(const Utterance &utt, int frames, Rng *rng) {
  const int t_len = utt.features.NumRows();
  SVD_CHECK(frames >= 1, "crop of ", frames, " frames");
  SVD_CHECK(frames <= t_len, "crop of ", frames,
            " frames from an utterance of ", t_len);
  const int start = static_cast<int>(rng->NextInt(t_len - frames + 1));
  FeatureSequence out(frames, utt.features.NumCols());
  for (int t = 0; t < frames; t++)
    std::memcpy(out.RowData(t), utt.features.RowData(start + t),
                utt.features.NumCols() * sizeof(double));
  return out;
}

TrialList MakeTrials(const Corpus &corpus, int n_target, int n_nontarget,
                     Rng *rng) {
  SVD_CHECK(n_target >= 0 && n_nontarget >= 0, "negative trial count");
  std::map<int, std::vector<int>> by_speaker;
  for (size_t i = 0; i < corpus.utterances.size(); i++)
    by_speaker[corpus.utterances[i].speaker_id].push_back(
        static_cast<int>(i));
  std::vector<const std::vector<int> *> speakers, multi;
  for (const auto &[id, utts] : by_speaker) {
    speakers.push_back(&utts);
    if (utts.size() >= 2) multi.push_back(&utts);
  }
  if (n_target > 0)
    SVD_CHECK(!multi.empty(),
              "target trials need a speaker with at least 2 utterances");
  if (n_nontarget > 0)
    SVD_CHECK(speakers.size() >= 2, "nontarget trials need >= 2 speakers");

  TrialList trials;
  trials.reserve(n_target + n_nontarget);
  for (int k = 0; k < n_target; k++) {
    const std::vector<int> &utts =
        *multi[static_cast<size_t>(rng->NextInt(multi.size()))];
    const int a = static_cast<int>(rng->NextInt(utts.size()));
    int b = static_cast<int>(rng->NextInt(utts.size() - 1));
    if (b >= a) b++;
    trials.push_back({utts[a], utts[b], TrialLabel::kTarget});
  }
  for (int k = 0; k < n_nontarget; k++) {
    const int sa = static_cast<int>(rng->NextInt(speakers.size()));
    int sb = static_cast<int>(rng->NextInt(speakers.size() - 1));
    if (sb >= sa) sb++;
    const std::vector<int> &ua = *speakers[sa];
    const std::vector<int> &ub = *speakers[sb];
    trials.push_back({ua[static_cast<size_t>(rng->NextInt(ua.size()))],
                      ub[static_cast<size_t>(rng->NextInt(ub.size()))],
                      TrialLabel::kNontarget});
  }
  return trials;
}

void AuditTrials(const Corpus &corpus, const TrialList &trials) {
  const int n = static_cast<int>(corpus.utterances.size());
  for (const Trial &t : trials) {
    SVD_CHECK(t.enroll >= 0 && t.enroll < n && t.test >= 0 && t.test < n,
              "trial utterance index out of range");
    SVD_CHECK(t.enroll != t.test, "utterance paired with itself");
    const bool same = corpus.utterances[t.enroll].speaker_id ==
                      corpus.utterances[t.test].speaker_id;
    SVD_CHECK(same == (t.label == TrialLabel::kTarget),
              "trial label inconsistent with speaker ids (", t.enroll, ",",
              t.test, ")");
  }
}

void SaveCorpus(const std::string &path, const Corpus &corpus) {
  std::ofstream os(path, std::ios::binary);
  SVD_CHECK(os.good(), "cannot open ", path, " for writing");
  os.write(kCorpusMagic, 4);
  WriteU32(os, kCorpusVersion);
  WriteU32(os, static_cast<uint32_t>(corpus.feature_dim));
  for (const Utterance &u : corpus.utterances) {
    SVD_CHECK(u.features.NumCols() == corpus.feature_dim,
              "utterance dim mismatch");
    SVD_CHECK(u.features.AllFinite(), "non-finite features");
    WriteU32(os, static_cast<uint32_t>(u.speaker_id));
    os.put(u.domain == Domain::kTarget ? 1 : 0);
    WriteU32(os, static_cast<uint32_t>(u.features.NumRows()));
    for (double v : u.features.Data()) WriteF32(os, static_cast<float>(v));
  }
  SVD_CHECK(os.good(), "write failed for ", path);
}

Corpus LoadCorpus(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is.good()) throw DataError("cannot open corpus file " + path);
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, kCorpusMagic, 4) != 0)
    throw DataError("corrupt corpus file: bad magic in " + path);
  const uint32_t version = ReadU32(is, "version");
  SVD_CHECK(version == kCorpusVersion, "unsupported corpus version ",
            version);
  Corpus corpus;
  corpus.feature_dim = static_cast<int>(ReadU32(is, "feature dim"));
  SVD_CHECK(corpus.feature_dim >= 1 && corpus.feature_dim <= (1 << 20),
            "corrupt corpus file: feature dim ", corpus.feature_dim);
  for (;;) {
    uint32_t speaker;
    if (!TryReadU32(is, &speaker)) break;  // clean EOF
    Utterance u;
    u.speaker_id = static_cast<int>(speaker);
    const int dom = is.get();
    if (dom != 0 && dom != 1)
      throw DataError("corrupt corpus file: truncated domain tag");
    u.domain = dom == 1 ? Domain::kTarget : Domain::kSource;
    const uint32_t t_len = ReadU32(is, "frame count");
    SVD_CHECK(t_len >= 1 && t_len <= (1u << 24),
              "corrupt corpus file: frame count ", t_len);
    u.features = Matrix(static_cast<int>(t_len), corpus.feature_dim);
    for (double &v : u.features.Data())
      v = static_cast<double>(ReadF32(is, "features"));
    SVD_CHECK(u.features.AllFinite(), "non-finite features in ", path);
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

void SaveTrials(const std::string &path, const TrialList &trials) {
  std::ofstream os(path);
  SVD_CHECK(os.good(), "cannot open ", path, " for writing");
  for (const Trial &t : trials)
    os << t.enroll << '\t' << t.test << '\t'
       << (t.label == TrialLabel::kTarget ? "target" : "nontarget") << '\n';
  SVD_CHECK(os.good(), "write failed for ", path);
}

TrialList LoadTrials(const std::string &path) {
  std::ifstream is(path);
  if (!is.good()) throw DataError("cannot open trial file " + path);
  TrialList trials;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    if (line.empty()) continue;
    const size_t tab1 = line.find('\t');
    const size_t tab2 = tab1 == std::string::npos
                            ? std::string::npos
                            : line.find('\t', tab1 + 1);
    SVD_CHECK(tab2 != std::string::npos, "malformed trial at ", path, ":",
              lineno);
    Trial t;
    try {
      t.enroll = std::stoi(line.substr(0, tab1));
      t.test = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
    } catch (const std::exception &) {
      throw DataError("malformed trial at " + path + ":" +
                      std::to_string(lineno));
    }
    const std::string label = line.substr(tab2 + 1);
    if (label == "target") {
      t.label = TrialLabel::kTarget;
    } else if (label == "nontarget") {
      t.label = TrialLabel::kNontarget;
    } else {
      throw DataError("unknown trial label '" + label + "' at " + path + ":" +
                      std::to_string(lineno));
    }
    trials.push_back(t);
  }
  return trials;
}

}  // namespace svdistill
