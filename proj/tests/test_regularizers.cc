// tests/test_regularizers.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "svdistill/regularizers.h"
#include "svdistill/training.h"
#include "test_util.h"

using namespace svdistill;
using svdistill::testutil::MaxGradError;

namespace {

// One group, one 1 x n matrix named "weight".
ParameterSet VectorParams(const std::vector<double> &w,
                          const std::string &group = "g") {
  ParameterSet p;
  p.AddGroup(group).AddValue("weight",
                             Matrix(1, static_cast<int>(w.size()), w));
  return p;
}

SpReference MakeRef(const ParameterSet &snapshot,
                    std::vector<std::string> shared,
                    std::vector<std::string> modified) {
  SpReference ref;
  ref.snapshot = snapshot;
  ref.shared_groups = std::move(shared);
  ref.modified_groups = std::move(modified);
  return ref;
}

}  // namespace

TEST_CASE("l2 norm penalty values") {
  ParameterSet zero = VectorParams({0.0, 0.0});
  CHECK(L2NormPenalty(&zero, FullMask(zero), 0.5, true) == 0.0);

  ParameterSet p = VectorParams({3.0, 4.0});
  CHECK(L2NormPenalty(&p, FullMask(p), 0.1, true) ==
        doctest::Approx(2.5).epsilon(1e-15));
  // grad = 2 alpha w
  CHECK(p.Group("g").grads[0](0, 0) == doctest::Approx(0.6));
  CHECK(p.Group("g").grads[0](0, 1) == doctest::Approx(0.8));
}

TEST_CASE("l2 norm gradient vs finite differences") {
  Rng rng(50);
  ParameterSet p = VectorParams({0.0, 0.0, 0.0, 0.0, 0.0});
  for (double &v : p.Group("g").values[0].Data()) v = rng.NextGaussian();
  p.ZeroGrads();
  const double alpha = 0.37;
  L2NormPenalty(&p, FullMask(p), alpha, true);
  auto loss = [&]() {
    ParameterSet tmp = p;
    tmp.ZeroGrads();
    return L2NormPenalty(&tmp, FullMask(tmp), alpha, true);
  };
  CHECK(MaxGradError(&p, p, loss) < 1e-10);
}

TEST_CASE("l2 sp penalty values and pull toward the reference") {
  ParameterSet p = VectorParams({1.5, -0.5});
  SpReference ref = MakeRef(p.Snapshot(), {"g"}, {});
  CHECK(L2SpPenalty(&p, FullMask(p), ref, 0.7, true) == 0.0);

  // delta = [1, -1], alpha = 0.1 -> 0.2
  p.Group("g").values[0](0, 0) += 1.0;
  p.Group("g").values[0](0, 1) -= 1.0;
  p.ZeroGrads();
  CHECK(L2SpPenalty(&p, FullMask(p), ref, 0.1, true) ==
        doctest::Approx(0.2).epsilon(1e-15));
  // The negative gradient points back to W0.
  CHECK(p.Group("g").grads[0](0, 0) > 0.0);
  CHECK(p.Group("g").grads[0](0, 1) < 0.0);
}

TEST_CASE("split l2 sp values, including the paper operating point") {
  ParameterSet p = VectorParams({2.0, -1.0}, "shared");
  p.Group("shared").AddValue("extra", Matrix(1, 1));
  ParameterSet snap = p.Snapshot();
  ParameterSet live = p;
  live.AddGroup("head").AddValue("weight", Matrix(1, 1, {2.0}));
  ParameterSet snap2 = live.Snapshot();
  SpReference ref = MakeRef(snap2, {"shared"}, {"head"});

  // W_s = W_s0 and W_m = 0 -> 0 after zeroing the head.
  {
    ParameterSet at_min = live;
    at_min.Group("head").values[0].SetZero();
    CHECK(SplitL2SpPenalty(&at_min, FullMask(at_min), ref, 0.3, 0.9, true) ==
          0.0);
  }

  // shared delta [1,-1] with alpha 0.1; W_m = [2] with beta 0.01:
  // 0.2 + 0.04 = 0.24 at the paper operating point alpha=0.1, beta=0.01.
  ParameterSet moved = live;
  moved.Group("shared").values[0](0, 0) += 1.0;
  moved.Group("shared").values[0](0, 1) -= 1.0;
  CHECK(SplitL2SpPenalty(&moved, FullMask(moved), ref, 0.1, 0.01, true) ==
        doctest::Approx(0.24).epsilon(1e-15));
}

TEST_CASE("l1 sp values and subgradient") {
  ParameterSet base = VectorParams({0.25, -0.75}, "shared");
  ParameterSet live = base;
  live.AddGroup("head").AddValue("weight", Matrix(1, 1, {1.0}));
  SpReference ref = MakeRef(live.Snapshot(), {"shared"}, {"head"});

  // At the minimizer (W_s = W_s0, W_m = 0) the value is exactly 0.
  {
    ParameterSet at_min = live;
    at_min.Group("head").values[0].SetZero();
    CHECK(L1SpPenalty(&at_min, FullMask(at_min), ref, 0.4, 0.2, true) == 0.0);
    // sign(0) = 0: no gradient on the shared part at the start point.
    for (double g : at_min.Group("shared").grads[0].Data()) CHECK(g == 0.0);
  }

  // deltas [0.5, -0.5] alpha 0.1; W_m = [1] beta 0.01 -> 0.11
  ParameterSet moved = live;
  moved.Group("shared").values[0](0, 0) += 0.5;
  moved.Group("shared").values[0](0, 1) -= 0.5;
  CHECK(L1SpPenalty(&moved, FullMask(moved), ref, 0.1, 0.01, true) ==
        doctest::Approx(0.11).epsilon(1e-15));
  CHECK(moved.Group("shared").grads[0](0, 0) == doctest::Approx(0.1));
  CHECK(moved.Group("shared").grads[0](0, 1) == doctest::Approx(-0.1));
}

TEST_CASE("l1 sp gradient vs finite differences away from kinks") {
  Rng rng(51);
  ParameterSet live = VectorParams({0, 0, 0, 0, 0, 0}, "shared");
  SpReference ref = MakeRef(live.Snapshot(), {"shared"}, {});
  for (double &v : live.Group("shared").values[0].Data())
    v = rng.NextGaussian();  // deltas are O(1), far from the kink
  live.ZeroGrads();
  L1SpPenalty(&live, FullMask(live), ref, 0.8, 0.0, true);
  auto loss = [&]() {
    ParameterSet tmp = live;
    tmp.ZeroGrads();
    return L1SpPenalty(&tmp, FullMask(tmp), ref, 0.8, 0.0, true);
  };
  auto skip = [&](const std::string &g, size_t vi, size_t i) {
    const double delta = live.Group(g).values[vi].Data()[i] -
                         ref.snapshot.Group(g).values[vi].Data()[i];
    return std::fabs(delta) < 1e-6;
  };
  CHECK(MaxGradError(&live, live, loss, 1e-7, skip) < 1e-6);
}

TEST_CASE("penalties are additive over groups") {
  Rng rng(52);
  ParameterSet p;
  p.AddGroup("a").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 3));
  p.AddGroup("b").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 1, 4));
  p.AddGroup("c").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 3, 2));
  const double all = L2NormPenalty(&p, FullMask(p), 0.25, true);
  double per_group = 0.0;
  for (int i = 0; i < p.NumGroups(); i++) {
    GroupMask one(p.NumGroups(), false);
    one[i] = true;
    p.ZeroGrads();
    per_group += L2NormPenalty(&p, one, 0.25, true);
  }
  CHECK(std::fabs(all - per_group) < 1e-12);
}

TEST_CASE("frozen groups contribute neither value nor gradient") {
  Rng rng(53);
  ParameterSet p;
  p.AddGroup("a").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 2));
  p.AddGroup("b").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 2));
  GroupMask only_a(2, false);
  only_a[0] = true;
  const double value = L2NormPenalty(&p, only_a, 1.0, true);
  double a_norm = 0.0;
  for (double v : p.Group("a").values[0].Data()) a_norm += v * v;
  CHECK(value == doctest::Approx(a_norm).epsilon(1e-15));
  for (double g : p.Group("b").grads[0].Data()) CHECK(g == 0.0);
}

TEST_CASE("split l2 sp with empty modified set equals l2 sp exactly") {
  Rng rng(54);
  ParameterSet p;
  p.AddGroup("a").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 3, 3));
  p.AddGroup("b").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 5));
  SpReference ref = MakeRef(p.Snapshot(), {"a", "b"}, {});
  for (int i = 0; i < p.NumGroups(); i++)
    for (double &v : p.Group(i).values[0].Data())
      v += 0.1 * rng.NextGaussian();

  ParameterSet p1 = p, p2 = p;
  const double split =
      SplitL2SpPenalty(&p1, FullMask(p1), ref, 0.35, 123.0, true);
  const double plain = L2SpPenalty(&p2, FullMask(p2), ref, 0.35, true);
  CHECK(split == plain);
  for (int i = 0; i < p.NumGroups(); i++)
    for (size_t k = 0; k < p1.Group(i).grads[0].Data().size(); k++)
      CHECK(p1.Group(i).grads[0].Data()[k] == p2.Group(i).grads[0].Data()[k]);
}

TEST_CASE("group misclassification is rejected") {
  Rng rng(55);
  ParameterSet p;
  p.AddGroup("a").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 2));
  p.AddGroup("b").AddValue("weight", GaussianMatrix(&rng, 0.0, 1.0, 2, 2));

  // Trainable group in neither partition.
  SpReference missing = MakeRef(p.Snapshot(), {"a"}, {});
  CHECK_THROWS_AS(
      SplitL2SpPenalty(&p, FullMask(p), missing, 0.1, 0.01, true), DataError);

  // Group in both partitions.
  SpReference both = MakeRef(p.Snapshot(), {"a", "b"}, {"b"});
  CHECK_THROWS_AS(SplitL2SpPenalty(&p, FullMask(p), both, 0.1, 0.01, true),
                  DataError);

  // Shape mismatch against the snapshot.
  ParameterSet snap;
  snap.AddGroup("a").AddValue("weight", Matrix(3, 3));
  snap.AddGroup("b").AddValue("weight", Matrix(2, 2));
  SpReference bad_shape = MakeRef(snap, {"a", "b"}, {});
  CHECK_THROWS_AS(
      SplitL2SpPenalty(&p, FullMask(p), bad_shape, 0.1, 0.01, true),
      DataError);
}

TEST_CASE("exclude-bias flag skips bias matrices") {
  ParameterSet p;
  ParamGroup &g = p.AddGroup("fc");
  g.AddValue("weight", Matrix(1, 2, {3.0, 4.0}));
  g.AddValue("bias", Matrix(1, 1, {10.0}));
  CHECK(L2NormPenalty(&p, FullMask(p), 1.0, false) ==
        doctest::Approx(25.0).epsilon(1e-15));
  CHECK(p.Group("fc").grads[1](0, 0) == 0.0);
  p.ZeroGrads();
  CHECK(L2NormPenalty(&p, FullMask(p), 1.0, true) ==
        doctest::Approx(125.0).epsilon(1e-15));
}

TEST_CASE("l1 sp pins more shared parameters than l2 sp at matched alpha") {
  // Fine-tune a small model on a small shifted corpus under both SP
  // penalties with a strong alpha; count shared coordinates that stay at
  // the start point. The L1 subgradient lets low-gradient coordinates
  // stay pinned; the quadratic penalty always lets them drift.
  CorpusSpec spec;
  spec.n_speakers = 4;
  spec.utts_per_speaker = 6;
  spec.feature_dim = 5;
  spec.domain = Domain::kTarget;
  spec.short_min = 20;
  spec.short_max = 30;
  spec.sigma_channel = 0.3;
  spec.sigma_frame = 0.5;
  spec.seed = 99;
  Corpus corpus = GenerateCorpus(spec);

  EncoderConfig enc;
  enc.input_dim = 5;
  enc.block_widths = {6};
  enc.conv_context = 3;
  enc.pooling = Pooling::kMean;
  enc.embedding_dim = 4;
  enc.num_classes = 4;
  Rng init(7);
  ParameterSet student = InitParameters(enc, &init);

  FineTuneConfig ft;
  ft.alpha = 0.5;
  ft.beta = 0.01;
  ft.selection = LayerSelection::kAll;
  ft.epochs = 30;
  ft.lr_decay_epochs = 10;
  ft.batch_size = 8;
  ft.seed = 3;

  auto pinned_fraction = [&](RegKind kind) {
    FineTuneConfig cfg = ft;
    cfg.regularizer = kind;
    FineTuneResult res = FineTune(enc, student, corpus, cfg);
    size_t pinned = 0, total = 0;
    for (const std::string &name : res.reference.shared_groups) {
      const ParamGroup &live = res.params.Group(name);
      const ParamGroup &snap = res.reference.snapshot.Group(name);
      for (size_t j = 0; j < live.values.size(); j++)
        for (size_t i = 0; i < live.values[j].Data().size(); i++) {
          total++;
          if (std::fabs(live.values[j].Data()[i] -
                        snap.values[j].Data()[i]) < 1e-6)
            pinned++;
        }
    }
    return static_cast<double>(pinned) / total;
  };

  const double l1_pinned = pinned_fraction(RegKind::kL1Sp);
  const double l2_pinned = pinned_fraction(RegKind::kSplitL2Sp);
  CHECK(l1_pinned > l2_pinned);
}
