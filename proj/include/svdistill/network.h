// svdistill/network.h

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

#ifndef SVDISTILL_NETWORK_H_
#define SVDISTILL_NETWORK_H_

#include <string>
#include <vector>

#include "svdistill/parameters.h"
#include "svdistill/rng.h"

namespace svdistill {

// A frame sequence is a T x D matrix, one feature vector per row.
using FeatureSequence = Matrix;

enum class Pooling { kMean, kLde };

// Configuration of the embedding network: a stack of 1-D convolutional
// blocks over time (context frames -> affine -> tanh), a temporal pooling
// layer (mean or learnable dictionary encoding), and two FC layers. The
// embedding is the output of fc1 after the nonlinearity; fc2 is the
// speaker classifier.
struct EncoderConfig {
  int input_dim = 30;
  std::vector<int> block_widths = {32, 32, 32};
  int conv_context = 3;  // odd; 1 = pure frame-wise
  Pooling pooling = Pooling::kLde;
  int lde_components = 4;
  int embedding_dim = 24;
  int num_classes = 2;

  void Validate() const;
  int PooledDim() const {
    const int h = block_widths.back();
    return pooling == Pooling::kLde ? lde_components * h : h;
  }
  bool operator==(const EncoderConfig &o) const = default;
};

// Activations retained by Forward for backpropagation.
struct ForwardTrace {
  Matrix input;                   // T x D
  std::vector<Matrix> block_out;  // T x H_k, post-tanh
  Matrix lde_weights;             // T x C soft assignments (LDE only)
  std::vector<double> lde_sums;   // per-component weight sums S_c
  std::vector<double> pooled;     // pooled dim P
  std::vector<double> embedding;  // E, fc1 post-tanh
  std::vector<double> logits;     // num_classes, fc2 linear output
};

// Fresh parameters: zero biases, gaussian weights with scale 1/sqrt(fan-in),
// LDE means N(0, 0.5) with unit initial scales. Group order is fixed:
// enc.block1..N, [pool.lde], fc1, fc2.
ParameterSet InitParameters(const EncoderConfig &cfg, Rng *rng);

ForwardTrace Forward(const ParameterSet &params, const EncoderConfig &cfg,
                     const FeatureSequence &x);

// LDE pooling: per-frame weights w_tc = softmax_c(-s_c |x_t - mu_c|^2),
// residuals e_c = sum_t w_tc (x_t - mu_c) / (sum_t w_tc + 1e-8), output is
// the concatenation of the e_c. Scales must be positive.
std::vector<double> LdePool(const Matrix &frames, const Matrix &means,
                            std::span<const double> scales);

// Accumulates dL/dW into grads for every group marked trainable in mask,
// given upstream gradients on the logits and (separately) on the embedding;
// the two paths are summed where they meet at fc1. Frozen groups receive
// zero accumulation. grads must share the structure of params (it may be
// params itself).
void Backward(const EncoderConfig &cfg, const ParameterSet &params,
              const ForwardTrace &trace, std::span<const double> d_logits,
              std::span<const double> d_embedding, const GroupMask &mask,
              ParameterSet *grads);

enum class LayerSelection { kLast2Fc, kLast2FcPoolLastBlock, kAll };

LayerSelection ParseLayerSelection(const std::string &name);
std::string LayerSelectionName(LayerSelection sel);

// last2fc -> fc1, fc2; last2fc+pool+lastblock additionally pool.lde (when
// present) and the last encoder block; all -> every group.
GroupMask SelectGroups(const ParameterSet &params, LayerSelection sel);

// New fc2 for new_num_classes (fresh seeded init); every other group is
// preserved bitwise. Updates cfg->num_classes.
ParameterSet ReplaceClassifier(const ParameterSet &params, EncoderConfig *cfg,
                               int new_num_classes, Rng *rng);

// Model file: see docs/file_formats.md. Round-trips bitwise.
void SaveModel(const std::string &path, const EncoderConfig &cfg,
               const ParameterSet &params);
struct ModelFile {
  EncoderConfig cfg;
  ParameterSet params;
};
// expected, when non-null, is checked against the stored config.
ModelFile LoadModel(const std::string &path,
                    const EncoderConfig *expected = nullptr);

}  // namespace svdistill

#endif  // SVDISTILL_NETWORK_H_
