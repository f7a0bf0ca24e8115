// svdistill/regularizers.h

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

#ifndef SVDISTILL_REGULARIZERS_H_
#define SVDISTILL_REGULARIZERS_H_

#include <string>
#include <vector>

#include "svdistill/parameters.h"

namespace svdistill {

// Frozen start-point reference for the SP penalties: an immutable snapshot
// W0 plus the partition of groups into the shared architecture W_s and the
// modified (replaced) architecture W_m.
struct SpReference {
  ParameterSet snapshot;
  std::vector<std::string> shared_groups;
  std::vector<std::string> modified_groups;

  bool IsShared(const std::string &group) const;
  bool IsModified(const std::string &group) const;
  // Checks the shared/modified partition is disjoint and that snapshot
  // shapes match the live model on shared groups.
  void Validate(const ParameterSet &live) const;
};

enum class RegKind { kNone, kL2, kL2Sp, kSplitL2Sp, kL1Sp };

RegKind ParseRegKind(const std::string &name);
std::string RegKindName(RegKind kind);

// All penalties run over the groups marked trainable in mask (frozen groups
// contribute neither value nor gradient), skip matrices tagged "bias" when
// include_biases is false, accumulate their gradient contribution into
// params->grads, and return the penalty value.

// alpha |W|_2^2, gradient 2 alpha W.
double L2NormPenalty(ParameterSet *params, const GroupMask &mask,
                     double alpha, bool include_biases);

// alpha |W - W0|_2^2 over all trainable groups, gradient 2 alpha (W - W0).
double L2SpPenalty(ParameterSet *params, const GroupMask &mask,
                   const SpReference &ref, double alpha, bool include_biases);

// alpha |W_s - W_s0|_2^2 + beta |W_m|_2^2.
double SplitL2SpPenalty(ParameterSet *params, const GroupMask &mask,
                        const SpReference &ref, double alpha, double beta,
                        bool include_biases);

// alpha |W_s - W_s0|_1 + beta |W_m|_2^2, subgradient alpha sign(W_s - W_s0)
// with sign(0) = 0.
double L1SpPenalty(ParameterSet *params, const GroupMask &mask,
                   const SpReference &ref, double alpha, double beta,
                   bool include_biases);

// Dispatch by kind; kNone returns 0. ref may be null only for kNone / kL2.
double ApplyPenalty(RegKind kind, ParameterSet *params, const GroupMask &mask,
                    const SpReference *ref, double alpha, double beta,
                    bool include_biases);

}  // namespace svdistill

#endif  // SVDISTILL_REGULARIZERS_H_
