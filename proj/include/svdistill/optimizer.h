// svdistill/optimizer.h

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

#ifndef SVDISTILL_OPTIMIZER_H_
#define SVDISTILL_OPTIMIZER_H_

#include <cstdint>
#include <functional>

#include "svdistill/parameters.h"

namespace svdistill {

// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
class AdamState {
 public:
  explicit AdamState(const ParameterSet &params);

  // One update from params->grads on the trainable groups. Frozen groups
  // keep their values, moments, and grads untouched. lr_for_group allows
  // per-group learning rates (fine-tuning uses a higher rate on the
  // replaced classifier).
  void Step(ParameterSet *params, const GroupMask &mask,
            const std::function<double(const std::string &)> &lr_for_group);
  void Step(ParameterSet *params, const GroupMask &mask, double lr);

  int64_t step_count() const { return step_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  std::vector<std::vector<Matrix>> m_, v_;
  int64_t step_ = 0;
};

// lr = factor * model_size^-0.5 * min(step^-0.5, step * warmup^-1.5);
// peaks at step = warmup. step must be >= 1.
double NoamLr(int64_t step, double model_size, int64_t warmup, double factor);

}  // namespace svdistill

#endif  // SVDISTILL_OPTIMIZER_H_
