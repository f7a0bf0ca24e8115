// svdistill/optimizer.cc

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

#include "svdistill/optimizer.h"

#include <cmath>

namespace svdistill {

AdamState::AdamState(const ParameterSet &params) {
  m_.resize(params.NumGroups());
  v_.resize(params.NumGroups());
  for (int i = 0; i < params.NumGroups(); i++) {
    const ParamGroup &g = params.Group(i);
    for (const Matrix &val : g.values) {
      m_[i].emplace_back(val.NumRows(), val.NumCols());
      v_[i].emplace_back(val.NumRows(), val.NumCols());
    }
  }
}

void AdamState::Step(
    ParameterSet *params, const GroupMask &mask,
    const std::function<double(const std::string &)> &lr_for_group) {
  SVD_CHECK(mask.size() == static_cast<size_t>(params->NumGroups()),
            "mask size mismatch");
  SVD_CHECK(m_.size() == static_cast<size_t>(params->NumGroups()),
            "optimizer built for a different parameter set");
  step_++;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (int i = 0; i < params->NumGroups(); i++) {
    if (!mask[i]) continue;
    ParamGroup &g = params->Group(i);
    const double lr = lr_for_group(g.name);
    for (size_t j = 0; j < g.values.size(); j++) {
      SVD_CHECK(m_[i][j].SameDim(g.values[j]), "moment shape mismatch in ",
                g.name);
      std::vector<double> &w = g.values[j].Data();
      const std::vector<double> &grad = g.grads[j].Data();
      std::vector<double> &m = m_[i][j].Data();
      std::vector<double> &v = v_[i][j].Data();
      for (size_t p = 0; p < w.size(); p++) {
        m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * grad[p];
        v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * grad[p] * grad[p];
        const double mhat = m[p] / bc1;
        const double vhat = v[p] / bc2;
        w[p] -= lr * mhat / (std::sqrt(vhat) + kEpsilon);
      }
    }
  }
}

void AdamState::Step(ParameterSet *params, const GroupMask &mask, double lr) {
  Step(params, mask, [lr](const std::string &) { return lr; });
}

double NoamLr(int64_t step, double model_size, int64_t warmup, double factor) {
  SVD_CHECK(step >= 1, "Noam lr at step ", step);
  SVD_CHECK(warmup >= 1, "Noam warmup ", warmup);
  SVD_CHECK(model_size > 0.0, "Noam model size ", model_size);
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return factor / std::sqrt(model_size) *
         std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

}  // namespace svdistill
