// svdistill/regularizers.cc

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

#include "svdistill/regularizers.h"

#include <algorithm>
#include <cmath>

namespace svdistill {

bool SpReference::IsShared(const std::string &group) const {
  return std::find(shared_groups.begin(), shared_groups.end(), group) !=
         shared_groups.end();
}

bool SpReference::IsModified(const std::string &group) const {
  return std::find(modified_groups.begin(), modified_groups.end(), group) !=
         modified_groups.end();
}

void SpReference::Validate(const ParameterSet &live) const {
  for (const std::string &g : shared_groups) {
    SVD_CHECK(!IsModified(g), "group ", g, " is both shared and modified");
    const ParamGroup &a = live.Group(g);
    const ParamGroup &b = snapshot.Group(g);
    SVD_CHECK(a.values.size() == b.values.size(), "snapshot group ", g,
              " value count mismatch");
    for (size_t j = 0; j < a.values.size(); j++)
      SVD_CHECK(a.values[j].SameDim(b.values[j]), "snapshot shape mismatch in ",
                g, "[", a.value_names[j], "]");
  }
}

RegKind ParseRegKind(const std::string &name) {
  if (name == "none") return RegKind::kNone;
  if (name == "l2") return RegKind::kL2;
  if (name == "l2sp") return RegKind::kL2Sp;
  if (name == "split_l2sp") return RegKind::kSplitL2Sp;
  if (name == "l1sp") return RegKind::kL1Sp;
  throw ConfigError("unknown regularizer: " + name);
}

std::string RegKindName(RegKind kind) {
  switch (kind) {
    case RegKind::kNone: return "none";
    case RegKind::kL2: return "l2";
    case RegKind::kL2Sp: return "l2sp";
    case RegKind::kSplitL2Sp: return "split_l2sp";
    case RegKind::kL1Sp: return "l1sp";
  }
  return "?";
}

namespace {

bool Penalized(const ParamGroup &g, size_t j, bool include_biases) {
  return include_biases || g.value_names[j] != "bias";
}

// value += alpha |w|^2, grad += 2 alpha w
double L2TowardZero(ParamGroup *g, double alpha, bool include_biases) {
  double value = 0.0;
  for (size_t j = 0; j < g->values.size(); j++) {
    if (!Penalized(*g, j, include_biases)) continue;
    const std::vector<double> &w = g->values[j].Data();
    std::vector<double> &grad = g->grads[j].Data();
    for (size_t i = 0; i < w.size(); i++) {
      value += w[i] * w[i];
      grad[i] += 2.0 * alpha * w[i];
    }
  }
  return alpha * value;
}

// value += alpha |w - w0|^2, grad += 2 alpha (w - w0)
double L2TowardRef(ParamGroup *g, const ParamGroup &ref, double alpha,
                   bool include_biases) {
  double value = 0.0;
  for (size_t j = 0; j < g->values.size(); j++) {
    if (!Penalized(*g, j, include_biases)) continue;
    SVD_CHECK(g->values[j].SameDim(ref.values[j]),
              "shape mismatch with snapshot in group ", g->name);
    const std::vector<double> &w = g->values[j].Data();
    const std::vector<double> &w0 = ref.values[j].Data();
    std::vector<double> &grad = g->grads[j].Data();
    for (size_t i = 0; i < w.size(); i++) {
      const double d = w[i] - w0[i];
      value += d * d;
      grad[i] += 2.0 * alpha * d;
    }
  }
  return alpha * value;
}

// value += alpha |w - w0|_1, subgrad += alpha sign(w - w0), sign(0) = 0
double L1TowardRef(ParamGroup *g, const ParamGroup &ref, double alpha,
                   bool include_biases) {
  double value = 0.0;
  for (size_t j = 0; j < g->values.size(); j++) {
    if (!Penalized(*g, j, include_biases)) continue;
    SVD_CHECK(g->values[j].SameDim(ref.values[j]),
              "shape mismatch with snapshot in group ", g->name);
    const std::vector<double> &w = g->values[j].Data();
    const std::vector<double> &w0 = ref.values[j].Data();
    std::vector<double> &grad = g->grads[j].Data();
    for (size_t i = 0; i < w.size(); i++) {
      const double d = w[i] - w0[i];
      value += std::fabs(d);
      grad[i] += alpha * ((d > 0.0) - (d < 0.0));
    }
  }
  return alpha * value;
}

}  // namespace

double L2NormPenalty(ParameterSet *params, const GroupMask &mask,
                     double alpha, bool include_biases) {
  SVD_CHECK(alpha >= 0.0, "negative alpha ", alpha);
  double value = 0.0;
  for (int i = 0; i < params->NumGroups(); i++)
    if (mask[i]) value += L2TowardZero(&params->Group(i), alpha,
                                       include_biases);
  return value;
}

double L2SpPenalty(ParameterSet *params, const GroupMask &mask,
                   const SpReference &ref, double alpha, bool include_biases) {
  SVD_CHECK(alpha >= 0.0, "negative alpha ", alpha);
  double value = 0.0;
  for (int i = 0; i < params->NumGroups(); i++) {
    if (!mask[i]) continue;
    ParamGroup &g = params->Group(i);
    value += L2TowardRef(&g, ref.snapshot.Group(g.name), alpha,
                         include_biases);
  }
  return value;
}

double SplitL2SpPenalty(ParameterSet *params, const GroupMask &mask,
                        const SpReference &ref, double alpha, double beta,
                        bool include_biases) {
  SVD_CHECK(alpha >= 0.0 && beta >= 0.0, "negative penalty weight");
  ref.Validate(*params);
  double value = 0.0;
  for (int i = 0; i < params->NumGroups(); i++) {
    if (!mask[i]) continue;
    ParamGroup &g = params->Group(i);
    if (ref.IsModified(g.name)) {
      value += L2TowardZero(&g, beta, include_biases);
    } else {
      SVD_CHECK(ref.IsShared(g.name), "trainable group ", g.name,
                " is neither shared nor modified");
      value += L2TowardRef(&g, ref.snapshot.Group(g.name), alpha,
                           include_biases);
    }
  }
  return value;
}

double L1SpPenalty(ParameterSet *params, const GroupMask &mask,
                   const SpReference &ref, double alpha, double beta,
                   bool include_biases) {
  SVD_CHECK(alpha >= 0.0 && beta >= 0.0, "negative penalty weight");
  ref.Validate(*params);
  double value = 0.0;
  for (int i = 0; i < params->NumGroups(); i++) {
    if (!mask[i]) continue;
    ParamGroup &g = params->Group(i);
    if (ref.IsModified(g.name)) {
      value += L2TowardZero(&g, beta, include_biases);
    } else {
      SVD_CHECK(ref.IsShared(g.name), "trainable group ", g.name,
                " is neither shared nor modified");
      value += L1TowardRef(&g, ref.snapshot.Group(g.name), alpha,
                           include_biases);
    }
  }
  return value;
}

double ApplyPenalty(RegKind kind, ParameterSet *params, const GroupMask &mask,
                    const SpReference *ref, double alpha, double beta,
                    bool include_biases) {
  switch (kind) {
    case RegKind::kNone:
      return 0.0;
    case RegKind::kL2:
      return L2NormPenalty(params, mask, alpha, include_biases);
    case RegKind::kL2Sp:
      SVD_CHECK(ref != nullptr, "SP penalty without a reference");
      return L2SpPenalty(params, mask, *ref, alpha, include_biases);
    case RegKind::kSplitL2Sp:
      SVD_CHECK(ref != nullptr, "SP penalty without a reference");
      return SplitL2SpPenalty(params, mask, *ref, alpha, beta,
                              include_biases);
    case RegKind::kL1Sp:
      SVD_CHECK(ref != nullptr, "SP penalty without a reference");
      return L1SpPenalty(params, mask, *ref, alpha, beta, include_biases);
  }
  return 0.0;
}

}  // namespace svdistill
