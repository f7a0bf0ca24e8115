// svdistill/parameters.cc

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

#include "svdistill/parameters.h"

namespace svdistill {

ParamGroup &ParameterSet::AddGroup(const std::string &name) {
  SVD_CHECK(!HasGroup(name), "duplicate parameter group ", name);
  groups_.emplace_back();
  groups_.back().name = name;
  return groups_.back();
}

int ParameterSet::FindGroup(const std::string &name) const {
  for (size_t i = 0; i < groups_.size(); i++)
    if (groups_[i].name == name) return static_cast<int>(i);
  return -1;
}

ParamGroup &ParameterSet::Group(const std::string &name) {
  const int i = FindGroup(name);
  SVD_CHECK(i >= 0, "no parameter group named ", name);
  return groups_[i];
}

const ParamGroup &ParameterSet::Group(const std::string &name) const {
  const int i = FindGroup(name);
  SVD_CHECK(i >= 0, "no parameter group named ", name);
  return groups_[i];
}

void ParameterSet::ZeroGrads() {
  for (ParamGroup &g : groups_)
    for (Matrix &m : g.grads) m.SetZero();
}

void ParameterSet::ScaleGrads(double alpha) {
  for (ParamGroup &g : groups_)
    for (Matrix &m : g.grads) m.Scale(alpha);
}

size_t ParameterSet::NumParams() const {
  size_t n = 0;
  for (const ParamGroup &g : groups_)
    for (const Matrix &m : g.values) n += m.Size();
  return n;
}

bool ParameterSet::SameStructure(const ParameterSet &o) const {
  if (groups_.size() != o.groups_.size()) return false;
  for (size_t i = 0; i < groups_.size(); i++) {
    const ParamGroup &a = groups_[i], &b = o.groups_[i];
    if (a.name != b.name || a.values.size() != b.values.size()) return false;
    for (size_t j = 0; j < a.values.size(); j++)
      if (!a.values[j].SameDim(b.values[j]) ||
          a.value_names[j] != b.value_names[j])
        return false;
  }
  return true;
}

GroupMask FullMask(const ParameterSet &params) {
  return GroupMask(params.NumGroups(), true);
}

}  // namespace svdistill
