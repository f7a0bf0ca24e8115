// svdistill/parameters.h

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

#ifndef SVDISTILL_PARAMETERS_H_
#define SVDISTILL_PARAMETERS_H_

#include <string>
#include <vector>

#include "svdistill/matrix.h"

namespace svdistill {

// One named parameter group ("enc.block1", "pool.lde", "fc1", ...). Values
// and grads are parallel lists of shape-matched matrices; value_names tag
// each matrix ("weight"/"bias", or "means"/"log_scales" for the LDE group)
// so penalties can exclude biases when configured to.
struct ParamGroup {
  std::string name;
  std::vector<std::string> value_names;
  std::vector<Matrix> values;
  std::vector<Matrix> grads;

  void AddValue(const std::string &value_name, Matrix m) {
    value_names.push_back(value_name);
    grads.emplace_back(m.NumRows(), m.NumCols());
    values.push_back(std::move(m));
  }
};

// Ordered collection of parameter groups. Copying a ParameterSet yields a
// deep, independent copy; Snapshot() is that copy held immutable by the
// caller (the SP reference W0).
class ParameterSet {
 public:
  ParamGroup &AddGroup(const std::string &name);
  int NumGroups() const { return static_cast<int>(groups_.size()); }
  ParamGroup &Group(int i) { return groups_[i]; }
  const ParamGroup &Group(int i) const { return groups_[i]; }
  int FindGroup(const std::string &name) const;  // -1 if absent
  ParamGroup &Group(const std::string &name);
  const ParamGroup &Group(const std::string &name) const;
  bool HasGroup(const std::string &name) const { return FindGroup(name) >= 0; }

  void ZeroGrads();
  void ScaleGrads(double alpha);
  ParameterSet Snapshot() const { return *this; }
  // Total number of scalar parameter values.
  size_t NumParams() const;
  bool SameStructure(const ParameterSet &o) const;

 private:
  std::vector<ParamGroup> groups_;
};

// Trainable-group mask aligned with ParameterSet group order.
using GroupMask = std::vector<bool>;

GroupMask FullMask(const ParameterSet &params);

}  // namespace svdistill

#endif  // SVDISTILL_PARAMETERS_H_
