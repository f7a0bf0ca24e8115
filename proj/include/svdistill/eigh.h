// svdistill/eigh.h

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

#ifndef SVDISTILL_EIGH_H_
#define SVDISTILL_EIGH_H_

#include <vector>

#include "svdistill/matrix.h"

namespace svdistill {

struct EighResult {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // columns, aligned with eigenvalues
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. Input must be
// symmetric within 1e-10 (relative to its largest entry). Adequate for the
// dimensions used here (<= 64).
EighResult EighSymmetric(const Matrix &s);

// f(S) = V f(L) V^T with eigenvalues floored at eig_floor first. Used for
// inverse square roots (whitening) and inverses of scatter matrices.
Matrix SymmetricFunction(const Matrix &s, double (*f)(double),
                         double eig_floor);
Matrix InverseSqrtPsd(const Matrix &s, double eig_floor);
Matrix InversePsd(const Matrix &s, double eig_floor);
double LogDetPsd(const Matrix &s);

}  // namespace svdistill

#endif  // SVDISTILL_EIGH_H_
