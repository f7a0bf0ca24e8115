// svdistill/eigh.cc

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

#include "svdistill/eigh.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svdistill {

namespace {

double MaxAbs(const Matrix &m) {
  double v = 0.0;
  for (double x : m.Data()) v = std::max(v, std::fabs(x));
  return v;
}

double OffDiagonalNorm(const Matrix &a) {
  double s = 0.0;
  for (int i = 0; i < a.NumRows(); i++)
    for (int j = 0; j < a.NumCols(); j++)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EighResult EighSymmetric(const Matrix &s) {
  SVD_CHECK(s.NumRows() == s.NumCols(), "eigh of non-square matrix");
  const int n = s.NumRows();
  const double scale = std::max(MaxAbs(s), 1.0);
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++)
      SVD_CHECK(std::fabs(s(i, j) - s(j, i)) <= 1e-10 * scale,
                "asymmetric input at (", i, ",", j, ")");

  Matrix a = s;
  Matrix v = Matrix::Identity(n);
  const double tol = 1e-14 * std::max(a.FrobeniusNorm(), 1e-300);
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; sweep++) {
    if (OffDiagonalNorm(a) <= tol) break;
    for (int p = 0; p < n - 1; p++) {
      for (int q = p + 1; q < n; q++) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        // Rotate rows/columns p and q of a, and columns p and q of v.
        for (int k = 0; k < n; k++) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; k++) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; k++) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i) > a(j, j); });

  EighResult res;
  res.eigenvalues.resize(n);
  res.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; j++) {
    res.eigenvalues[j] = a(order[j], order[j]);
    for (int i = 0; i < n; i++) res.eigenvectors(i, j) = v(i, order[j]);
  }
  return res;
}

Matrix SymmetricFunction(const Matrix &s, double (*f)(double),
                         double eig_floor) {
  EighResult e = EighSymmetric(s);
  const int n = s.NumRows();
  Matrix out(n, n);
  for (int k = 0; k < n; k++) {
    const double fl = f(std::max(e.eigenvalues[k], eig_floor));
    for (int i = 0; i < n; i++) {
      const double vik = e.eigenvectors(i, k) * fl;
      for (int j = 0; j < n; j++) out(i, j) += vik * e.eigenvectors(j, k);
    }
  }
  return out;
}

Matrix InverseSqrtPsd(const Matrix &s, double eig_floor) {
  return SymmetricFunction(
      s, [](double x) { return 1.0 / std::sqrt(x); }, eig_floor);
}

Matrix InversePsd(const Matrix &s, double eig_floor) {
  return SymmetricFunction(s, [](double x) { return 1.0 / x; }, eig_floor);
}

double LogDetPsd(const Matrix &s) {
  EighResult e = EighSymmetric(s);
  double ld = 0.0;
  for (double lam : e.eigenvalues) {
    SVD_CHECK(lam > 0.0, "log-det of non positive-definite matrix");
    ld += std::log(lam);
  }
  return ld;
}

}  // namespace svdistill
