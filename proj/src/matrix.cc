// svdistill/matrix.cc

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

#include "svdistill/matrix.h"

#include <algorithm>
#include <cmath>

namespace svdistill {

Matrix Matrix::Identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; i++) m(i, i) = 1.0;
  return m;
}

void Matrix::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

void Matrix::Scale(double alpha) {
  for (double &v : data_) v *= alpha;
}

void Matrix::AddScaled(const Matrix &other, double alpha) {
  SVD_CHECK(SameDim(other), "AddScaled dims ", rows_, "x", cols_, " vs ",
            other.rows_, "x", other.cols_);
  const double *src = other.data_.data();
  double *dst = data_.data();
  for (size_t i = 0; i < data_.size(); i++) dst[i] += alpha * src[i];
}

bool Matrix::AllFinite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Matrix::FrobeniusNorm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix MatMul(const Matrix &a, const Matrix &b) {
  SVD_CHECK(a.NumCols() == b.NumRows(), "matmul dims ", a.NumRows(), "x",
            a.NumCols(), " * ", b.NumRows(), "x", b.NumCols());
  Matrix out(a.NumRows(), b.NumCols());
  const int n = a.NumRows(), k = a.NumCols(), m = b.NumCols();
  // ikj order keeps the inner loop contiguous in b and out.
  for (int i = 0; i < n; i++) {
    double *out_row = out.RowData(i);
    const double *a_row = a.RowData(i);
    for (int p = 0; p < k; p++) {
      const double aip = a_row[p];
      if (aip == 0.0) continue;
      const double *b_row = b.RowData(p);
      for (int j = 0; j < m; j++) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Matrix Transpose(const Matrix &m) {
  Matrix out(m.NumCols(), m.NumRows());
  for (int i = 0; i < m.NumRows(); i++)
    for (int j = 0; j < m.NumCols(); j++) out(j, i) = m(i, j);
  return out;
}

std::vector<double> MatVec(const Matrix &m, std::span<const double> x) {
  SVD_CHECK(static_cast<int>(x.size()) == m.NumCols(), "matvec dims ",
            m.NumRows(), "x", m.NumCols(), " * ", x.size());
  std::vector<double> y(m.NumRows(), 0.0);
  for (int i = 0; i < m.NumRows(); i++) y[i] = Dot(m.Row(i), x);
  return y;
}

std::vector<double> MatTVec(const Matrix &m, std::span<const double> x) {
  SVD_CHECK(static_cast<int>(x.size()) == m.NumRows(), "mat^T vec dims ",
            m.NumRows(), "x", m.NumCols(), " vs ", x.size());
  std::vector<double> y(m.NumCols(), 0.0);
  for (int i = 0; i < m.NumRows(); i++) {
    const double xi = x[i];
    const double *row = m.RowData(i);
    for (int j = 0; j < m.NumCols(); j++) y[j] += xi * row[j];
  }
  return y;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  SVD_CHECK(a.size() == b.size(), "dot lengths ", a.size(), " vs ", b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); i++) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

std::vector<double> LogSoftmax(std::span<const double> logits) {
  SVD_CHECK(!logits.empty(), "log_softmax of empty row");
  double max = logits[0];
  for (double v : logits) max = std::max(max, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max);
  const double lse = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); i++) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out = LogSoftmax(logits);
  for (double &v : out) v = std::exp(v);
  return out;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  const double aa = Dot(a, a), bb = Dot(b, b);
  SVD_CHECK(aa > 0.0 && bb > 0.0, "cosine of zero-norm vector");
  // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): identical inputs then
  // give exactly 1 (IEEE sqrt(x * x) = x).
  double c = Dot(a, b) / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace svdistill
