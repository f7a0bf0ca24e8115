// svdistill/matrix.h

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

#ifndef SVDISTILL_MATRIX_H_
#define SVDISTILL_MATRIX_H_

#include <span>
#include <vector>

#include "svdistill/common.h"

namespace svdistill {

// Dense row-major matrix of doubles. All internal computation is done in
// 64-bit precision; corpus files quantize to 32-bit on disk.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * cols, 0.0) {
    SVD_CHECK(rows >= 0 && cols >= 0, "negative matrix dimension");
  }
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    SVD_CHECK(data_.size() == static_cast<size_t>(rows) * cols,
              "data length ", data_.size(), " != ", rows, "x", cols);
  }

  static Matrix Identity(int n);

  int NumRows() const { return rows_; }
  int NumCols() const { return cols_; }
  size_t Size() const { return data_.size(); }
  bool Empty() const { return data_.empty(); }
  bool SameDim(const Matrix &o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  double &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double *RowData(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double *RowData(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
  std::span<double> Row(int r) { return {RowData(r), static_cast<size_t>(cols_)}; }
  std::span<const double> Row(int r) const { return {RowData(r), static_cast<size_t>(cols_)}; }

  std::vector<double> &Data() { return data_; }
  const std::vector<double> &Data() const { return data_; }

  void SetZero();
  void Scale(double alpha);
  // this += alpha * other
  void AddScaled(const Matrix &other, double alpha);
  bool AllFinite() const;
  double FrobeniusNorm() const;

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

Matrix MatMul(const Matrix &a, const Matrix &b);
Matrix Transpose(const Matrix &m);
// y = m x for a row-major m and an x of length m.NumCols().
std::vector<double> MatVec(const Matrix &m, std::span<const double> x);
// y = m^T x for an x of length m.NumRows().
std::vector<double> MatTVec(const Matrix &m, std::span<const double> x);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> a);

// log softmax of one row of logits, computed with max subtraction so that
// exp of the result sums to 1 even for logits of magnitude ~1e3.
std::vector<double> LogSoftmax(std::span<const double> logits);
std::vector<double> Softmax(std::span<const double> logits);

// a.b / (|a||b|); throws on a zero-norm input instead of returning 0.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

}  // namespace svdistill

#endif  // SVDISTILL_MATRIX_H_
