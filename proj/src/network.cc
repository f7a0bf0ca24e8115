// svdistill/network.cc

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

#include "svdistill/network.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace svdistill {

namespace {

constexpr double kLdeDelta = 1e-8;
constexpr char kModelMagic[4] = {'S', 'V', 'D', 'M'};
constexpr uint32_t kModelVersion = 1;

std::string BlockName(int k) { return "enc.block" + std::to_string(k + 1); }

// Replication-padded frame context: row t is the concatenation of
// in[clamp(t-r)] .. in[clamp(t+r)].
Matrix FrameContext(const Matrix &in, int context) {
  const int t_len = in.NumRows(), h = in.NumCols(), r = (context - 1) / 2;
  Matrix ctx(t_len, context * h);
  for (int t = 0; t < t_len; t++) {
    double *out = ctx.RowData(t);
    for (int o = -r; o <= r; o++) {
      const int src = std::clamp(t + o, 0, t_len - 1);
      std::memcpy(out + (o + r) * h, in.RowData(src), h * sizeof(double));
    }
  }
  return ctx;
}

// pre = ctx W^T + b, out = tanh(pre); out doubles as the stored activation
// (tanh' is recovered from the output).
Matrix BlockForward(const Matrix &ctx, const Matrix &weight,
                    const Matrix &bias) {
  Matrix out = MatMul(ctx, Transpose(weight));
  for (int t = 0; t < out.NumRows(); t++) {
    double *row = out.RowData(t);
    for (int j = 0; j < out.NumCols(); j++)
      row[j] = std::tanh(row[j] + bias(0, j));
  }
  return out;
}

std::vector<double> LdeScales(const ParamGroup &lde) {
  const Matrix &log_scales = lde.values[1];
  std::vector<double> s(log_scales.NumCols());
  for (size_t c = 0; c < s.size(); c++) s[c] = std::exp(log_scales(0, c));
  return s;
}

struct LdeForward {
  Matrix weights;             // T x C
  std::vector<double> sums;   // C
  std::vector<double> pooled; // C*H
};

LdeForward LdePoolTraced(const Matrix &frames, const Matrix &means,
                         std::span<const double> scales) {
  const int t_len = frames.NumRows(), h = frames.NumCols();
  const int c_num = means.NumRows();
  SVD_CHECK(c_num >= 1, "LDE needs at least one component");
  SVD_CHECK(means.NumCols() == h, "LDE mean dim ", means.NumCols(), " vs ", h);
  SVD_CHECK(static_cast<int>(scales.size()) == c_num, "LDE scale count");
  for (double s : scales) SVD_CHECK(s > 0.0, "nonpositive LDE scale ", s);

  LdeForward f;
  f.weights = Matrix(t_len, c_num);
  f.sums.assign(c_num, 0.0);
  f.pooled.assign(static_cast<size_t>(c_num) * h, 0.0);

  std::vector<double> logits(c_num);
  for (int t = 0; t < t_len; t++) {
    const double *x = frames.RowData(t);
    for (int c = 0; c < c_num; c++) {
      double d = 0.0;
      const double *mu = means.RowData(c);
      for (int j = 0; j < h; j++) {
        const double r = x[j] - mu[j];
        d += r * r;
      }
      logits[c] = -scales[c] * d;
    }
    std::vector<double> w = Softmax(logits);
    for (int c = 0; c < c_num; c++) {
      f.weights(t, c) = w[c];
      f.sums[c] += w[c];
    }
  }
  for (int c = 0; c < c_num; c++) {
    const double *mu = means.RowData(c);
    double *e = f.pooled.data() + static_cast<size_t>(c) * h;
    for (int t = 0; t < t_len; t++) {
      const double w = f.weights(t, c);
      const double *x = frames.RowData(t);
      for (int j = 0; j < h; j++) e[j] += w * (x[j] - mu[j]);
    }
    const double denom = f.sums[c] + kLdeDelta;
    for (int j = 0; j < h; j++) e[j] /= denom;
  }
  return f;
}

void WriteBytes(std::ostream &os, const void *p, size_t n) {
  os.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
}

void WriteU32(std::ostream &os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; i++) b[i] = (v >> (8 * i)) & 0xff;
  WriteBytes(os, b, 4);
}

void WriteI32(std::ostream &os, int32_t v) {
  WriteU32(os, static_cast<uint32_t>(v));
}

void WriteF64(std::ostream &os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; i++) b[i] = (v >> (8 * i)) & 0xff;
  WriteBytes(os, b, 8);
}

void WriteString(std::ostream &os, const std::string &s) {
  WriteU32(os, static_cast<uint32_t>(s.size()));
  WriteBytes(os, s.data(), s.size());
}

void ReadBytes(std::istream &is, void *p, size_t n, const char *what) {
  is.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n)
    throw DataError(std::string("corrupt model file: truncated ") + what);
}

uint32_t ReadU32(std::istream &is, const char *what) {
  unsigned char b[4];
  ReadBytes(is, b, 4, what);
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

int32_t ReadI32(std::istream &is, const char *what) {
  return static_cast<int32_t>(ReadU32(is, what));
}

double ReadF64(std::istream &is, const char *what) {
  unsigned char b[8];
  ReadBytes(is, b, 8, what);
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::string ReadString(std::istream &is, const char *what) {
  const uint32_t n = ReadU32(is, what);
  SVD_CHECK(n <= 1u << 20, "corrupt model file: string length ", n);
  std::string s(n, '\0');
  ReadBytes(is, s.data(), n, what);
  return s;
}

}  // namespace

void EncoderConfig::Validate() const {
  SVD_CHECK(input_dim >= 1, "input_dim ", input_dim);
  SVD_CHECK(!block_widths.empty(), "no encoder blocks");
  for (int w : block_widths) SVD_CHECK(w >= 1, "block width ", w);
  SVD_CHECK(conv_context >= 1 && conv_context % 2 == 1, "conv_context ",
            conv_context, " must be odd and positive");
  if (pooling == Pooling::kLde)
    SVD_CHECK(lde_components >= 1, "lde_components ", lde_components);
  SVD_CHECK(embedding_dim >= 1, "embedding_dim ", embedding_dim);
  SVD_CHECK(num_classes >= 2, "num_classes ", num_classes);
}

ParameterSet InitParameters(const EncoderConfig &cfg, Rng *rng) {
  cfg.Validate();
  ParameterSet params;
  int in_dim = cfg.input_dim;
  for (size_t k = 0; k < cfg.block_widths.size(); k++) {
    const int out_dim = cfg.block_widths[k];
    const int fan_in = cfg.conv_context * in_dim;
    ParamGroup &g = params.AddGroup(BlockName(static_cast<int>(k)));
    g.AddValue("weight", GaussianMatrix(rng, 0.0, 1.0 / std::sqrt(fan_in),
                                        out_dim, fan_in));
    g.AddValue("bias", Matrix(1, out_dim));
    in_dim = out_dim;
  }
  if (cfg.pooling == Pooling::kLde) {
    ParamGroup &g = params.AddGroup("pool.lde");
    g.AddValue("means",
               GaussianMatrix(rng, 0.0, 0.5, cfg.lde_components, in_dim));
    g.AddValue("log_scales", Matrix(1, cfg.lde_components));
  }
  const int pooled = cfg.PooledDim();
  {
    ParamGroup &g = params.AddGroup("fc1");
    g.AddValue("weight", GaussianMatrix(rng, 0.0, 1.0 / std::sqrt(pooled),
                                        cfg.embedding_dim, pooled));
    g.AddValue("bias", Matrix(1, cfg.embedding_dim));
  }
  {
    ParamGroup &g = params.AddGroup("fc2");
    g.AddValue("weight",
               GaussianMatrix(rng, 0.0, 1.0 / std::sqrt(cfg.embedding_dim),
                              cfg.num_classes, cfg.embedding_dim));
    g.AddValue("bias", Matrix(1, cfg.num_classes));
  }
  return params;
}

std::vector<double> LdePool(const Matrix &frames, const Matrix &means,
                            std::span<const double> scales) {
  return LdePoolTraced(frames, means, scales).pooled;
}

ForwardTrace Forward(const ParameterSet &params, const EncoderConfig &cfg,
                     const FeatureSequence &x) {
  cfg.Validate();
  SVD_CHECK(x.NumCols() == cfg.input_dim, "input dim ", x.NumCols(), " vs ",
            cfg.input_dim);
  SVD_CHECK(x.NumRows() >= cfg.conv_context, "sequence of ", x.NumRows(),
            " frames shorter than context ", cfg.conv_context);

  ForwardTrace trace;
  trace.input = x;
  const Matrix *cur = &trace.input;
  for (size_t k = 0; k < cfg.block_widths.size(); k++) {
    const ParamGroup &g = params.Group(BlockName(static_cast<int>(k)));
    Matrix ctx = FrameContext(*cur, cfg.conv_context);
    trace.block_out.push_back(BlockForward(ctx, g.values[0], g.values[1]));
    cur = &trace.block_out.back();
  }

  if (cfg.pooling == Pooling::kMean) {
    const Matrix &top = *cur;
    trace.pooled.assign(top.NumCols(), 0.0);
    for (int t = 0; t < top.NumRows(); t++)
      for (int j = 0; j < top.NumCols(); j++) trace.pooled[j] += top(t, j);
    for (double &v : trace.pooled) v /= top.NumRows();
  } else {
    const ParamGroup &g = params.Group("pool.lde");
    LdeForward f = LdePoolTraced(*cur, g.values[0], LdeScales(g));
    trace.lde_weights = std::move(f.weights);
    trace.lde_sums = std::move(f.sums);
    trace.pooled = std::move(f.pooled);
  }

  const ParamGroup &fc1 = params.Group("fc1");
  std::vector<double> pre = MatVec(fc1.values[0], trace.pooled);
  trace.embedding.resize(pre.size());
  for (size_t i = 0; i < pre.size(); i++)
    trace.embedding[i] = std::tanh(pre[i] + fc1.values[1](0, i));

  const ParamGroup &fc2 = params.Group("fc2");
  trace.logits = MatVec(fc2.values[0], trace.embedding);
  for (size_t i = 0; i < trace.logits.size(); i++)
    trace.logits[i] += fc2.values[1](0, i);
  return trace;
}

namespace {

// d_frames gets the gradient w.r.t. the pooled frames; LDE parameter
// gradients go to grad_means / grad_log_scales when accumulate_params.
void LdeBackward(const Matrix &frames, const Matrix &means,
                 std::span<const double> scales, const Matrix &weights,
                 std::span<const double> sums, std::span<const double> pooled,
                 std::span<const double> d_pooled, Matrix *d_frames,
                 bool accumulate_params, Matrix *grad_means,
                 Matrix *grad_log_scales) {
  const int t_len = frames.NumRows(), h = frames.NumCols();
  const int c_num = means.NumRows();
  std::vector<double> u(c_num), v(c_num), r(h);
  std::vector<double> d_scales(c_num, 0.0);
  for (int t = 0; t < t_len; t++) {
    const double *x = frames.RowData(t);
    // u_tc = (g_c . r_tc - g_c . e_c) / (S_c + delta)
    double uw = 0.0;
    for (int c = 0; c < c_num; c++) {
      const double *mu = means.RowData(c);
      const double *g = d_pooled.data() + static_cast<size_t>(c) * h;
      const double *e = pooled.data() + static_cast<size_t>(c) * h;
      double gr = 0.0, ge = 0.0;
      for (int j = 0; j < h; j++) {
        gr += g[j] * (x[j] - mu[j]);
        ge += g[j] * e[j];
      }
      u[c] = (gr - ge) / (sums[c] + kLdeDelta);
      uw += u[c] * weights(t, c);
    }
    // softmax backward, then through the scaled negative distances
    for (int c = 0; c < c_num; c++) v[c] = weights(t, c) * (u[c] - uw);
    for (int c = 0; c < c_num; c++) {
      const double *mu = means.RowData(c);
      const double *g = d_pooled.data() + static_cast<size_t>(c) * h;
      const double w_over_d = weights(t, c) / (sums[c] + kLdeDelta);
      const double rv = -2.0 * scales[c] * v[c];
      double dist = 0.0;
      double *dx = d_frames ? d_frames->RowData(t) : nullptr;
      double *dmu = accumulate_params ? grad_means->RowData(c) : nullptr;
      for (int j = 0; j < h; j++) {
        const double rj = x[j] - mu[j];
        dist += rj * rj;
        const double contrib = w_over_d * g[j] + rv * rj;
        if (dx) dx[j] += contrib;
        if (dmu) dmu[j] -= contrib;
      }
      d_scales[c] -= v[c] * dist;
    }
  }
  if (accumulate_params)
    for (int c = 0; c < c_num; c++)
      (*grad_log_scales)(0, c) += d_scales[c] * scales[c];
}

}  // namespace

void Backward(const EncoderConfig &cfg, const ParameterSet &params,
              const ForwardTrace &trace, std::span<const double> d_logits,
              std::span<const double> d_embedding, const GroupMask &mask,
              ParameterSet *grads) {
  SVD_CHECK(params.SameStructure(*grads), "params/grads structure mismatch");
  SVD_CHECK(mask.size() == static_cast<size_t>(params.NumGroups()),
            "mask size ", mask.size(), " vs ", params.NumGroups());
  SVD_CHECK(d_logits.size() == trace.logits.size(), "d_logits length");
  SVD_CHECK(d_embedding.size() == trace.embedding.size(),
            "d_embedding length");
  const int n_blocks = static_cast<int>(cfg.block_widths.size());
  SVD_CHECK(static_cast<int>(trace.block_out.size()) == n_blocks &&
                trace.embedding.size() ==
                    static_cast<size_t>(cfg.embedding_dim),
            "trace does not match config");

  auto trainable = [&](const std::string &name) {
    const int i = params.FindGroup(name);
    return i >= 0 && mask[i];
  };

  // fc2: logits = W e + b
  const ParamGroup &fc2 = params.Group("fc2");
  std::vector<double> d_emb = MatTVec(fc2.values[0], d_logits);
  for (size_t i = 0; i < d_emb.size(); i++) d_emb[i] += d_embedding[i];
  if (trainable("fc2")) {
    ParamGroup &g = grads->Group("fc2");
    Matrix &dw = g.grads[0];
    for (int i = 0; i < dw.NumRows(); i++) {
      const double di = d_logits[i];
      if (di == 0.0) continue;
      double *row = dw.RowData(i);
      for (int j = 0; j < dw.NumCols(); j++) row[j] += di * trace.embedding[j];
      g.grads[1](0, i) += di;
    }
    // bias grads for zero d_logit entries are zero; nothing to add
  }

  // fc1: e = tanh(W p + b)
  const ParamGroup &fc1 = params.Group("fc1");
  std::vector<double> d_pre(d_emb.size());
  for (size_t i = 0; i < d_emb.size(); i++)
    d_pre[i] = d_emb[i] * (1.0 - trace.embedding[i] * trace.embedding[i]);
  if (trainable("fc1")) {
    ParamGroup &g = grads->Group("fc1");
    Matrix &dw = g.grads[0];
    for (int i = 0; i < dw.NumRows(); i++) {
      const double di = d_pre[i];
      double *row = dw.RowData(i);
      for (int j = 0; j < dw.NumCols(); j++) row[j] += di * trace.pooled[j];
      g.grads[1](0, i) += di;
    }
  }

  // Lowest encoder block whose gradient is needed; everything below is
  // frozen and never visited.
  int lowest_block = n_blocks;
  for (int k = 0; k < n_blocks; k++)
    if (trainable(BlockName(k))) {
      lowest_block = k;
      break;
    }
  const bool need_pool = trainable("pool.lde") || lowest_block < n_blocks;
  if (!need_pool) return;

  std::vector<double> d_pooled = MatTVec(fc1.values[0], d_pre);

  const Matrix &top = trace.block_out.back();
  Matrix d_frames(top.NumRows(), top.NumCols());
  if (cfg.pooling == Pooling::kMean) {
    const double inv_t = 1.0 / top.NumRows();
    for (int t = 0; t < top.NumRows(); t++)
      for (int j = 0; j < top.NumCols(); j++)
        d_frames(t, j) = d_pooled[j] * inv_t;
  } else {
    const ParamGroup &lde = params.Group("pool.lde");
    const bool lde_trainable = trainable("pool.lde");
    ParamGroup *gsink = lde_trainable ? &grads->Group("pool.lde") : nullptr;
    LdeBackward(top, lde.values[0], LdeScales(lde), trace.lde_weights,
                trace.lde_sums, trace.pooled, d_pooled,
                lowest_block < n_blocks ? &d_frames : nullptr, lde_trainable,
                gsink ? &gsink->grads[0] : nullptr,
                gsink ? &gsink->grads[1] : nullptr);
  }

  // Encoder blocks, top down to the lowest trainable one.
  const int r = (cfg.conv_context - 1) / 2;
  for (int k = n_blocks - 1; k >= lowest_block; k--) {
    const Matrix &out = trace.block_out[k];
    const Matrix &in = k == 0 ? trace.input : trace.block_out[k - 1];
    Matrix d_pre_blk(out.NumRows(), out.NumCols());
    for (int t = 0; t < out.NumRows(); t++)
      for (int j = 0; j < out.NumCols(); j++)
        d_pre_blk(t, j) = d_frames(t, j) * (1.0 - out(t, j) * out(t, j));

    const ParamGroup &g = params.Group(BlockName(k));
    if (trainable(BlockName(k))) {
      Matrix ctx = FrameContext(in, cfg.conv_context);
      ParamGroup &gs = grads->Group(BlockName(k));
      gs.grads[0].AddScaled(MatMul(Transpose(d_pre_blk), ctx), 1.0);
      Matrix &db = gs.grads[1];
      for (int t = 0; t < d_pre_blk.NumRows(); t++)
        for (int j = 0; j < d_pre_blk.NumCols(); j++)
          db(0, j) += d_pre_blk(t, j);
    }
    if (k > lowest_block) {
      // d_in via the context scatter; replication padding folds the
      // out-of-range positions back onto the edge frames.
      Matrix d_ctx = MatMul(d_pre_blk, g.values[0]);
      const int h = in.NumCols();
      Matrix d_in(in.NumRows(), h);
      for (int t = 0; t < d_ctx.NumRows(); t++) {
        const double *row = d_ctx.RowData(t);
        for (int o = -r; o <= r; o++) {
          const int src = std::clamp(t + o, 0, in.NumRows() - 1);
          double *dst = d_in.RowData(src);
          const double *seg = row + (o + r) * h;
          for (int j = 0; j < h; j++) dst[j] += seg[j];
        }
      }
      d_frames = std::move(d_in);
    }
  }
}

LayerSelection ParseLayerSelection(const std::string &name) {
  if (name == "last2fc") return LayerSelection::kLast2Fc;
  if (name == "last2fc+pool+lastblock")
    return LayerSelection::kLast2FcPoolLastBlock;
  if (name == "all") return LayerSelection::kAll;
  throw ConfigError("unknown layer selection: " + name);
}

std::string LayerSelectionName(LayerSelection sel) {
  switch (sel) {
    case LayerSelection::kLast2Fc:
      return "last2fc";
    case LayerSelection::kLast2FcPoolLastBlock:
      return "last2fc+pool+lastblock";
    case LayerSelection::kAll:
      return "all";
  }
  return "?";
}

GroupMask SelectGroups(const ParameterSet &params, LayerSelection sel) {
  GroupMask mask(params.NumGroups(), false);
  auto mark = [&](const std::string &name) {
    const int i = params.FindGroup(name);
    SVD_CHECK(i >= 0, "selection names unknown group ", name);
    mask[i] = true;
  };
  if (sel == LayerSelection::kAll) {
    std::fill(mask.begin(), mask.end(), true);
    return mask;
  }
  mark("fc1");
  mark("fc2");
  if (sel == LayerSelection::kLast2FcPoolLastBlock) {
    if (params.HasGroup("pool.lde")) mark("pool.lde");
    int last = -1;
    for (int i = 0; i < params.NumGroups(); i++)
      if (params.Group(i).name.rfind("enc.block", 0) == 0) last = i;
    SVD_CHECK(last >= 0, "no encoder blocks in parameter set");
    mask[last] = true;
  }
  return mask;
}

ParameterSet ReplaceClassifier(const ParameterSet &params, EncoderConfig *cfg,
                               int new_num_classes, Rng *rng) {
  SVD_CHECK(new_num_classes >= 2, "invalid class count ", new_num_classes);
  ParameterSet out = params;
  ParamGroup &fc2 = out.Group("fc2");
  fc2.values.clear();
  fc2.grads.clear();
  fc2.value_names.clear();
  fc2.AddValue("weight",
               GaussianMatrix(rng, 0.0, 1.0 / std::sqrt(cfg->embedding_dim),
                              new_num_classes, cfg->embedding_dim));
  fc2.AddValue("bias", Matrix(1, new_num_classes));
  cfg->num_classes = new_num_classes;
  return out;
}

void SaveModel(const std::string &path, const EncoderConfig &cfg,
               const ParameterSet &params) {
  std::ofstream os(path, std::ios::binary);
  SVD_CHECK(os.good(), "cannot open ", path, " for writing");
  WriteBytes(os, kModelMagic, 4);
  WriteU32(os, kModelVersion);
  WriteI32(os, cfg.input_dim);
  WriteU32(os, static_cast<uint32_t>(cfg.block_widths.size()));
  for (int w : cfg.block_widths) WriteI32(os, w);
  WriteI32(os, cfg.conv_context);
  WriteU32(os, cfg.pooling == Pooling::kLde ? 1 : 0);
  WriteI32(os, cfg.lde_components);
  WriteI32(os, cfg.embedding_dim);
  WriteI32(os, cfg.num_classes);
  WriteU32(os, static_cast<uint32_t>(params.NumGroups()));
  for (int i = 0; i < params.NumGroups(); i++) {
    const ParamGroup &g = params.Group(i);
    WriteString(os, g.name);
    WriteU32(os, static_cast<uint32_t>(g.values.size()));
    for (size_t j = 0; j < g.values.size(); j++) {
      WriteString(os, g.value_names[j]);
      const Matrix &m = g.values[j];
      SVD_CHECK(m.AllFinite(), "non-finite values in group ", g.name);
      WriteU32(os, static_cast<uint32_t>(m.NumRows()));
      WriteU32(os, static_cast<uint32_t>(m.NumCols()));
      for (double v : m.Data()) WriteF64(os, v);
    }
  }
  SVD_CHECK(os.good(), "write failed for ", path);
}

ModelFile LoadModel(const std::string &path, const EncoderConfig *expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is.good()) throw DataError("cannot open model file " + path);
  char magic[4];
  ReadBytes(is, magic, 4, "magic");
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw DataError("corrupt model file: bad magic in " + path);
  const uint32_t version = ReadU32(is, "version");
  SVD_CHECK(version == kModelVersion, "unsupported model version ", version);

  ModelFile mf;
  mf.cfg.input_dim = ReadI32(is, "config");
  const uint32_t n_blocks = ReadU32(is, "config");
  SVD_CHECK(n_blocks >= 1 && n_blocks <= 1024, "corrupt model file: ",
            n_blocks, " blocks");
  mf.cfg.block_widths.resize(n_blocks);
  for (uint32_t k = 0; k < n_blocks; k++)
    mf.cfg.block_widths[k] = ReadI32(is, "config");
  mf.cfg.conv_context = ReadI32(is, "config");
  mf.cfg.pooling = ReadU32(is, "config") == 1 ? Pooling::kLde : Pooling::kMean;
  mf.cfg.lde_components = ReadI32(is, "config");
  mf.cfg.embedding_dim = ReadI32(is, "config");
  mf.cfg.num_classes = ReadI32(is, "config");
  mf.cfg.Validate();
  if (expected != nullptr && !(mf.cfg == *expected))
    throw DataError("model config mismatch for " + path);

  const uint32_t n_groups = ReadU32(is, "group count");
  for (uint32_t i = 0; i < n_groups; i++) {
    ParamGroup &g = mf.params.AddGroup(ReadString(is, "group name"));
    const uint32_t n_values = ReadU32(is, "value count");
    for (uint32_t j = 0; j < n_values; j++) {
      const std::string vname = ReadString(is, "value name");
      const uint32_t rows = ReadU32(is, "shape");
      const uint32_t cols = ReadU32(is, "shape");
      SVD_CHECK(rows <= 1u << 20 && cols <= 1u << 20,
                "corrupt model file: shape ", rows, "x", cols);
      Matrix m(static_cast<int>(rows), static_cast<int>(cols));
      for (double &v : m.Data()) v = ReadF64(is, "values");
      SVD_CHECK(m.AllFinite(), "non-finite values in group ", g.name);
      g.AddValue(vname, std::move(m));
    }
  }
  return mf;
}

}  // namespace svdistill
