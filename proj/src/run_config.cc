// svdistill/run_config.cc

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

#include "svdistill/run_config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace svdistill {

namespace {

using nlohmann::json;

constexpr int kConfigVersion = 1;

void CheckKeys(const json &j, const std::string &where,
               const std::set<std::string> &allowed) {
  if (!j.is_object())
    throw ConfigError("config section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (allowed.find(it.key()) == allowed.end())
      throw ConfigError("unknown config key '" + where + "." + it.key() +
                        "'");
}

template <typename T>
void Get(const json &j, const char *key, T *out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError(std::string("bad value for config key '") + key + "'");
  }
}

void GetRange(const json &j, const char *key, int *lo, int *hi) {
  if (!j.contains(key)) return;
  const json &v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    throw ConfigError(std::string("config key '") + key +
                      "' must be [min, max]");
  *lo = v[0].get<int>();
  *hi = v[1].get<int>();
}

CorpusSection ParseCorpus(const json &j) {
  CheckKeys(j, "corpus",
            {"feature_dim", "sigma_speaker", "sigma_channel", "sigma_frame",
             "ar_coeff", "long_frames", "short_frames", "shift_scale",
             "shift_bias_norm", "source", "source_eval", "target",
             "target_eval", "trials"});
  CorpusSection c;
  Get(j, "feature_dim", &c.feature_dim);
  Get(j, "sigma_speaker", &c.sigma_speaker);
  Get(j, "sigma_channel", &c.sigma_channel);
  Get(j, "sigma_frame", &c.sigma_frame);
  Get(j, "ar_coeff", &c.ar_coeff);
  GetRange(j, "long_frames", &c.long_min, &c.long_max);
  GetRange(j, "short_frames", &c.short_min, &c.short_max);
  Get(j, "shift_scale", &c.shift_scale);
  Get(j, "shift_bias_norm", &c.shift_bias_norm);
  auto split = [](const json &s, const std::string &where, int *speakers,
                  int *utts) {
    CheckKeys(s, where, {"speakers", "utts_per_speaker"});
    Get(s, "speakers", speakers);
    Get(s, "utts_per_speaker", utts);
  };
  if (j.contains("source"))
    split(j.at("source"), "corpus.source", &c.source_speakers,
          &c.source_utts);
  if (j.contains("source_eval"))
    split(j.at("source_eval"), "corpus.source_eval", &c.source_eval_speakers,
          &c.source_eval_utts);
  if (j.contains("target"))
    split(j.at("target"), "corpus.target", &c.target_speakers,
          &c.target_utts);
  if (j.contains("target_eval"))
    split(j.at("target_eval"), "corpus.target_eval", &c.target_eval_speakers,
          &c.target_eval_utts);
  if (j.contains("trials")) {
    CheckKeys(j.at("trials"), "corpus.trials", {"n_target", "n_nontarget"});
    Get(j.at("trials"), "n_target", &c.n_target_trials);
    Get(j.at("trials"), "n_nontarget", &c.n_nontarget_trials);
  }
  return c;
}

json CorpusToJson(const CorpusSection &c) {
  json j;
  j["feature_dim"] = c.feature_dim;
  j["sigma_speaker"] = c.sigma_speaker;
  j["sigma_channel"] = c.sigma_channel;
  j["sigma_frame"] = c.sigma_frame;
  j["ar_coeff"] = c.ar_coeff;
  j["long_frames"] = {c.long_min, c.long_max};
  j["short_frames"] = {c.short_min, c.short_max};
  j["shift_scale"] = c.shift_scale;
  j["shift_bias_norm"] = c.shift_bias_norm;
  j["source"] = {{"speakers", c.source_speakers},
                 {"utts_per_speaker", c.source_utts}};
  j["source_eval"] = {{"speakers", c.source_eval_speakers},
                      {"utts_per_speaker", c.source_eval_utts}};
  j["target"] = {{"speakers", c.target_speakers},
                 {"utts_per_speaker", c.target_utts}};
  j["target_eval"] = {{"speakers", c.target_eval_speakers},
                      {"utts_per_speaker", c.target_eval_utts}};
  j["trials"] = {{"n_target", c.n_target_trials},
                 {"n_nontarget", c.n_nontarget_trials}};
  return j;
}

EncoderSection ParseEncoder(const json &j) {
  CheckKeys(j, "encoder",
            {"block_widths", "conv_context", "pooling", "lde_components",
             "embedding_dim"});
  EncoderSection e;
  Get(j, "block_widths", &e.block_widths);
  Get(j, "conv_context", &e.conv_context);
  if (j.contains("pooling")) {
    const std::string p = j.at("pooling").get<std::string>();
    if (p == "mean") {
      e.pooling = Pooling::kMean;
    } else if (p == "lde") {
      e.pooling = Pooling::kLde;
    } else {
      throw ConfigError("encoder.pooling must be 'mean' or 'lde'");
    }
  }
  Get(j, "lde_components", &e.lde_components);
  Get(j, "embedding_dim", &e.embedding_dim);
  return e;
}

json EncoderToJson(const EncoderSection &e) {
  json j;
  j["block_widths"] = e.block_widths;
  j["conv_context"] = e.conv_context;
  j["pooling"] = e.pooling == Pooling::kLde ? "lde" : "mean";
  j["lde_components"] = e.lde_components;
  j["embedding_dim"] = e.embedding_dim;
  return j;
}

TrainSection ParseTrain(const json &j, const std::string &where,
                        TrainSection defaults, bool allow_head) {
  std::set<std::string> keys = {"epochs", "batch_size", "crop_frames",
                                "noam"};
  if (allow_head) {
    keys.insert("class_loss");
    keys.insert("asoftmax_margin");
  }
  CheckKeys(j, where, keys);
  TrainSection t = defaults;
  Get(j, "epochs", &t.epochs);
  Get(j, "batch_size", &t.batch_size);
  Get(j, "crop_frames", &t.crop_frames);
  if (j.contains("noam")) {
    const json &n = j.at("noam");
    CheckKeys(n, where + ".noam", {"model_size", "warmup", "factor"});
    Get(n, "model_size", &t.noam.model_size);
    Get(n, "warmup", &t.noam.warmup);
    Get(n, "factor", &t.noam.factor);
  }
  if (allow_head) {
    if (j.contains("class_loss"))
      t.class_loss = ParseClassLoss(j.at("class_loss").get<std::string>());
    Get(j, "asoftmax_margin", &t.asoftmax_margin);
  }
  return t;
}

json TrainToJson(const TrainSection &t, bool with_head) {
  json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["crop_frames"] = t.crop_frames;
  j["noam"] = {{"model_size", t.noam.model_size},
               {"warmup", t.noam.warmup},
               {"factor", t.noam.factor}};
  if (with_head) {
    j["class_loss"] = ClassLossName(t.class_loss);
    j["asoftmax_margin"] = t.asoftmax_margin;
  }
  return j;
}

DistillationConfig ParseDistill(const json &j) {
  CheckKeys(j, "distill",
            {"class_loss", "asoftmax_margin", "use_kld", "use_emd",
             "weight_class", "weight_kld", "weight_emd", "temperature"});
  DistillationConfig d;
  if (j.contains("class_loss"))
    d.class_loss = ParseClassLoss(j.at("class_loss").get<std::string>());
  Get(j, "asoftmax_margin", &d.asoftmax_margin);
  Get(j, "use_kld", &d.use_kld);
  Get(j, "use_emd", &d.use_emd);
  Get(j, "weight_class", &d.weight_class);
  Get(j, "weight_kld", &d.weight_kld);
  Get(j, "weight_emd", &d.weight_emd);
  Get(j, "temperature", &d.temperature);
  return d;
}

json DistillToJson(const DistillationConfig &d) {
  json j;
  j["class_loss"] = ClassLossName(d.class_loss);
  j["asoftmax_margin"] = d.asoftmax_margin;
  j["use_kld"] = d.use_kld;
  j["use_emd"] = d.use_emd;
  j["weight_class"] = d.weight_class;
  j["weight_kld"] = d.weight_kld;
  j["weight_emd"] = d.weight_emd;
  j["temperature"] = d.temperature;
  return j;
}

FineTuneConfig ParseFinetune(const json &j) {
  CheckKeys(j, "finetune",
            {"regularizer", "alpha", "beta", "selection", "lr_replaced",
             "lr_rest", "lr_decay_epochs", "epochs", "batch_size",
             "include_biases", "class_loss", "asoftmax_margin"});
  FineTuneConfig f;
  if (j.contains("regularizer"))
    f.regularizer = ParseRegKind(j.at("regularizer").get<std::string>());
  Get(j, "alpha", &f.alpha);
  Get(j, "beta", &f.beta);
  if (j.contains("selection"))
    f.selection = ParseLayerSelection(j.at("selection").get<std::string>());
  Get(j, "lr_replaced", &f.lr_replaced);
  Get(j, "lr_rest", &f.lr_rest);
  Get(j, "lr_decay_epochs", &f.lr_decay_epochs);
  Get(j, "epochs", &f.epochs);
  Get(j, "batch_size", &f.batch_size);
  Get(j, "include_biases", &f.include_biases);
  if (j.contains("class_loss"))
    f.class_loss = ParseClassLoss(j.at("class_loss").get<std::string>());
  Get(j, "asoftmax_margin", &f.asoftmax_margin);
  return f;
}

json FinetuneToJson(const FineTuneConfig &f) {
  json j;
  j["regularizer"] = RegKindName(f.regularizer);
  j["alpha"] = f.alpha;
  j["beta"] = f.beta;
  j["selection"] = LayerSelectionName(f.selection);
  j["lr_replaced"] = f.lr_replaced;
  j["lr_rest"] = f.lr_rest;
  j["lr_decay_epochs"] = f.lr_decay_epochs;
  j["epochs"] = f.epochs;
  j["batch_size"] = f.batch_size;
  j["include_biases"] = f.include_biases;
  j["class_loss"] = ClassLossName(f.class_loss);
  j["asoftmax_margin"] = f.asoftmax_margin;
  return j;
}

BackendSection ParseBackend(const json &j) {
  CheckKeys(j, "backend", {"lda_dim", "use_lda", "scorer"});
  BackendSection b;
  Get(j, "lda_dim", &b.cfg.lda_dim);
  Get(j, "use_lda", &b.cfg.use_lda);
  if (j.contains("scorer"))
    b.scorer = ParseScorer(j.at("scorer").get<std::string>());
  return b;
}

json BackendToJson(const BackendSection &b) {
  json j;
  j["lda_dim"] = b.cfg.lda_dim;
  j["use_lda"] = b.cfg.use_lda;
  j["scorer"] = ScorerName(b.scorer);
  return j;
}

EvaluateSection ParseEvaluate(const json &j) {
  CheckKeys(j, "evaluate",
            {"eval_corpus", "trials", "backend_train_corpus",
             "eval_crop_frames", "backend_crop_frames"});
  EvaluateSection e;
  Get(j, "eval_corpus", &e.eval_corpus);
  Get(j, "trials", &e.trials);
  Get(j, "backend_train_corpus", &e.backend_train_corpus);
  Get(j, "eval_crop_frames", &e.eval_crop_frames);
  Get(j, "backend_crop_frames", &e.backend_crop_frames);
  return e;
}

json EvaluateToJson(const EvaluateSection &e) {
  json j;
  j["eval_corpus"] = e.eval_corpus;
  j["trials"] = e.trials;
  j["backend_train_corpus"] = e.backend_train_corpus;
  j["eval_crop_frames"] = e.eval_crop_frames;
  j["backend_crop_frames"] = e.backend_crop_frames;
  return j;
}

}  // namespace

EncoderConfig EncoderSection::ToEncoderConfig(int input_dim) const {
  EncoderConfig cfg;
  cfg.input_dim = input_dim;
  cfg.block_widths = block_widths;
  cfg.conv_context = conv_context;
  cfg.pooling = pooling;
  cfg.lde_components = lde_components;
  cfg.embedding_dim = embedding_dim;
  return cfg;
}

#define SVD_REQUIRE_SECTION(field, name)                                \
  if (!field) throw ConfigError("config section '" name "' required"); \
  return *field

const CorpusSection &RunConfig::RequireCorpus() const {
  SVD_REQUIRE_SECTION(corpus, "corpus");
}
const EncoderSection &RunConfig::RequireEncoder() const {
  SVD_REQUIRE_SECTION(encoder, "encoder");
}
const TrainSection &RunConfig::RequireTeacher() const {
  SVD_REQUIRE_SECTION(teacher, "teacher");
}
const TrainSection &RunConfig::RequireStudent() const {
  SVD_REQUIRE_SECTION(student, "student");
}
const DistillationConfig &RunConfig::RequireDistill() const {
  SVD_REQUIRE_SECTION(distill, "distill");
}
const FineTuneConfig &RunConfig::RequireFinetune() const {
  SVD_REQUIRE_SECTION(finetune, "finetune");
}
const BackendSection &RunConfig::RequireBackend() const {
  SVD_REQUIRE_SECTION(backend, "backend");
}
const EvaluateSection &RunConfig::RequireEvaluate() const {
  SVD_REQUIRE_SECTION(evaluate, "evaluate");
}

#undef SVD_REQUIRE_SECTION

RunConfig ParseRunConfig(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  CheckKeys(j, "",
            {"config_version", "seed", "threads", "corpus", "encoder",
             "teacher", "student", "distill", "finetune", "backend",
             "evaluate"});
  if (!j.contains("config_version"))
    throw ConfigError("config_version is required");
  const int version = j.at("config_version").get<int>();
  if (version != kConfigVersion)
    throw ConfigError("unsupported config_version " +
                      std::to_string(version));

  RunConfig cfg;
  Get(j, "seed", &cfg.seed);
  Get(j, "threads", &cfg.threads);
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (j.contains("corpus")) cfg.corpus = ParseCorpus(j.at("corpus"));
  if (j.contains("encoder")) cfg.encoder = ParseEncoder(j.at("encoder"));
  if (j.contains("teacher"))
    cfg.teacher = ParseTrain(j.at("teacher"), "teacher", TrainSection{},
                             /*allow_head=*/true);
  if (j.contains("student")) {
    TrainSection defaults;
    defaults.crop_frames = 200;
    cfg.student = ParseTrain(j.at("student"), "student", defaults,
                             /*allow_head=*/false);
  }
  if (j.contains("distill")) cfg.distill = ParseDistill(j.at("distill"));
  if (j.contains("finetune")) cfg.finetune = ParseFinetune(j.at("finetune"));
  if (j.contains("backend")) cfg.backend = ParseBackend(j.at("backend"));
  if (j.contains("evaluate"))
    cfg.evaluate = ParseEvaluate(j.at("evaluate"));
  return cfg;
}

RunConfig LoadRunConfig(const std::string &path) {
  std::ifstream is(path);
  if (!is.good()) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ParseRunConfig(ss.str());
}

std::string RunConfigToJson(const RunConfig &cfg) {
  json j;
  j["config_version"] = kConfigVersion;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  if (cfg.corpus) j["corpus"] = CorpusToJson(*cfg.corpus);
  if (cfg.encoder) j["encoder"] = EncoderToJson(*cfg.encoder);
  if (cfg.teacher) j["teacher"] = TrainToJson(*cfg.teacher, true);
  if (cfg.student) j["student"] = TrainToJson(*cfg.student, false);
  if (cfg.distill) j["distill"] = DistillToJson(*cfg.distill);
  if (cfg.finetune) j["finetune"] = FinetuneToJson(*cfg.finetune);
  if (cfg.backend) j["backend"] = BackendToJson(*cfg.backend);
  if (cfg.evaluate) j["evaluate"] = EvaluateToJson(*cfg.evaluate);
  return j.dump(2) + "\n";
}

}  // namespace svdistill
