// Copyright 2026 The OHC Support Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ohc/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "ohc/checkpoint.h"
#include "ohc/corpus.h"
#include "ohc/embeddings.h"
#include "ohc/emotion.h"
#include "ohc/errors.h"
#include "ohc/eval.h"
#include "ohc/explain.h"
#include "ohc/features.h"
#include "ohc/fusenet.h"
#include "ohc/learners.h"
#include "ohc/pipeline.h"
#include "ohc/stats.h"
#include "ohc/synthetic.h"

namespace ohc::cli {
namespace {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small helpers.

std::vector<std::string> SplitList(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string Fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::ofstream OpenOutput(const std::string& path) {
  if (path.empty()) throw UsageError("an output path is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out = OpenOutput(path);
  out << text;
  if (!out) throw IoError("write failure on '" + path + "'");
}

void EnsureDirectory(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir + "'");
  }
}

std::string Require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
  return value;
}

std::string Stem(const std::string& path) {
  return fs::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// Shared option blocks.

struct DataFlags {
  std::string emotions;    // sidecar JSONL; the lexicon is used without it
  std::string embeddings;  // binary embedding file

  void Register(CLI::App* app) {
    app->add_option("--emotions", emotions, "Emotion sidecar JSONL");
    app->add_option("--embeddings", embeddings, "Binary embedding file");
  }
  EmotionSource LoadEmotions() const {
    if (emotions.empty()) return EmotionSource();
    return EmotionSource(LoadEmotionScores(emotions));
  }
  std::unique_ptr<EmbeddingFile> LoadEmbeddings() const {
    if (embeddings.empty()) return nullptr;
    return std::make_unique<EmbeddingFile>(ReadEmbeddingFile(embeddings));
  }
};

struct FeatureFlags {
  std::string task = "isr";
  std::string text = "tfidf";
  int min_df = 2;
  std::string groups = "all";

  void Register(CLI::App* app, bool with_groups = true) {
    app->add_option("--task", task, "Prediction task")
        ->check(CLI::IsMember({"issq", "isr"}));
    app->add_option("--text", text, "Text representation")
        ->check(CLI::IsMember({"tfidf", "embedding"}));
    app->add_option("--min-df", min_df, "TF-IDF minimum document frequency")
        ->check(CLI::PositiveNumber);
    if (with_groups) {
      app->add_option("--groups", groups,
                      "Feature groups: all, or a comma list of text, emotions, "
                      "numeric_text, post, user");
    }
  }
  FeaturizerOptions Options() const {
    FeaturizerOptions o;
    o.task = ParseTask(task);
    o.text_mode = ParseTextMode(text);
    o.min_df = min_df;
    if (groups != "all") {
      o.groups.clear();
      for (const auto& g : SplitList(groups)) {
        try {
          o.groups.insert(ParseFeatureGroup(g));
        } catch (const InvalidArgument&) {
          throw UsageError("unknown feature group '" + g + "'");
        }
      }
      if (o.groups.empty()) throw UsageError("--groups names no group");
    }
    return o;
  }
};

struct FusionFlags {
  FusionConfig config;
  int d_model = config.d_text;

  void Register(CLI::App* app) {
    app->add_option("--d-model", d_model, "Text and token width")
        ->check(CLI::PositiveNumber);
    app->add_option("--cat-embed", config.cat_embed_dim,
                    "Categorical embedding width")
        ->check(CLI::PositiveNumber);
    app->add_option("--cat-bottleneck", config.cat_bottleneck,
                    "Categorical MLP hidden width")
        ->check(CLI::PositiveNumber);
    app->add_option("--num-bottleneck", config.num_bottleneck,
                    "Numeric MLP hidden width")
        ->check(CLI::PositiveNumber);
    app->add_option("--fusion-hidden", config.fusion_hidden,
                    "Classifier head hidden width")
        ->check(CLI::PositiveNumber);
    app->add_option("--dropout", config.dropout, "Head dropout rate")
        ->check(CLI::Range(0.0, 0.99));
    app->add_option("--leaky-slope", config.leaky_slope,
                    "Leaky ReLU negative slope");
  }
  FusionConfig Config() const {
    FusionConfig c = config;
    c.d_text = d_model;
    c.d_token = d_model;
    return c;
  }
};

struct TrainFlags {
  TrainConfig config;

  void Register(CLI::App* app) {
    app->add_option("--lr", config.max_lr, "Peak learning rate")
        ->check(CLI::PositiveNumber);
    app->add_option("--warmup", config.warmup_fraction,
                    "Warmup share of all steps")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--batch-size", config.batch_size, "Mini-batch size")
        ->check(CLI::PositiveNumber);
    app->add_option("--weight-decay", config.weight_decay,
                    "Decoupled weight decay");
    app->add_option("--epochs", config.max_epochs, "Maximum epochs")
        ->check(CLI::PositiveNumber);
    app->add_option("--patience", config.patience, "Early-stopping patience")
        ->check(CLI::NonNegativeNumber);
  }
  TrainConfig Config(uint64_t seed) const {
    TrainConfig c = config;
    c.seed = seed;
    return c;
  }
};

struct BaselineFlags {
  BaselineParams params;
  bool no_text = false;

  void Register(CLI::App* app) {
    app->add_option("--l2", params.l2, "Logistic/SVM L2 penalty");
    app->add_option("--svm-epochs", params.svm_epochs, "SVM epochs");
    app->add_option("--k", params.k, "KNN neighbours");
    app->add_option("--trees", params.trees, "Random forest size");
    app->add_option("--forest-depth", params.forest_depth,
                    "Random forest depth");
    app->add_option("--rounds", params.rounds, "Boosting rounds");
    app->add_option("--shrinkage", params.shrinkage, "Boosting shrinkage");
    app->add_option("--boost-depth", params.boost_depth, "Boosting tree depth");
    app->add_flag("--no-text", no_text,
                  "Baselines use tabular features only");
  }
};

// Training data: a corpus plus either a validation corpus or a seeded
// label-stratified holdout share of it.
struct SplitFlags {
  std::string corpus;
  std::string val_corpus;
  double val_fraction = 0.1;

  void Register(CLI::App* app) {
    app->add_option("--corpus", corpus, "Training corpus JSONL");
    app->add_option("--val-corpus", val_corpus, "Validation corpus JSONL");
    app->add_option("--val-fraction", val_fraction,
                    "Validation share when no validation corpus is given")
        ->check(CLI::Range(0.0, 0.9));
  }
  std::pair<Corpus, Corpus> Load(Task task, uint64_t seed) const {
    Corpus train = TaskCorpus(ReadCorpusFile(Require(corpus, "--corpus")), task);
    if (!val_corpus.empty()) {
      return {train, TaskCorpus(ReadCorpusFile(val_corpus), task)};
    }
    if (val_fraction <= 0.0) {
      throw UsageError("--val-fraction must be positive without --val-corpus");
    }
    return HoldoutSplit(train, 1.0 - val_fraction, seed, TaskLabel(task));
  }
};

VectorXd TaskLabels(const Corpus& corpus, Task task) {
  VectorXd y(static_cast<Index>(corpus.size()));
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto label = GetLabel(corpus[i], TaskLabel(task));
    if (!label) throw InvalidArgument("pair " + corpus[i].pair_id + " is unlabeled");
    y(static_cast<Index>(i)) = *label ? 1.0 : 0.0;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Checkpoint-backed scorers.

struct LoadedModel {
  std::string name;
  CheckpointKind kind = CheckpointKind::kFusion;
  TrainedPipeline fusion;
  BaselineBundle baseline;

  const Featurizer& featurizer() const {
    return kind == CheckpointKind::kFusion ? fusion.featurizer
                                           : baseline.featurizer;
  }
  Task task() const { return featurizer().options().task; }

  VectorXd Predict(const Corpus& corpus, const EmotionSource& emotions,
                   const EmbeddingFile* embeddings) const {
    if (corpus.empty()) return VectorXd();
    if (kind == CheckpointKind::kFusion) {
      return PredictPipeline(fusion, corpus, emotions, embeddings);
    }
    Dataset ds =
        baseline.featurizer.Transform(corpus, emotions, false, embeddings);
    return PredictBaseline(
        baseline.model, DesignMatrix(ds.batch, baseline.featurizer.input_schema(),
                                     baseline.include_text));
  }
};

LoadedModel LoadModel(const std::string& path) {
  LoadedModel m;
  m.name = Stem(path);
  m.kind = PeekCheckpointKindFile(path);
  if (m.kind == CheckpointKind::kFusion) {
    m.fusion = LoadPipelineFile(path);
  } else {
    m.baseline = LoadBaselineFile(path);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Subcommands. Each holds its flags and a Run method.

struct Context {
  std::ostream& out;
  std::ostream& err;
};

class Command {
 public:
  virtual ~Command() = default;
  virtual void Run(const Context& ctx) = 0;
  uint64_t seed = 0;
  std::string config;
};

class IngestCommand : public Command {
 public:
  explicit IngestCommand(CLI::App* app) {
    app->add_option("--corpus", corpus_, "Input corpus JSONL");
    app->add_option("--synthetic", synthetic_,
                    "Generate a synthetic corpus instead of reading one")
        ->check(CLI::IsMember({"isr", "helpfulness"}));
    app->add_option("--pairs", pairs_, "Synthetic corpus size")
        ->check(CLI::PositiveNumber);
    app->add_option("--conditions", conditions_,
                    "Declared conditions, comma-separated");
    app->add_option("--sample", sample_,
                    "Stratified sample sizes, e.g. cancer=300,diabetes=300");
    app->add_option("--split", split_,
                    "Training share; the rest goes to --holdout-out")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--stratify", stratify_, "Label used to stratify --split")
        ->check(CLI::IsMember({"none", "issq", "isr", "helpful"}));
    app->add_option("--out", out_, "Output corpus JSONL");
    app->add_option("--holdout-out", holdout_out_, "Holdout corpus JSONL");
  }

  void Run(const Context& ctx) override {
    Corpus corpus = Load();
    if (!sample_.empty()) {
      std::map<std::string, size_t> sizes;
      for (const auto& item : SplitList(sample_)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          throw UsageError("--sample expects condition=count items");
        }
        try {
          sizes[item.substr(0, eq)] = std::stoul(item.substr(eq + 1));
        } catch (const std::exception&) {
          throw UsageError("bad count in --sample item '" + item + "'");
        }
      }
      corpus = StratifiedSample(corpus, sizes, seed);
    }
    Require(out_, "--out");
    if (split_ > 0.0) {
      Require(holdout_out_, "--holdout-out");
      std::optional<LabelField> field;
      if (stratify_ != "none") field = ParseLabelField(stratify_);
      auto [train, holdout] = HoldoutSplit(corpus, split_, seed, field);
      WriteCorpusFile(out_, train);
      WriteCorpusFile(holdout_out_, holdout);
    } else {
      WriteCorpusFile(out_, corpus);
    }
    ctx.out << FormatLabelSummary(SummarizeLabels(corpus));
  }

 private:
  Corpus Load() const {
    if (!synthetic_.empty()) {
      if (!corpus_.empty()) throw UsageError("--corpus conflicts with --synthetic");
      if (synthetic_ == "isr") {
        SyntheticIsrOptions o;
        o.pairs = pairs_;
        o.seed = seed;
        if (!conditions_.empty()) o.conditions = SplitList(conditions_);
        return GenerateIsrCorpus(o).corpus;
      }
      SyntheticHelpfulnessOptions o;
      o.responses = pairs_;
      o.seed = seed;
      if (!conditions_.empty()) o.conditions = SplitList(conditions_);
      return GenerateHelpfulnessCorpus(o).corpus;
    }
    ParseOptions po;
    for (const auto& c : SplitList(conditions_)) po.declared_conditions.insert(c);
    return ReadCorpusFile(Require(corpus_, "--corpus or --synthetic"), po);
  }

  std::string corpus_;
  std::string synthetic_;
  size_t pairs_ = 2000;
  std::string conditions_;
  std::string sample_;
  double split_ = 0.0;
  std::string stratify_ = "none";
  std::string out_;
  std::string holdout_out_;
};

class FeaturizeCommand : public Command {
 public:
  explicit FeaturizeCommand(CLI::App* app) {
    app->add_option("--corpus", corpus_, "Corpus JSONL");
    features_.Register(app);
    data_.Register(app);
    app->add_option("--out", out_, "Feature CSV");
    app->add_option("--vocab-out", vocab_out_, "TF-IDF vocabulary CSV");
  }

  void Run(const Context&) override {
    FeaturizerOptions options = features_.Options();
    Corpus corpus = TaskCorpus(ReadCorpusFile(Require(corpus_, "--corpus")),
                               options.task, /*require_labels=*/false);
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    Featurizer f = Featurizer::Fit(corpus, emotions, options, embeddings.get());
    std::vector<std::string> ids;
    std::vector<FeatureRow> rows;
    std::vector<std::optional<bool>> labels;
    for (const auto& p : corpus.pairs()) {
      ids.push_back(p.pair_id);
      rows.push_back(f.Row(p, emotions));
      labels.push_back(GetLabel(p, TaskLabel(options.task)));
    }
    std::ofstream out = OpenOutput(Require(out_, "--out"));
    WriteFeatureCsv(out, f.schema(), ids, rows, labels);
    if (!vocab_out_.empty()) {
      std::ofstream vocab = OpenOutput(vocab_out_);
      f.tfidf().WriteVocabularyCsv(vocab);
    }
  }

 private:
  std::string corpus_;
  FeatureFlags features_;
  DataFlags data_;
  std::string out_;
  std::string vocab_out_;
};

void WriteHistoryCsv(std::ostream& out, const TrainHistory& h) {
  out << "epoch,train_loss,val_loss,val_accuracy,learning_rate,best\n";
  for (const auto& e : h.epochs) {
    out << e.epoch << ',' << Fixed(e.train_loss, 8) << ','
        << Fixed(e.val_loss, 8) << ',' << Fixed(e.val_accuracy) << ','
        << Fixed(e.learning_rate, 10) << ',' << (e.epoch == h.best_epoch ? 1 : 0)
        << '\n';
  }
}

class TrainCommand : public Command {
 public:
  explicit TrainCommand(CLI::App* app) {
    split_.Register(app);
    features_.Register(app);
    data_.Register(app);
    app->add_option("--learner", learner_, "fusion or a baseline name")
        ->check(CLI::IsMember({"fusion", "logistic", "linear_svm", "knn",
                               "random_forest", "gradient_boosting"}));
    fusion_.Register(app);
    train_.Register(app);
    baseline_.Register(app);
    app->add_option("--out", out_, "Checkpoint path");
    app->add_option("--history-out", history_out_, "Per-epoch history CSV");
  }

  void Run(const Context& ctx) override {
    FeaturizerOptions options = features_.Options();
    auto [train, val] = split_.Load(options.task, seed);
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    Require(out_, "--out");
    if (learner_ == "fusion") {
      PipelineRun run =
          TrainPipeline(train, val, emotions, options, fusion_.Config(),
                        train_.Config(seed), embeddings.get());
      SavePipelineFile(out_, run.pipeline);
      if (!history_out_.empty()) {
        std::ofstream h = OpenOutput(history_out_);
        WriteHistoryCsv(h, run.history);
      }
      ctx.err << "best epoch " << run.history.best_epoch << " of "
              << run.history.epochs.size() << "\n";
      return;
    }
    BaselineBundle b;
    b.featurizer = Featurizer::Fit(train, emotions, options, embeddings.get());
    b.include_text = !baseline_.no_text;
    Dataset ds = b.featurizer.Transform(train, emotions, true, embeddings.get());
    BaselineParams params = baseline_.params;
    params.kind = ParseBaselineKind(learner_);
    params.seed = seed;
    b.model = TrainBaseline(
        params, DesignMatrix(ds.batch, b.featurizer.input_schema(), b.include_text),
        ds.labels);
    SaveBaselineFile(out_, b);
  }

 private:
  SplitFlags split_;
  FeatureFlags features_;
  DataFlags data_;
  std::string learner_ = "fusion";
  FusionFlags fusion_;
  TrainFlags train_;
  BaselineFlags baseline_;
  std::string out_;
  std::string history_out_;
};

class EvaluateCommand : public Command {
 public:
  explicit EvaluateCommand(CLI::App* app) {
    app->add_option("--model", models_, "Checkpoint (repeatable)")
        ->delimiter(',');
    app->add_option("--corpus", corpus_, "Test corpus JSONL");
    data_.Register(app);
    app->add_flag("--ensemble", ensemble_,
                  "Add a greedy ensemble row fitted on --val-corpus");
    app->add_option("--val-corpus", val_corpus_,
                    "Validation corpus for ensemble weights");
    app->add_option("--threshold", threshold_, "Decision threshold")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--out", out_, "Metrics CSV");
    app->add_option("--confusion-out", confusion_out_, "Confusion JSON");
    app->add_option("--weights-out", weights_out_, "Ensemble weights CSV");
  }

  void Run(const Context&) override {
    if (models_.empty()) throw UsageError("at least one --model is required");
    if (ensemble_ && val_corpus_.empty()) {
      throw UsageError("--ensemble needs --val-corpus");
    }
    std::vector<LoadedModel> models;
    for (const auto& path : models_) models.push_back(LoadModel(path));
    const Task task = models.front().task();
    for (const auto& m : models) {
      if (m.task() != task) throw InvalidArgument("models disagree on the task");
    }
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    Corpus test = TaskCorpus(ReadCorpusFile(Require(corpus_, "--corpus")), task);
    const VectorXd labels = TaskLabels(test, task);

    std::vector<std::string> names;
    std::vector<VectorXd> probs;
    for (size_t k = 0; k < models.size(); ++k) {
      std::string name = models[k].name;
      if (std::count(names.begin(), names.end(), name) > 0) {
        name += "#" + std::to_string(k + 1);
      }
      names.push_back(name);
      probs.push_back(models[k].Predict(test, emotions, embeddings.get()));
    }
    if (ensemble_) {
      Corpus val = TaskCorpus(ReadCorpusFile(val_corpus_), task);
      std::vector<VectorXd> val_probs;
      for (const auto& m : models) {
        val_probs.push_back(m.Predict(val, emotions, embeddings.get()));
      }
      EnsembleWeights w = GreedyEnsemble(val_probs, TaskLabels(val, task));
      names.push_back("ensemble");
      probs.push_back(BlendPredictions(probs, w.weights));
      if (!weights_out_.empty()) {
        std::ofstream out = OpenOutput(weights_out_);
        out << "model,weight\n";
        for (size_t k = 0; k < models.size(); ++k) {
          out << names[k] << ',' << Fixed(w.weights[k]) << '\n';
        }
      }
    }

    std::ofstream out = OpenOutput(Require(out_, "--out"));
    WriteMetricsCsvHeader(out);
    std::ostringstream confusion;
    confusion << "{";
    for (size_t k = 0; k < names.size(); ++k) {
      MetricsReport r = ComputeMetrics(probs[k], labels, threshold_);
      WriteMetricsCsvRow(out, names[k], r);
      confusion << (k ? "," : "") << "\"" << names[k]
                << "\":" << ConfusionJson(r);
    }
    confusion << "}\n";
    if (!confusion_out_.empty()) WriteTextFile(confusion_out_, confusion.str());
  }

 private:
  std::vector<std::string> models_;
  std::string corpus_;
  DataFlags data_;
  bool ensemble_ = false;
  std::string val_corpus_;
  double threshold_ = 0.5;
  std::string out_;
  std::string confusion_out_;
  std::string weights_out_;
};

class AblateCommand : public Command {
 public:
  explicit AblateCommand(CLI::App* app) {
    split_.Register(app);
    app->add_option("--test-corpus", test_corpus_, "Test corpus JSONL");
    features_.Register(app, /*with_groups=*/false);
    app->add_option("--groups", ablations_,
                    "Ablations: full, text_only, no_emotion, no_user, "
                    "no_numeric, no_post");
    data_.Register(app);
    fusion_.Register(app);
    train_.Register(app);
    app->add_option("--out", out_, "Ablation CSV");
  }

  void Run(const Context&) override {
    std::vector<AblationSpec> specs;
    for (const auto& name : SplitList(ablations_)) {
      try {
        specs.push_back(ParseAblation(name));
      } catch (const InvalidArgument&) {
        throw UsageError("unknown ablation '" + name + "'");
      }
    }
    if (specs.empty()) throw UsageError("--groups names no ablation");
    FeaturizerOptions options = features_.Options();
    auto [train, val] = split_.Load(options.task, seed);
    Corpus test = ReadCorpusFile(Require(test_corpus_, "--test-corpus"));
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    std::vector<AblationResult> results =
        RunAblation(train, val, test, emotions, specs, options,
                    fusion_.Config(), train_.Config(seed), embeddings.get());
    std::ofstream out = OpenOutput(Require(out_, "--out"));
    WriteMetricsCsvHeader(out);
    for (const auto& r : results) WriteMetricsCsvRow(out, r.name, r.metrics);
  }

 private:
  SplitFlags split_;
  std::string test_corpus_;
  FeatureFlags features_;
  std::string ablations_ = "full,text_only,no_emotion,no_user,no_numeric,no_post";
  DataFlags data_;
  FusionFlags fusion_;
  TrainFlags train_;
  std::string out_;
};

class TransferCommand : public Command {
 public:
  explicit TransferCommand(CLI::App* app) {
    app->add_option("--model", model_, "Fusion checkpoint");
    app->add_option("--corpus", corpus_, "Target-condition corpus JSONL");
    data_.Register(app);
    app->add_option("--out", out_, "Metrics CSV");
  }

  void Run(const Context&) override {
    TrainedPipeline p = LoadPipelineFile(Require(model_, "--model"));
    Corpus target = ReadCorpusFile(Require(corpus_, "--corpus"));
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    MetricsReport r = TransferEvaluate(p, target, emotions, embeddings.get());
    std::ofstream out = OpenOutput(Require(out_, "--out"));
    WriteMetricsCsvHeader(out);
    WriteMetricsCsvRow(out, Stem(corpus_), r);
  }

 private:
  std::string model_;
  std::string corpus_;
  DataFlags data_;
  std::string out_;
};

// Draws `count` distinct indices below `n` in ascending order.
std::vector<Index> SampleRows(Index n, Index count, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<size_t>(std::min(n, count)));
  std::sort(idx.begin(), idx.end());
  return idx;
}

class ExplainCommand : public Command {
 public:
  explicit ExplainCommand(CLI::App* app) {
    app->add_option("--model", model_, "Fusion checkpoint");
    app->add_option("--corpus", corpus_, "Corpus JSONL");
    data_.Register(app);
    app->add_option("--background", background_, "Background rows")
        ->check(CLI::PositiveNumber);
    app->add_option("--instances", instances_, "Explained rows")
        ->check(CLI::PositiveNumber);
    app->add_option("--samples", samples_, "Permutations per explained row")
        ->check(CLI::PositiveNumber);
    app->add_flag("--exact", exact_, "Enumerate all coalitions");
    app->add_option("--local", local_, "Pair id for a local explanation");
    app->add_option("--out", out_, "Output directory");
  }

  void Run(const Context&) override {
    TrainedPipeline p = LoadPipelineFile(Require(model_, "--model"));
    const Featurizer& f = p.featurizer;
    EmotionSource emotions = data_.LoadEmotions();
    auto embeddings = data_.LoadEmbeddings();
    Corpus corpus = TaskCorpus(ReadCorpusFile(Require(corpus_, "--corpus")),
                               f.options().task, /*require_labels=*/false);
    if (corpus.empty()) throw InvalidArgument("no pairs to explain");
    Dataset ds = f.Transform(corpus, emotions, false, embeddings.get());
    const MatrixXd tab = TabularMatrix(ds.batch);
    if (tab.cols() == 0) throw InvalidArgument("model has no tabular features");
    std::vector<std::string> names;
    for (const auto& c : f.schema().numeric) names.push_back(c.name);
    for (const auto& c : f.schema().categorical) names.push_back(c.name);
    EnsureDirectory(out_);

    std::mt19937_64 rng(seed);
    const auto bg_rows = SampleRows(tab.rows(), background_, rng);
    MatrixXd bg(static_cast<Index>(bg_rows.size()), tab.cols());
    for (size_t i = 0; i < bg_rows.size(); ++i) {
      bg.row(static_cast<Index>(i)) = tab.row(bg_rows[i]);
    }
    const auto rows = SampleRows(tab.rows(), instances_, rng);
    std::vector<Attribution> attributions;
    std::vector<std::string> ids;
    for (Index r : rows) {
      attributions.push_back(Explain(p, ds, bg, tab, r));
      ids.push_back(ds.pair_ids[static_cast<size_t>(r)]);
    }
    GlobalSummary summary = Summarize(attributions, names);
    {
      std::ofstream out = OpenOutput((fs::path(out_) / "importance.csv").string());
      WriteImportanceCsv(out, summary);
    }
    {
      std::ofstream out = OpenOutput((fs::path(out_) / "beeswarm.csv").string());
      WriteBeeswarmCsv(out, attributions, names, ids);
    }
    if (!local_.empty()) WriteLocal(p, corpus, ds, bg, tab, names);
  }

 private:
  Attribution Explain(const TrainedPipeline& p, const Dataset& ds,
                      const MatrixXd& bg, const MatrixXd& tab, Index r) const {
    BatchPredictFn fn = TabularPredictor(p.model, ds.batch, r);
    const VectorXd x = tab.row(r).transpose();
    if (exact_) return ShapExact(fn, bg, x);
    const int n = std::max<int>(samples_, static_cast<int>(tab.cols()));
    std::seed_seq seq{seed, static_cast<uint64_t>(r)};
    uint64_t cell_seed;
    seq.generate(reinterpret_cast<uint32_t*>(&cell_seed),
                 reinterpret_cast<uint32_t*>(&cell_seed) + 2);
    return ShapSampled(fn, bg, x, n, cell_seed);
  }

  void WriteLocal(const TrainedPipeline& p, const Corpus& corpus,
                  const Dataset& ds,
                  const MatrixXd& bg, const MatrixXd& tab,
                  const std::vector<std::string>& names) const {
    const auto it = std::find(ds.pair_ids.begin(), ds.pair_ids.end(), local_);
    if (it == ds.pair_ids.end()) {
      throw InvalidArgument("pair '" + local_ + "' is not in the corpus");
    }
    const auto r = static_cast<Index>(it - ds.pair_ids.begin());
    Attribution a = Explain(p, ds, bg, tab, r);
    std::vector<TokenScore> tokens;
    const Featurizer& f = p.featurizer;
    if (f.schema().has_text && f.options().text_mode == TextMode::kTfidf) {
      const QRPair& pair = corpus[static_cast<size_t>(r)];
      const std::string& text = f.options().task == Task::kIsr
                                    ? pair.response_text
                                    : pair.question_text;
      const FusionBatch one = ds.batch.Rows({r});
      TextPredictFn fn = [&](const std::vector<std::string>& texts) {
        std::vector<Index> rep(texts.size(), 0);
        FusionBatch b = one.Rows(rep);
        for (size_t i = 0; i < texts.size(); ++i) {
          b.text_sparse[i] = f.tfidf().Vectorize(texts[i]);
        }
        return Predict(p.model, b);
      };
      tokens = LeaveOneOutTokens(fn, text);
      WriteTextFile((fs::path(out_) / "local.html").string(),
                    RenderTokenHtml(tokens));
    }
    WriteTextFile((fs::path(out_) / "local.json").string(),
                  LocalExplanationJson(a, names, tokens) + "\n");
  }

 private:
  std::string model_;
  std::string corpus_;
  DataFlags data_;
  Index background_ = 100;
  Index instances_ = 50;
  int samples_ = 1000;
  bool exact_ = false;
  std::string local_;
  std::string out_;
};

class StatsCommand : public Command {
 public:
  explicit StatsCommand(CLI::App* app) {
    app->add_option("--analysis", analysis_, "Analysis to run")
        ->check(CLI::IsMember({"helpfulness", "issq", "isr"}));
    app->add_option("--corpus", corpus_, "Corpus JSONL");
    app->add_option("--model", model_,
                    "ISR checkpoint scoring responses (helpfulness); "
                    "isr_label is used without it");
    data_.Register(app);
    app->add_option("--link", link_, "Link function")
        ->check(CLI::IsMember({"logit", "probit"}));
    app->add_flag("--classical", classical_, "Report classical standard errors");
    app->add_option("--bins", bins_, "Length bins for matching")
        ->check(CLI::PositiveNumber);
    app->add_flag("--one-hot-condition", one_hot_,
                  "Enter the condition as indicator columns");
    app->add_option("--out", out_, "Regression table (text)");
    app->add_option("--json-out", json_out_, "Regression JSON");
    app->add_option("--vif-out", vif_out_, "VIF table (text)");
  }

  void Run(const Context& ctx) override {
    Corpus corpus = ReadCorpusFile(Require(corpus_, "--corpus"));
    RegressionResult result;
    std::string extra;
    if (analysis_ == "helpfulness") {
      HelpfulnessOptions o;
      o.bins = bins_;
      o.one_hot_condition = one_hot_;
      o.link = ParseLink(link_);
      o.robust = !classical_;
      o.seed = seed;
      HelpfulnessReport report = HelpfulnessAnalysis(corpus, IsrValues(corpus), o);
      for (const auto& w : report.match.warnings) ctx.err << "warning: " << w << "\n";
      result = std::move(report.regression);
    } else {
      result = Determinants(corpus, ParseTask(analysis_));
    }
    const std::string table = FormatRegressionTable(result);
    if (out_.empty()) {
      ctx.out << table;
    } else {
      WriteTextFile(out_, table);
    }
    if (!json_out_.empty()) WriteTextFile(json_out_, RegressionJson(result) + "\n");
  }

 private:
  std::vector<int> IsrValues(const Corpus& corpus) const {
    std::vector<int> isr(corpus.size(), 0);
    if (!model_.empty()) {
      LoadedModel m = LoadModel(model_);
      if (m.task() != Task::kIsr) throw InvalidArgument("--model is not an ISR model");
      EmotionSource emotions = data_.LoadEmotions();
      auto embeddings = data_.LoadEmbeddings();
      const VectorXd p = m.Predict(corpus, emotions, embeddings.get());
      for (size_t i = 0; i < isr.size(); ++i) {
        isr[i] = p(static_cast<Index>(i)) >= 0.5 ? 1 : 0;
      }
      return isr;
    }
    for (size_t i = 0; i < corpus.size(); ++i) {
      if (!corpus[i].helpful) continue;
      if (!corpus[i].isr_label) {
        throw InvalidArgument("pair " + corpus[i].pair_id +
                              " has no isr_label; pass --model");
      }
      isr[i] = *corpus[i].isr_label ? 1 : 0;
    }
    return isr;
  }

  RegressionResult Determinants(const Corpus& all, Task task) const {
    Corpus corpus = TaskCorpus(all, task);
    FeaturizerOptions o;
    o.task = task;
    EmotionSource emotions = data_.LoadEmotions();
    Featurizer f = Featurizer::Fit(corpus, emotions, o);
    const std::vector<std::string> names = DeterminantRegressors(task);
    const FeatureSchema& s = f.schema();
    const auto n = static_cast<Index>(corpus.size());
    MatrixXd x(n, static_cast<Index>(names.size()) + 1);
    for (Index i = 0; i < n; ++i) {
      FeatureRow row = f.Row(corpus[static_cast<size_t>(i)], emotions);
      for (size_t j = 0; j < names.size(); ++j) {
        x(i, static_cast<Index>(j)) = Lookup(s, row, names[j]);
      }
      x(i, static_cast<Index>(names.size())) = 1.0;
    }
    if (!vif_out_.empty()) {
      const MatrixXd regressors = x.leftCols(static_cast<Index>(names.size()));
      WriteTextFile(vif_out_, FormatVifTable(Vif(regressors, names), names));
    }
    std::vector<std::string> all_names = names;
    all_names.push_back("Intercept");
    return FitGlmBinary(x, TaskLabels(corpus, task), all_names,
                        ParseLink(link_), !classical_);
  }

  static double Lookup(const FeatureSchema& s, const FeatureRow& row,
                       const std::string& name) {
    for (size_t j = 0; j < s.numeric.size(); ++j) {
      if (s.numeric[j].name == name) return row.numeric[j];
    }
    for (size_t j = 0; j < s.categorical.size(); ++j) {
      if (s.categorical[j].name == name) return std::stod(row.categorical[j]);
    }
    throw InvalidArgument("no feature column named " + name);
  }

  std::string analysis_ = "helpfulness";
  std::string corpus_;
  std::string model_;
  DataFlags data_;
  std::string link_ = "logit";
  bool classical_ = false;
  int bins_ = 10;
  bool one_hot_ = false;
  std::string out_;
  std::string json_out_;
  std::string vif_out_;
};

// ---------------------------------------------------------------------------
// report: histogram CSVs and static SVG bar charts.

struct Histogram {
  std::string series;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int64_t> counts;
};

std::string SvgEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// One small bar chart per histogram, stacked vertically.
std::string RenderHistogramsSvg(const std::vector<Histogram>& hists,
                                const std::string& title) {
  constexpr int kWidth = 480;
  constexpr int kPanel = 120;
  constexpr int kMargin = 30;
  const int height = kMargin + static_cast<int>(hists.size()) * (kPanel + kMargin);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"10\">\n";
  svg << "<text x=\"10\" y=\"18\" font-size=\"13\">" << SvgEscape(title)
      << "</text>\n";
  for (size_t h = 0; h < hists.size(); ++h) {
    const Histogram& hist = hists[h];
    const int top = kMargin + static_cast<int>(h) * (kPanel + kMargin) + 14;
    const int64_t peak =
        std::max<int64_t>(1, *std::max_element(hist.counts.begin(), hist.counts.end()));
    const double bar = (kWidth - 2.0 * kMargin) / static_cast<double>(hist.counts.size());
    svg << "<text x=\"" << kMargin << "\" y=\"" << top - 2 << "\">"
        << SvgEscape(hist.series) << "</text>\n";
    for (size_t b = 0; b < hist.counts.size(); ++b) {
      const double hgt = (kPanel - 20.0) * static_cast<double>(hist.counts[b]) /
                         static_cast<double>(peak);
      svg << "<rect x=\"" << Fixed(kMargin + bar * static_cast<double>(b), 2)
          << "\" y=\"" << Fixed(top + (kPanel - 20.0) - hgt, 2) << "\" width=\""
          << Fixed(bar * 0.9, 2) << "\" height=\"" << Fixed(hgt, 2)
          << "\" fill=\"#4c72b0\"/>\n";
    }
    svg << "<line x1=\"" << kMargin << "\" y1=\"" << top + kPanel - 20
        << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << top + kPanel - 20
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << kMargin << "\" y=\"" << top + kPanel - 8 << "\">"
        << Fixed(hist.lower.front(), 2) << "</text>\n";
    svg << "<text x=\"" << kWidth - kMargin << "\" y=\"" << top + kPanel - 8
        << "\" text-anchor=\"end\">" << Fixed(hist.upper.back(), 2)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void WriteHistogramCsv(std::ostream& out, const std::string& series_header,
                       const std::vector<Histogram>& hists) {
  out << series_header << ",bin_lower,bin_upper,count\n";
  for (const auto& h : hists) {
    for (size_t b = 0; b < h.counts.size(); ++b) {
      out << h.series << ',' << Fixed(h.lower[b], 4) << ','
          << Fixed(h.upper[b], 4) << ',' << h.counts[b] << '\n';
    }
  }
}

Histogram EqualWidth(const std::string& series, const std::vector<double>& v,
                     double lo, double hi, int bins) {
  Histogram h;
  h.series = series;
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    h.lower.push_back(lo + width * b);
    h.upper.push_back(lo + width * (b + 1));
  }
  h.counts.assign(static_cast<size_t>(bins), 0);
  for (double x : v) {
    int b = width > 0 ? static_cast<int>(std::floor((x - lo) / width)) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<size_t>(b)];
  }
  return h;
}

struct BeeswarmPoint {
  std::string feature;
  double value = 0.0;
  double phi = 0.0;
};

std::vector<BeeswarmPoint> ReadBeeswarm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("feature,instance,value,phi", 0) != 0) {
    throw ParseError("'" + path + "' is not a beeswarm CSV", 1);
  }
  std::vector<BeeswarmPoint> points;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto last = line.rfind(',');
    const auto mid = line.rfind(',', last - 1);
    if (first == std::string::npos || mid == std::string::npos || mid < first) {
      throw ParseError("malformed beeswarm row", line_no);
    }
    try {
      points.push_back({line.substr(0, first),
                        std::stod(line.substr(mid + 1, last - mid - 1)),
                        std::stod(line.substr(last + 1))});
    } catch (const std::exception&) {
      throw ParseError("malformed number in beeswarm row", line_no);
    }
  }
  return points;
}

std::string RenderBeeswarmSvg(const std::vector<BeeswarmPoint>& points) {
  std::vector<std::string> features;
  for (const auto& p : points) {
    if (std::find(features.begin(), features.end(), p.feature) == features.end()) {
      features.push_back(p.feature);
    }
  }
  constexpr int kLeft = 130;
  constexpr int kWidth = 560;
  constexpr int kRow = 22;
  const int height = 40 + kRow * static_cast<int>(features.size());
  double span = 1e-12;
  for (const auto& p : points) span = std::max(span, std::abs(p.phi));
  std::map<std::string, std::pair<double, double>> range;
  for (const auto& p : points) {
    auto [it, fresh] = range.try_emplace(p.feature, p.value, p.value);
    if (!fresh) {
      it->second.first = std::min(it->second.first, p.value);
      it->second.second = std::max(it->second.second, p.value);
    }
  }
  const double mid = kLeft + (kWidth - kLeft - 20) / 2.0;
  const double half = (kWidth - kLeft - 20) / 2.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"10\">\n";
  svg << "<line x1=\"" << Fixed(mid, 2) << "\" y1=\"10\" x2=\"" << Fixed(mid, 2)
      << "\" y2=\"" << height - 20 << "\" stroke=\"#999\"/>\n";
  std::map<std::string, int> seen;
  for (size_t f = 0; f < features.size(); ++f) {
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << 24 + kRow * static_cast<int>(f)
        << "\" text-anchor=\"end\">" << SvgEscape(features[f]) << "</text>\n";
  }
  for (const auto& p : points) {
    const auto f = static_cast<int>(
        std::find(features.begin(), features.end(), p.feature) - features.begin());
    const int k = seen[p.feature]++;
    const double jitter = ((k * 7919) % 13 - 6) * 1.0;
    const auto [lo, hi] = range[p.feature];
    const double t = hi > lo ? (p.value - lo) / (hi - lo) : 0.5;
    const int red = static_cast<int>(std::lround(255 * t));
    const int blue = 255 - red;
    char color[8];
    std::snprintf(color, sizeof color, "#%02x30%02x", red, blue);
    svg << "<circle cx=\"" << Fixed(mid + half * p.phi / span, 2) << "\" cy=\""
        << Fixed(20 + kRow * f + jitter, 2) << "\" r=\"2.5\" fill=\"" << color
        << "\"/>\n";
  }
  svg << "<text x=\"" << Fixed(mid, 2) << "\" y=\"" << height - 6
      << "\" text-anchor=\"middle\">SHAP value</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

class ReportCommand : public Command {
 public:
  explicit ReportCommand(CLI::App* app) {
    app->add_option("--corpus", corpus_, "Corpus JSONL");
    data_.Register(app);
    app->add_option("--bins", bins_, "Histogram bins")
        ->check(CLI::PositiveNumber);
    app->add_option("--beeswarm", beeswarm_, "Beeswarm CSV from explain");
    app->add_option("--out", out_, "Output directory");
  }

  void Run(const Context&) override {
    Corpus corpus = ReadCorpusFile(Require(corpus_, "--corpus"));
    EmotionSource emotions = data_.LoadEmotions();
    EnsureDirectory(out_);
    const fs::path dir(out_);

    std::vector<Histogram> emotion_hists;
    for (const char* side : {"question", "response"}) {
      for (size_t e = 0; e < kNumEmotions; ++e) {
        std::vector<double> v;
        for (const auto& p : corpus.pairs()) {
          const PairEmotions pe = emotions.Get(p);
          v.push_back((side[0] == 'q' ? pe.question : pe.response).values[e]);
        }
        emotion_hists.push_back(EqualWidth(
            std::string(side) + "," + EmotionName(static_cast<Emotion>(e)), v,
            0.0, 1.0, bins_));
      }
    }
    {
      std::ofstream out = OpenOutput((dir / "emotion_histograms.csv").string());
      WriteHistogramCsv(out, "side,emotion", emotion_hists);
    }
    WriteTextFile((dir / "emotion_histograms.svg").string(),
                  RenderHistogramsSvg(emotion_hists, "Emotion score distributions"));

    std::vector<Histogram> length_hists;
    double max_len = 1.0;
    for (const auto& p : corpus.pairs()) {
      max_len = std::max(max_len, static_cast<double>(CharLength(p.response_text)));
    }
    for (const auto& condition : corpus.Conditions()) {
      for (bool helpful : {true, false}) {
        std::vector<double> v;
        for (const auto& p : corpus.pairs()) {
          if (p.condition == condition && p.helpful == helpful) {
            v.push_back(static_cast<double>(CharLength(p.response_text)));
          }
        }
        if (v.empty()) continue;
        length_hists.push_back(EqualWidth(
            condition + "," + (helpful ? "helpful" : "not_helpful"), v, 0.0,
            max_len, bins_));
      }
    }
    {
      std::ofstream out = OpenOutput((dir / "length_distribution.csv").string());
      WriteHistogramCsv(out, "condition,class", length_hists);
    }
    if (!length_hists.empty()) {
      WriteTextFile((dir / "length_distribution.svg").string(),
                    RenderHistogramsSvg(length_hists,
                                        "Response length (characters)"));
    }
    {
      std::ofstream out = OpenOutput((dir / "labels.csv").string());
      out << "condition,issq_positive,issq_total,isr_positive,isr_total\n";
      LabelSummary s = SummarizeLabels(corpus);
      for (const auto& [c, n] : s.per_condition) {
        out << c << ',' << n.issq_positive << ',' << n.issq_total << ','
            << n.isr_positive << ',' << n.isr_total << '\n';
      }
      out << "total," << s.total.issq_positive << ',' << s.total.issq_total
          << ',' << s.total.isr_positive << ',' << s.total.isr_total << '\n';
    }
    if (!beeswarm_.empty()) {
      WriteTextFile((dir / "beeswarm.svg").string(),
                    RenderBeeswarmSvg(ReadBeeswarm(beeswarm_)));
    }
  }

 private:
  std::string corpus_;
  DataFlags data_;
  int bins_ = 10;
  std::string beeswarm_;
  std::string out_;
};

// ---------------------------------------------------------------------------
// Config handling.

void ApplyConfig(CLI::App* sub, const std::map<std::string, std::string>& cfg) {
  for (const auto& [key, value] : cfg) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") throw UsageError("config files cannot nest");
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr) {
      throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
    }
    if (opt->count() > 0) continue;  // the command line wins
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

std::string CanonicalOptions(const CLI::App* sub) {
  std::ostringstream s;
  s << sub->get_name() << '\n';
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt == sub->get_help_ptr() || opt->get_name() == "--config") continue;
    s << opt->get_name() << '=';
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (size_t i = 0; i < results.size(); ++i) s << (i ? "," : "") << results[i];
    } else {
      s << opt->get_default_str();
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace

std::map<std::string, std::string> ParseConfig(std::istream& in) {
  std::map<std::string, std::string> cfg;
  std::string line;
  size_t line_no = 0;
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("empty config key", line_no);
    cfg[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

uint64_t Fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Informational support analysis for online health communities",
               "ohc"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  struct Entry {
    CLI::App* app;
    std::unique_ptr<Command> command;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto make) {
    CLI::App* sub = app.add_subcommand(name, help);
    std::unique_ptr<Command> command = make(sub);
    sub->add_option("--seed", command->seed, "Random seed");
    sub->add_option("--config", command->config, "key=value config file");
    entries.push_back({sub, std::move(command)});
  };
  add("ingest", "Read, sample, split or synthesize a corpus",
      [](CLI::App* a) { return std::make_unique<IngestCommand>(a); });
  add("featurize", "Write handcrafted feature rows as CSV",
      [](CLI::App* a) { return std::make_unique<FeaturizeCommand>(a); });
  add("train", "Train the fusion model or a baseline",
      [](CLI::App* a) { return std::make_unique<TrainCommand>(a); });
  add("evaluate", "Score checkpoints on a labeled corpus",
      [](CLI::App* a) { return std::make_unique<EvaluateCommand>(a); });
  add("ablate", "Retrain with feature groups removed",
      [](CLI::App* a) { return std::make_unique<AblateCommand>(a); });
  add("transfer", "Evaluate a frozen model on another condition",
      [](CLI::App* a) { return std::make_unique<TransferCommand>(a); });
  add("explain", "SHAP attributions for a fusion checkpoint",
      [](CLI::App* a) { return std::make_unique<ExplainCommand>(a); });
  add("stats", "Helpfulness and determinant regressions",
      [](CLI::App* a) { return std::make_unique<StatsCommand>(a); });
  add("report", "Histogram CSVs and SVG figures",
      [](CLI::App* a) { return std::make_unique<ReportCommand>(a); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  for (Entry& e : entries) {
    if (!e.app->parsed()) continue;
    const std::string name = e.app->get_name();
    try {
      const std::string& config = e.command->config;
      if (!config.empty()) {
        std::ifstream in(config);
        if (!in) throw IoError("cannot open config '" + config + "'");
        ApplyConfig(e.app, ParseConfig(in));
      }
      err << "ohc " << name << ": seed=" << e.command->seed
          << " config_hash=" << Hex64(Fnv1a64(CanonicalOptions(e.app))) << "\n";
      e.command->Run(Context{out, err});
    } catch (const UsageError& ex) {
      err << "error: " << ex.what() << "\n\n" << e.app->help();
      return kExitUsage;
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitFailure;
    }
    return kExitOk;
  }
  err << app.help();
  return kExitUsage;
}

int Main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Run(args, std::cout, std::cerr);
}

}  // namespace ohc::cli
