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

#include "ohc/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "ohc/errors.h"

namespace ohc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

using json = nlohmann::ordered_json;
using Eigen::Index;

constexpr char kMagic[4] = {'O', 'H', 'C', 'K'};
constexpr uint64_t kMaxHeaderBytes = 1ull << 31;

struct Container {
  json header;
  std::vector<std::pair<std::string, std::vector<double>>> tensors;

  void Add(std::string name, std::vector<double> values) {
    tensors.emplace_back(std::move(name), std::move(values));
  }
  const std::vector<double>& Get(const std::string& name) const {
    for (const auto& [n, v] : tensors) {
      if (n == name) return v;
    }
    throw ParseError("checkpoint lacks tensor '" + name + "'");
  }
};

template <typename T>
void WritePod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("checkpoint truncated");
  return v;
}

void WriteContainer(std::ostream& out, Container c) {
  json list = json::array();
  for (const auto& [name, values] : c.tensors) {
    list.push_back({{"name", name}, {"size", values.size()}});
  }
  c.header["tensors"] = list;
  const std::string header = c.header.dump();
  out.write(kMagic, 4);
  WritePod<uint32_t>(out, kCheckpointVersion);
  WritePod<uint64_t>(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& [name, values] : c.tensors) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
}

json ReadHeader(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("not a checkpoint (bad magic)");
  }
  const auto version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto size = ReadPod<uint64_t>(in);
  if (size > kMaxHeaderBytes) throw ParseError("checkpoint header too large");
  std::string header(size, '\0');
  in.read(header.data(), static_cast<std::streamsize>(size));
  if (!in) throw ParseError("checkpoint truncated in header");
  try {
    return json::parse(header);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
}

Container ReadContainer(std::istream& in) {
  Container c;
  c.header = ReadHeader(in);
  try {
    for (const auto& t : c.header.at("tensors")) {
      const auto size = t.at("size").get<uint64_t>();
      std::vector<double> values(size);
      in.read(reinterpret_cast<char*>(values.data()),
              static_cast<std::streamsize>(size * sizeof(double)));
      if (!in) throw ParseError("checkpoint truncated in tensor data");
      c.Add(t.at("name").get<std::string>(), std::move(values));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("checkpoint has trailing bytes");
  }
  return c;
}

void PutFeaturizer(const Featurizer& f, Container* c) {
  const FeaturizerOptions& o = f.options();
  json groups = json::array();
  for (FeatureGroup g : o.groups) groups.push_back(FeatureGroupName(g));
  json j;
  j["task"] = TaskName(o.task);
  j["text_mode"] = TextModeName(o.text_mode);
  j["min_df"] = o.min_df;
  j["tokenizer"] = {{"lowercase", o.tokenizer.lowercase},
                    {"min_token_length", o.tokenizer.min_token_length}};
  j["groups"] = groups;
  j["text_width"] = f.input_schema().text_width;
  j["tfidf_terms"] = f.tfidf().terms();
  j["tfidf_doc_count"] = f.tfidf().doc_count();
  j["categories"] = f.standardizer().categories();
  c->header["featurizer"] = j;
  c->Add("tfidf.idf", f.tfidf().idf());
  c->Add("standardizer.means", f.standardizer().means());
  c->Add("standardizer.stddevs", f.standardizer().stddevs());
}

Featurizer GetFeaturizer(const Container& c) {
  const json& j = c.header.at("featurizer");
  FeaturizerOptions o;
  o.task = ParseTask(j.at("task").get<std::string>());
  o.text_mode = ParseTextMode(j.at("text_mode").get<std::string>());
  o.min_df = j.at("min_df").get<int>();
  o.tokenizer.lowercase = j.at("tokenizer").at("lowercase").get<bool>();
  o.tokenizer.min_token_length =
      j.at("tokenizer").at("min_token_length").get<size_t>();
  o.groups.clear();
  for (const auto& g : j.at("groups")) {
    o.groups.insert(ParseFeatureGroup(g.get<std::string>()));
  }
  TfidfModel tfidf = TfidfModel::FromParts(
      j.at("tfidf_terms").get<std::vector<std::string>>(), c.Get("tfidf.idf"),
      j.at("tfidf_doc_count").get<size_t>(), o.tokenizer);
  Standardizer s = Standardizer::FromParts(
      c.Get("standardizer.means"), c.Get("standardizer.stddevs"),
      j.at("categories").get<std::vector<std::vector<std::string>>>());
  return Featurizer::FromParts(o, std::move(tfidf), std::move(s),
                               j.at("text_width").get<int>());
}

const char* TextKindName(TextInputKind k) {
  switch (k) {
    case TextInputKind::kNone:
      return "none";
    case TextInputKind::kDense:
      return "dense";
    case TextInputKind::kSparse:
      return "sparse";
  }
  return "?";
}

TextInputKind ParseTextKind(const std::string& s) {
  if (s == "none") return TextInputKind::kNone;
  if (s == "dense") return TextInputKind::kDense;
  if (s == "sparse") return TextInputKind::kSparse;
  throw ParseError("unknown text kind '" + s + "' in checkpoint");
}

template <typename Fn>
auto Guard(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return in;
}

}  // namespace

void SavePipeline(std::ostream& out, const TrainedPipeline& p) {
  Container c;
  c.header["kind"] = "fusion";
  const FusionConfig& cfg = p.model.config();
  c.header["config"] = {{"d_text", cfg.d_text},
                        {"d_token", cfg.d_token},
                        {"cat_embed_dim", cfg.cat_embed_dim},
                        {"cat_bottleneck", cfg.cat_bottleneck},
                        {"num_bottleneck", cfg.num_bottleneck},
                        {"fusion_hidden", cfg.fusion_hidden},
                        {"dropout", cfg.dropout},
                        {"leaky_slope", cfg.leaky_slope},
                        {"init_stddev", cfg.init_stddev}};
  const InputSchema& s = p.model.schema();
  c.header["schema"] = {{"text_kind", TextKindName(s.text_kind)},
                        {"text_width", s.text_width},
                        {"numeric_width", s.numeric_width},
                        {"categorical_cardinalities",
                         s.categorical_cardinalities}};
  PutFeaturizer(p.featurizer, &c);
  c.Add("params", p.model.params());
  WriteContainer(out, std::move(c));
}

TrainedPipeline LoadPipeline(std::istream& in) {
  Container c = ReadContainer(in);
  return Guard([&] {
    if (c.header.at("kind") != "fusion") {
      throw ParseError("checkpoint does not hold a fusion model");
    }
    const json& j = c.header.at("config");
    FusionConfig cfg;
    cfg.d_text = j.at("d_text").get<int>();
    cfg.d_token = j.at("d_token").get<int>();
    cfg.cat_embed_dim = j.at("cat_embed_dim").get<int>();
    cfg.cat_bottleneck = j.at("cat_bottleneck").get<int>();
    cfg.num_bottleneck = j.at("num_bottleneck").get<int>();
    cfg.fusion_hidden = j.at("fusion_hidden").get<int>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.leaky_slope = j.at("leaky_slope").get<double>();
    cfg.init_stddev = j.at("init_stddev").get<double>();
    const json& s = c.header.at("schema");
    InputSchema schema;
    schema.text_kind = ParseTextKind(s.at("text_kind").get<std::string>());
    schema.text_width = s.at("text_width").get<int>();
    schema.numeric_width = s.at("numeric_width").get<int>();
    schema.categorical_cardinalities =
        s.at("categorical_cardinalities").get<std::vector<int>>();
    TrainedPipeline p;
    p.featurizer = GetFeaturizer(c);
    if (!(p.featurizer.input_schema() == schema)) {
      throw ParseError("checkpoint featurizer and model schema disagree");
    }
    p.model = FusionModel(cfg, schema);
    const auto& params = c.Get("params");
    if (params.size() != p.model.params().size()) {
      throw ParseError("checkpoint parameter count does not match its layout");
    }
    p.model.params() = params;
    return p;
  });
}

void SaveBaseline(std::ostream& out, const BaselineBundle& b) {
  const BaselineModel& m = b.model;
  const BaselineParams& bp = m.params;
  Container c;
  c.header["kind"] = "baseline";
  c.header["include_text"] = b.include_text;
  c.header["params"] = {{"kind", BaselineKindName(bp.kind)},
                        {"l2", bp.l2},
                        {"svm_epochs", bp.svm_epochs},
                        {"k", bp.k},
                        {"trees", bp.trees},
                        {"forest_depth", bp.forest_depth},
                        {"rounds", bp.rounds},
                        {"shrinkage", bp.shrinkage},
                        {"boost_depth", bp.boost_depth},
                        {"seed", bp.seed}};
  c.header["n_features"] = m.n_features;
  c.header["train_rows"] = m.train_x.rows();
  std::vector<size_t> tree_sizes;
  std::vector<double> feature, threshold, left, right, value;
  for (const auto& t : m.trees) {
    tree_sizes.push_back(t.nodes.size());
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
  }
  c.header["tree_sizes"] = tree_sizes;
  PutFeaturizer(b.featurizer, &c);
  c.Add("scalars", {m.bias, m.platt_a, m.platt_b, m.base_score});
  c.Add("weights", std::vector<double>(m.weights.data(),
                                       m.weights.data() + m.weights.size()));
  // Row-major training rows.
  std::vector<double> tx;
  tx.reserve(static_cast<size_t>(m.train_x.size()));
  for (Index i = 0; i < m.train_x.rows(); ++i) {
    for (Index j = 0; j < m.train_x.cols(); ++j) tx.push_back(m.train_x(i, j));
  }
  c.Add("train_x", std::move(tx));
  c.Add("train_y", std::vector<double>(m.train_y.data(),
                                       m.train_y.data() + m.train_y.size()));
  c.Add("tree.feature", std::move(feature));
  c.Add("tree.threshold", std::move(threshold));
  c.Add("tree.left", std::move(left));
  c.Add("tree.right", std::move(right));
  c.Add("tree.value", std::move(value));
  c.Add("train_loss", m.train_loss);
  WriteContainer(out, std::move(c));
}

BaselineBundle LoadBaseline(std::istream& in) {
  Container c = ReadContainer(in);
  return Guard([&] {
    if (c.header.at("kind") != "baseline") {
      throw ParseError("checkpoint does not hold a baseline model");
    }
    BaselineBundle b;
    b.include_text = c.header.at("include_text").get<bool>();
    const json& j = c.header.at("params");
    BaselineParams& bp = b.model.params;
    bp.kind = ParseBaselineKind(j.at("kind").get<std::string>());
    bp.l2 = j.at("l2").get<double>();
    bp.svm_epochs = j.at("svm_epochs").get<int>();
    bp.k = j.at("k").get<int>();
    bp.trees = j.at("trees").get<int>();
    bp.forest_depth = j.at("forest_depth").get<int>();
    bp.rounds = j.at("rounds").get<int>();
    bp.shrinkage = j.at("shrinkage").get<double>();
    bp.boost_depth = j.at("boost_depth").get<int>();
    bp.seed = j.at("seed").get<uint64_t>();
    BaselineModel& m = b.model;
    m.n_features = c.header.at("n_features").get<int>();
    const auto& scalars = c.Get("scalars");
    if (scalars.size() != 4) throw ParseError("checkpoint scalars malformed");
    m.bias = scalars[0];
    m.platt_a = scalars[1];
    m.platt_b = scalars[2];
    m.base_score = scalars[3];
    const auto& w = c.Get("weights");
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(),
                                                  static_cast<Index>(w.size()));
    const auto rows = c.header.at("train_rows").get<Index>();
    const auto& tx = c.Get("train_x");
    if (static_cast<Index>(tx.size()) != rows * (rows > 0 ? m.n_features : 0)) {
      throw ParseError("checkpoint training rows malformed");
    }
    m.train_x.resize(rows, rows > 0 ? m.n_features : 0);
    for (Index i = 0; i < m.train_x.rows(); ++i) {
      for (Index k = 0; k < m.train_x.cols(); ++k) {
        m.train_x(i, k) = tx[static_cast<size_t>(i * m.train_x.cols() + k)];
      }
    }
    const auto& ty = c.Get("train_y");
    m.train_y = Eigen::Map<const Eigen::VectorXd>(ty.data(),
                                                  static_cast<Index>(ty.size()));
    const auto sizes = c.header.at("tree_sizes").get<std::vector<size_t>>();
    const auto& feature = c.Get("tree.feature");
    const auto& threshold = c.Get("tree.threshold");
    const auto& left = c.Get("tree.left");
    const auto& right = c.Get("tree.right");
    const auto& value = c.Get("tree.value");
    size_t at = 0;
    for (size_t size : sizes) {
      RegressionTree t;
      for (size_t k = 0; k < size; ++k, ++at) {
        if (at >= feature.size()) throw ParseError("checkpoint trees malformed");
        t.nodes.push_back({static_cast<int>(feature[at]), threshold[at],
                           static_cast<int>(left[at]),
                           static_cast<int>(right[at]), value[at]});
      }
      m.trees.push_back(std::move(t));
    }
    m.train_loss = c.Get("train_loss");
    b.featurizer = GetFeaturizer(c);
    return b;
  });
}

CheckpointKind PeekCheckpointKind(std::istream& in) {
  json header = ReadHeader(in);
  const std::string kind = header.value("kind", "");
  if (kind == "fusion") return CheckpointKind::kFusion;
  if (kind == "baseline") return CheckpointKind::kBaseline;
  throw ParseError("checkpoint has unknown kind '" + kind + "'");
}

void SavePipelineFile(const std::string& path, const TrainedPipeline& p) {
  std::ofstream out = OpenOut(path);
  SavePipeline(out, p);
  if (!out) throw IoError("write failure on '" + path + "'");
}

TrainedPipeline LoadPipelineFile(const std::string& path) {
  std::ifstream in = OpenIn(path);
  return LoadPipeline(in);
}

void SaveBaselineFile(const std::string& path, const BaselineBundle& b) {
  std::ofstream out = OpenOut(path);
  SaveBaseline(out, b);
  if (!out) throw IoError("write failure on '" + path + "'");
}

BaselineBundle LoadBaselineFile(const std::string& path) {
  std::ifstream in = OpenIn(path);
  return LoadBaseline(in);
}

CheckpointKind PeekCheckpointKindFile(const std::string& path) {
  std::ifstream in = OpenIn(path);
  return PeekCheckpointKind(in);
}

}  // namespace ohc
