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

#include "ohc/embeddings.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ohc/errors.h"

namespace ohc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "embedding I/O assumes a little-endian host");

constexpr char kMagic[4] = {'O', 'H', 'C', 'E'};
// Guards allocation on corrupt headers.
constexpr uint32_t kMaxStringBytes = 1u << 20;

template <typename T>
T ReadPod(std::istream& in, const char* what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError(std::string("embedding file truncated in ") + what);
  return value;
}

std::string ReadString(std::istream& in, const char* what) {
  uint32_t len = ReadPod<uint32_t>(in, what);
  if (len > kMaxStringBytes) {
    throw ParseError(std::string("embedding file: oversized ") + what);
  }
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError(std::string("embedding file truncated in ") + what);
  return s;
}

std::vector<float> ReadVector(std::istream& in, uint32_t dim,
                              const std::string& pair_id) {
  std::vector<float> v(dim);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(dim * sizeof(float)));
  if (!in) {
    throw ParseError("embedding file truncated in vector of '" + pair_id +
                     "'");
  }
  for (float x : v) {
    if (!std::isfinite(x)) {
      throw ParseError("embedding file: non-finite value for '" + pair_id +
                       "'");
    }
  }
  return v;
}

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void WriteString(std::ostream& out, const std::string& s) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

EmbeddingFile ReadEmbeddings(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("not an embedding file (bad magic)");
  }
  uint32_t version = ReadPod<uint32_t>(in, "version");
  if (version != kEmbeddingFormatVersion) {
    throw ParseError("unsupported embedding file version " +
                     std::to_string(version));
  }
  EmbeddingFile file;
  file.model_name = ReadString(in, "model_name");
  file.pooling = ReadString(in, "pooling");
  file.dimension = ReadPod<uint32_t>(in, "dimension");
  if (file.dimension == 0) throw ParseError("embedding dimension is zero");
  uint64_t count = ReadPod<uint64_t>(in, "count");
  for (uint64_t i = 0; i < count; ++i) {
    std::string pair_id = ReadString(in, "pair_id");
    EmbeddingRecord rec;
    rec.question = ReadVector(in, file.dimension, pair_id);
    rec.response = ReadVector(in, file.dimension, pair_id);
    if (!file.records.emplace(pair_id, std::move(rec)).second) {
      throw ParseError("duplicate pair_id '" + pair_id +
                       "' in embedding file");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("embedding file has trailing bytes after " +
                     std::to_string(count) + " records");
  }
  return file;
}

EmbeddingFile ReadEmbeddingFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return ReadEmbeddings(in);
}

void WriteEmbeddings(std::ostream& out, const EmbeddingFile& file) {
  out.write(kMagic, 4);
  WritePod<uint32_t>(out, kEmbeddingFormatVersion);
  WriteString(out, file.model_name);
  WriteString(out, file.pooling);
  WritePod<uint32_t>(out, file.dimension);
  WritePod<uint64_t>(out, file.records.size());
  for (const auto& [pair_id, rec] : file.records) {
    if (rec.question.size() != file.dimension ||
        rec.response.size() != file.dimension) {
      throw InvalidArgument("embedding record '" + pair_id +
                            "' does not match the file dimension");
    }
    WriteString(out, pair_id);
    out.write(reinterpret_cast<const char*>(rec.question.data()),
              static_cast<std::streamsize>(file.dimension * sizeof(float)));
    out.write(reinterpret_cast<const char*>(rec.response.data()),
              static_cast<std::streamsize>(file.dimension * sizeof(float)));
  }
}

void WriteEmbeddingFile(const std::string& path, const EmbeddingFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  WriteEmbeddings(out, file);
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace ohc
