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

// Reader and writer for precomputed sentence-embedding files.
//
// Layout, all integers little-endian:
//
//   magic        4 bytes  "OHCE"
//   version      u32      1
//   model_name   u32 byte length + UTF-8 bytes
//   pooling      u32 byte length + UTF-8 bytes (e.g. "mean")
//   dimension    u32
//   count        u64
//   count records:
//     pair_id    u32 byte length + UTF-8 bytes
//     q_vector   dimension x float32 (IEEE-754, little-endian)
//     r_vector   dimension x float32
//
// Nothing may follow the last record.

#ifndef OHC_EMBEDDINGS_H_
#define OHC_EMBEDDINGS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ohc {

inline constexpr uint32_t kEmbeddingFormatVersion = 1;

struct EmbeddingRecord {
  std::vector<float> question;
  std::vector<float> response;
  bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingFile {
  std::string model_name;
  std::string pooling = "mean";
  uint32_t dimension = 0;
  // Keyed by pair_id; written in key order.
  std::map<std::string, EmbeddingRecord> records;
  bool operator==(const EmbeddingFile&) const = default;
};

// Validates magic, version, record count, dimensions and finiteness.
EmbeddingFile ReadEmbeddings(std::istream& in);
EmbeddingFile ReadEmbeddingFile(const std::string& path);
void WriteEmbeddings(std::ostream& out, const EmbeddingFile& file);
void WriteEmbeddingFile(const std::string& path, const EmbeddingFile& file);

}  // namespace ohc

#endif  // OHC_EMBEDDINGS_H_
