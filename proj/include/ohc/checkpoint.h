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

// Model checkpoints.
//
// Container layout (little-endian):
//   "OHCK"  u32 version  u64 header_bytes  header (JSON)  tensor data
// The header records the model kind, configuration, featurizer state and an
// ordered list of (name, size) tensors whose float64 values follow in order.
// Nothing time- or host-dependent is written, so saving the same model twice
// yields identical bytes.

#ifndef OHC_CHECKPOINT_H_
#define OHC_CHECKPOINT_H_

#include <iosfwd>
#include <string>

#include "ohc/learners.h"
#include "ohc/pipeline.h"

namespace ohc {

inline constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointKind { kFusion, kBaseline };

struct BaselineBundle {
  Featurizer featurizer;
  BaselineModel model;
  bool include_text = false;  // design matrix carries the text vectors
};

void SavePipeline(std::ostream& out, const TrainedPipeline& pipeline);
TrainedPipeline LoadPipeline(std::istream& in);

void SaveBaseline(std::ostream& out, const BaselineBundle& bundle);
BaselineBundle LoadBaseline(std::istream& in);

// Reads only as far as the header.
CheckpointKind PeekCheckpointKind(std::istream& in);

void SavePipelineFile(const std::string& path, const TrainedPipeline& pipeline);
TrainedPipeline LoadPipelineFile(const std::string& path);
void SaveBaselineFile(const std::string& path, const BaselineBundle& bundle);
BaselineBundle LoadBaselineFile(const std::string& path);
CheckpointKind PeekCheckpointKindFile(const std::string& path);

}  // namespace ohc

#endif  // OHC_CHECKPOINT_H_
