// Copyright 2026 The Decision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON checkpoints, format "decision-ckpt-v1":
//
//   {
//     "version": "decision-ckpt-v1",
//     "domain": "rot20",
//     "label_smoothing": 0.1,
//     "classifier_frozen": false,
//     "shape": {"input_dim": 2, "hidden": 64, "feature_dim": 16, "num_classes": 2},
//     "parameters": [
//       {"name": "features.0.weight", "shape": [2, 64], "values": [...]},
//       ...
//     ]
//   }
//
// Parameters appear in the order features.0.{weight,bias},
// features.1.{weight,bias}, classifier.{weight,bias}; values are row-major.

#ifndef DECISION_CHECKPOINT_H_
#define DECISION_CHECKPOINT_H_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "decision/models.h"

namespace decision {

inline constexpr const char* kCheckpointVersion = "decision-ckpt-v1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string SerializeCheckpoint(const SourceModel& model);
SourceModel ParseCheckpoint(const std::string& text);

void SaveCheckpoint(const SourceModel& model, const std::filesystem::path& path);
SourceModel LoadCheckpoint(const std::filesystem::path& path);

}  // namespace decision

#endif  // DECISION_CHECKPOINT_H_
