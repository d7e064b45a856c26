/*
 Copyright 2026 The Locoforge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef LOCOFORGE_CHECKPOINT_HPP
#define LOCOFORGE_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "locoforge/acppo.hpp"
#include "locoforge/curriculum.hpp"
#include "locoforge/net.hpp"
#include "locoforge/task.hpp"

namespace locoforge {

/// Complete training snapshot: the config the run was started with, the
/// optimizer loop state, the curriculum, and every environment. Restoring
/// it continues the run bit-exactly.
struct TrainCheckpoint {
  std::string config_json;
  TrainerState trainer;
  CurriculumState curriculum;
  std::vector<EnvSnapshot> envs;
};

/// Binary format, versioned. Writing the load of a file reproduces it byte
/// for byte. Loading rejects wrong magic bytes, unsupported versions, and
/// truncated files with a descriptive std::runtime_error.
void save_checkpoint(const std::string& path, const TrainCheckpoint& ckpt);
TrainCheckpoint load_checkpoint(const std::string& path);

/// A pretrained actor on its own, tagged with the observation/action layout
/// hash of the task it was trained against so a stale file cannot silently
/// warm-start a mismatched run.
struct ActorCheckpoint {
  uint64_t layout_hash = 0;
  NetParams actor;
};

void save_actor_checkpoint(const std::string& path, const ActorCheckpoint& ckpt);
ActorCheckpoint load_actor_checkpoint(const std::string& path);

/// Distinguishes the two on-disk formats by magic so one flag can accept
/// either a full training checkpoint or a bare actor.
bool is_train_checkpoint(const std::string& path);

}  // namespace locoforge

#endif  // LOCOFORGE_CHECKPOINT_HPP
