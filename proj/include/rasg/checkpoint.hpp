#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "rasg/config.hpp"
#include "rasg/corpus.hpp"
#include "rasg/model.hpp"

namespace rasg {

// Checkpoint directory layout:
//   manifest.json  step, config hash, ordered block shapes
//   params.bin     column-major little-endian doubles, blocks concatenated
//   optim.bin      Adagrad accumulators, same layout
//   config.json, vocab.json
// load(save(x)) is bit-exact.
void save_checkpoint(const std::filesystem::path& dir, const Model& model,
                     const Vocabulary& vocab, int step);

struct LoadedCheckpoint {
  TrainingConfig config;
  Vocabulary vocab;
  int step = 0;
  std::unique_ptr<Model> model;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

std::string checkpoint_config_hash(const std::filesystem::path& dir);

}  // namespace rasg
