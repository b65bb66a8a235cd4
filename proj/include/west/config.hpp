#pragma once

#include <string>
#include <string_view>

#include "west/model.hpp"
#include "west/training.hpp"

namespace west {

// One run's complete flat configuration: corpus paths, model shape,
// optimizer schedule. Every key has a default, so an empty file is a valid
// config; unknown and duplicate keys are rejected.
struct RunConfig {
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string vocab_path; // pre-built vocabulary file; empty = build from train
  std::string out_dir = ".";
  ModelConfig model; // model.vocab_size: 0 = keep every corpus word
  Hyperparameters hp;

  bool operator==(const RunConfig& o) const;
};

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
// Throws "unknown config key: X" / "duplicate config key: X" /
// "invalid value for config key: X".
RunConfig parse_config(std::string_view text);

// Canonical echo: every key in fixed order, one per line, values in
// shortest round-trip form. parse_config(serialize_config(rc)) == rc.
std::string serialize_config(const RunConfig& rc);

} // namespace west
