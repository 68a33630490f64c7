#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wespad/common.hpp"

namespace wespad {

// Reproducibility sidecar emitted next to every CLI output: the exact
// configuration, input-file digests, seed, tool version, and wall time.
// Identical manifests (timing aside) imply identical outputs.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_json;  // empty when the command has no model config
  std::map<std::string, std::string> inputs;  // label -> path
  std::map<std::string, std::string> input_digests;  // label -> fnv1a64 hex
  std::optional<std::string> fold_plan_hash;
  std::vector<std::string> outputs;
  double timing_ms = 0.0;

  void add_input(const std::string& label, const std::string& path);  // digests the file
  std::string to_json() const;
  void write(const std::string& path) const;
};

}  // namespace wespad
