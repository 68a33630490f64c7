#include "wespad/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace wespad {

using json = nlohmann::json;

void RunManifest::add_input(const std::string& label, const std::string& path) {
  inputs[label] = path;
  input_digests[label] = hex64(fnv1a64_file(path));
}

std::string RunManifest::to_json() const {
  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["seed"] = seed;
  if (!config_json.empty()) j["config"] = json::parse(config_json);
  json in = json::object();
  for (const auto& [label, path] : inputs)
    in[label] = json{{"path", path}, {"digest", input_digests.at(label)}};
  j["inputs"] = in;
  if (fold_plan_hash) j["fold_plan_hash"] = *fold_plan_hash;
  j["outputs"] = outputs;
  j["timing_ms"] = timing_ms;
  return j.dump(1);
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest: " + path);
  out << to_json() << "\n";
}

}  // namespace wespad
