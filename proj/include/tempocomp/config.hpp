#pragma once

#include <filesystem>
#include <string>

#include "tempocomp/summation.hpp"

namespace tempocomp {

// One experiment's full setup: engine physics, input locations, output
// directory. Everything is optional in the JSON; defaults are the bench
// values baked into EngineConfig.
struct RunConfig {
  EngineConfig engine;
  std::string image_path;
  std::string dataset_dir;
  std::string weights_path;
  std::string out_dir = "out";
};

// Strict parse: unknown keys are rejected, referenced paths must exist.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Emits every field, defaults included, so configs diff cleanly.
std::string serialize_run_config(const RunConfig& cfg);

Fidelity fidelity_from_string(const std::string& name);
std::string to_string(Fidelity fidelity);
IntegratorMode integrator_mode_from_string(const std::string& name);
std::string to_string(IntegratorMode mode);

}  // namespace tempocomp
