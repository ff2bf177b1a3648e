#include "tempocomp/config.hpp"

#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

#include "tempocomp/errors.hpp"

namespace tempocomp {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
  throw ConfigError("config: unknown key '" + key + "' in " + section);
}

double as_number(const ordered_json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("config: " + where + " must be a number");
  return v.get<double>();
}

bool as_bool(const ordered_json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError("config: " + where + " must be true or false");
  return v.get<bool>();
}

std::string as_string(const ordered_json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError("config: " + where + " must be a string");
  return v.get<std::string>();
}

uint32_t as_u32(const ordered_json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError("config: " + where + " must be a nonnegative integer");
  }
  const int64_t raw = v.get<int64_t>();
  if (raw < 0 || raw > std::numeric_limits<uint32_t>::max()) {
    throw ConfigError("config: " + where + " out of range");
  }
  return static_cast<uint32_t>(raw);
}

uint64_t as_u64(const ordered_json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0) return static_cast<uint64_t>(v.get<int64_t>());
  throw ConfigError("config: " + where + " must be a nonnegative integer");
}

int as_int(const ordered_json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError("config: " + where + " must be an integer");
  }
  const int64_t raw = v.get<int64_t>();
  if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max()) {
    throw ConfigError("config: " + where + " out of range");
  }
  return static_cast<int>(raw);
}

void parse_mzm(const ordered_json& j, const std::string& section, MzmParams& mzm) {
  for (const auto& [key, value] : j.items()) {
    if (key == "v_pi") {
      mzm.v_pi = as_number(value, section + ".v_pi");
    } else if (key == "bias_error") {
      mzm.bias_error = as_number(value, section + ".bias_error");
    } else {
      unknown_key(section, key);
    }
  }
}

void parse_engine(const ordered_json& j, EngineConfig& engine) {
  for (const auto& [key, value] : j.items()) {
    if (key == "laser") {
      for (const auto& [k2, v2] : value.items()) {
        if (k2 == "intensity_in") {
          engine.laser.intensity_in = as_number(v2, "engine.laser.intensity_in");
        } else if (k2 == "wavelength") {
          engine.laser.wavelength = as_number(v2, "engine.laser.wavelength");
        } else {
          unknown_key("engine.laser", k2);
        }
      }
    } else if (key == "mzm_data") {
      parse_mzm(value, "engine.mzm_data", engine.mzm_data);
    } else if (key == "mzm_weight") {
      parse_mzm(value, "engine.mzm_weight", engine.mzm_weight);
    } else if (key == "voa") {
      for (const auto& [k2, v2] : value.items()) {
        if (k2 == "alpha") {
          engine.voa.alpha = as_number(v2, "engine.voa.alpha");
        } else {
          unknown_key("engine.voa", k2);
        }
      }
    } else if (key == "bpd") {
      for (const auto& [k2, v2] : value.items()) {
        if (k2 == "responsivity") {
          engine.bpd.responsivity = as_number(v2, "engine.bpd.responsivity");
        } else if (k2 == "parasitic_resistance") {
          engine.bpd.parasitic_resistance = as_number(v2, "engine.bpd.parasitic_resistance");
        } else if (k2 == "bandwidth") {
          engine.bpd.bandwidth = as_number(v2, "engine.bpd.bandwidth");
        } else if (k2 == "integrator_mode") {
          engine.bpd.integrator_mode =
              integrator_mode_from_string(as_string(v2, "engine.bpd.integrator_mode"));
        } else {
          unknown_key("engine.bpd", k2);
        }
      }
    } else if (key == "scheme") {
      for (const auto& [k2, v2] : value.items()) {
        if (k2 == "symbol_rate") {
          engine.scheme.symbol_rate = as_number(v2, "engine.scheme.symbol_rate");
        } else if (k2 == "samples_per_symbol") {
          engine.scheme.samples_per_symbol = as_u32(v2, "engine.scheme.samples_per_symbol");
        } else if (k2 == "guard_symbols") {
          engine.scheme.guard_symbols = as_u32(v2, "engine.scheme.guard_symbols");
        } else {
          unknown_key("engine.scheme", k2);
        }
      }
    } else if (key == "noise") {
      for (const auto& [k2, v2] : value.items()) {
        if (k2 == "bias_drift_std") {
          engine.noise.bias_drift_std = as_number(v2, "engine.noise.bias_drift_std");
        } else if (k2 == "detector_noise_std") {
          engine.noise.detector_noise_std = as_number(v2, "engine.noise.detector_noise_std");
        } else if (k2 == "sync_jitter_std") {
          engine.noise.sync_jitter_std = as_number(v2, "engine.noise.sync_jitter_std");
        } else if (k2 == "rng_seed") {
          engine.noise.rng_seed = as_u64(v2, "engine.noise.rng_seed");
        } else {
          unknown_key("engine.noise", k2);
        }
      }
    } else if (key == "fidelity") {
      engine.fidelity = fidelity_from_string(as_string(value, "engine.fidelity"));
    } else if (key == "sync_offset") {
      engine.sync_offset = as_int(value, "engine.sync_offset");
    } else if (key == "noise_enabled") {
      engine.noise_enabled = as_bool(value, "engine.noise_enabled");
    } else if (key == "weight_predistort") {
      engine.weight_predistort = as_bool(value, "engine.weight_predistort");
    } else {
      unknown_key("engine", key);
    }
  }
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) return;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw DataError("config: " + what + " '" + path + "' does not exist");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "engine") {
        parse_engine(value, cfg.engine);
      } else if (key == "paths") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "image") {
            cfg.image_path = as_string(v2, "paths.image");
          } else if (k2 == "dataset") {
            cfg.dataset_dir = as_string(v2, "paths.dataset");
          } else if (k2 == "weights") {
            cfg.weights_path = as_string(v2, "paths.weights");
          } else {
            unknown_key("paths", k2);
          }
        }
      } else if (key == "out_dir") {
        cfg.out_dir = as_string(value, "out_dir");
      } else {
        unknown_key("top level", key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.engine.validate();
  require_file(cfg.image_path, "paths.image");
  require_file(cfg.weights_path, "paths.weights");
  if (!cfg.dataset_dir.empty()) {
    std::error_code ec;
    if (!std::filesystem::is_directory(cfg.dataset_dir, ec)) {
      throw DataError("config: paths.dataset '" + cfg.dataset_dir + "' is not a directory");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return parse_run_config(text);
}

std::string serialize_run_config(const RunConfig& cfg) {
  ordered_json j;
  j["engine"]["laser"]["intensity_in"] = cfg.engine.laser.intensity_in;
  j["engine"]["laser"]["wavelength"] = cfg.engine.laser.wavelength;
  j["engine"]["mzm_data"]["v_pi"] = cfg.engine.mzm_data.v_pi;
  j["engine"]["mzm_data"]["bias_error"] = cfg.engine.mzm_data.bias_error;
  j["engine"]["mzm_weight"]["v_pi"] = cfg.engine.mzm_weight.v_pi;
  j["engine"]["mzm_weight"]["bias_error"] = cfg.engine.mzm_weight.bias_error;
  j["engine"]["voa"]["alpha"] = cfg.engine.voa.alpha;
  j["engine"]["bpd"]["responsivity"] = cfg.engine.bpd.responsivity;
  j["engine"]["bpd"]["parasitic_resistance"] = cfg.engine.bpd.parasitic_resistance;
  j["engine"]["bpd"]["bandwidth"] = cfg.engine.bpd.bandwidth;
  j["engine"]["bpd"]["integrator_mode"] = to_string(cfg.engine.bpd.integrator_mode);
  j["engine"]["scheme"]["symbol_rate"] = cfg.engine.scheme.symbol_rate;
  j["engine"]["scheme"]["samples_per_symbol"] = cfg.engine.scheme.samples_per_symbol;
  j["engine"]["scheme"]["guard_symbols"] = cfg.engine.scheme.guard_symbols;
  j["engine"]["noise"]["bias_drift_std"] = cfg.engine.noise.bias_drift_std;
  j["engine"]["noise"]["detector_noise_std"] = cfg.engine.noise.detector_noise_std;
  j["engine"]["noise"]["sync_jitter_std"] = cfg.engine.noise.sync_jitter_std;
  j["engine"]["noise"]["rng_seed"] = cfg.engine.noise.rng_seed;
  j["engine"]["fidelity"] = to_string(cfg.engine.fidelity);
  j["engine"]["sync_offset"] = cfg.engine.sync_offset;
  j["engine"]["noise_enabled"] = cfg.engine.noise_enabled;
  j["engine"]["weight_predistort"] = cfg.engine.weight_predistort;
  j["paths"]["image"] = cfg.image_path;
  j["paths"]["dataset"] = cfg.dataset_dir;
  j["paths"]["weights"] = cfg.weights_path;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

Fidelity fidelity_from_string(const std::string& name) {
  if (name == "linearized") return Fidelity::Linearized;
  if (name == "physical") return Fidelity::Physical;
  throw ConfigError("fidelity must be 'linearized' or 'physical', got '" + name + "'");
}

std::string to_string(Fidelity fidelity) {
  return fidelity == Fidelity::Linearized ? "linearized" : "physical";
}

IntegratorMode integrator_mode_from_string(const std::string& name) {
  if (name == "ideal_gated") return IntegratorMode::IdealGated;
  if (name == "leaky_rc") return IntegratorMode::LeakyRC;
  throw ConfigError("integrator_mode must be 'ideal_gated' or 'leaky_rc', got '" + name + "'");
}

std::string to_string(IntegratorMode mode) {
  return mode == IntegratorMode::IdealGated ? "ideal_gated" : "leaky_rc";
}

}  // namespace tempocomp
