#include "tempocomp/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "tempocomp/errors.hpp"
#include "tempocomp/rng.hpp"

namespace tempocomp {

namespace {

// substream purposes; channel and frame complete the key
constexpr uint64_t kDataDrift = 1;
constexpr uint64_t kWeightDrift = 2;
constexpr uint64_t kDetector = 3;
constexpr uint64_t kJitter = 4;

std::vector<double> hold_per_symbol(const std::vector<double>& per_symbol, uint32_t sps) {
  std::vector<double> out(per_symbol.size() * sps);
  for (size_t k = 0; k < per_symbol.size(); ++k) {
    std::fill_n(out.begin() + static_cast<ptrdiff_t>(k * sps), sps, per_symbol[k]);
  }
  return out;
}

// delay > 0 pushes the stream later (zeros enter at the front)
void shift_in_place(std::vector<double>& s, long long delay) {
  if (delay == 0 || s.empty()) return;
  const long long n = static_cast<long long>(s.size());
  const long long d = std::clamp(delay, -n, n);
  if (d > 0) {
    std::rotate(s.begin(), s.end() - d, s.end());
    std::fill(s.begin(), s.begin() + d, 0.0);
  } else {
    std::rotate(s.begin(), s.begin() - d, s.end());
    std::fill(s.end() + d, s.end(), 0.0);
  }
}

std::vector<double> drift_phase_samples(const NoiseModel& noise, size_t n_symbols, uint32_t sps,
                                        uint64_t purpose, FrameContext ctx) {
  if (noise.bias_drift_std == 0.0) return {};
  auto per_symbol = apply_bias_drift(noise, n_symbols, mix_keys(purpose, ctx.channel, ctx.frame));
  return hold_per_symbol(per_symbol, sps);
}

}  // namespace

void EngineConfig::validate() const {
  laser.validate();
  mzm_data.validate();
  mzm_weight.validate();
  voa.validate();
  bpd.validate();
  scheme.validate();
  noise.validate();
  if (mzm_data.bias != BiasPoint::NullPoint) {
    throw ConfigError("engine data MZM must sit at the null point");
  }
  if (mzm_weight.bias != BiasPoint::QuadraturePoint) {
    throw ConfigError("engine weight MZM must sit at the quadrature point");
  }
  if (bpd.integrator_mode == IntegratorMode::LeakyRC && scheme.guard_symbols < 1) {
    throw ConfigError("leaky integrator needs at least one guard symbol to reset in");
  }
}

OpticalFrame simulate_optical_frame(std::span<const double> data, std::span<const double> weights,
                                    const EngineConfig& cfg, FrameContext ctx) {
  cfg.validate();
  if (data.size() != weights.size()) {
    throw DimensionError("frame data length " + std::to_string(data.size()) +
                         " != weight length " + std::to_string(weights.size()));
  }
  const NoiseModel noise = cfg.noise_enabled ? cfg.noise : cfg.noise.quiet();
  const uint32_t sps = cfg.scheme.samples_per_symbol;
  const size_t n_symbols = data.size() + cfg.scheme.guard_symbols;

  Waveform m = encode_vector(data, cfg.scheme, SignalKind::OpticalIntensity);
  Waveform m_drive = predistort(m, cfg.mzm_data.v_pi);
  // the data MZM is always the physical sin^2 device, so its drift matters in
  // both fidelity modes
  auto phi_data = drift_phase_samples(noise, n_symbols, sps, kDataDrift, ctx);
  Waveform modulated = mzm_data_modulate(cfg.laser.intensity_in, m_drive, cfg.mzm_data, phi_data);
  auto [upper_in, lower_in] = split_3db(modulated);

  Waveform w_norm = encode_vector(weights, cfg.scheme, SignalKind::DriveVoltage);
  const bool arcsin_drive = cfg.fidelity == Fidelity::Physical && cfg.weight_predistort;
  const double volts_per_unit = cfg.mzm_weight.v_pi / std::numbers::pi;
  std::vector<double> w_volts(w_norm.samples.size());
  for (size_t n = 0; n < w_volts.size(); ++n) {
    const double w = w_norm.samples[n];
    w_volts[n] = volts_per_unit * (arcsin_drive ? std::asin(std::clamp(w, -1.0, 1.0)) : w);
  }
  long long delay = cfg.sync_offset;
  if (noise.sync_jitter_std > 0.0) {
    RngStream jitter(mix_keys(noise.rng_seed, mix_keys(kJitter, ctx.channel, ctx.frame)));
    delay += std::llround(noise.sync_jitter_std * jitter.gaussian());
  }
  shift_in_place(w_volts, delay);
  Waveform w_drive = Waveform::create(std::move(w_volts), w_norm.sample_rate,
                                      SignalKind::DriveVoltage);

  std::vector<double> phi_weight;
  if (cfg.fidelity == Fidelity::Physical) {
    phi_weight = drift_phase_samples(noise, n_symbols, sps, kWeightDrift, ctx);
  }
  OpticalFrame frame;
  frame.upper = mzm_weight_modulate(upper_in, w_drive, cfg.mzm_weight, cfg.fidelity, phi_weight);
  frame.lower = voa_attenuate(lower_in, cfg.voa);
  return frame;
}

Waveform frame_photocurrent(const OpticalFrame& frame, const EngineConfig& cfg, FrameContext ctx) {
  const NoiseModel noise = cfg.noise_enabled ? cfg.noise : cfg.noise.quiet();
  return bpd_differential(frame.upper, frame.lower, cfg.bpd, noise,
                          mix_keys(kDetector, ctx.channel, ctx.frame));
}

double detect_and_integrate(const OpticalFrame& frame, const EngineConfig& cfg, FrameContext ctx) {
  Waveform i = frame_photocurrent(frame, cfg, ctx);
  return integrate_frame(i, 0, i.samples.size(), cfg.bpd);
}

double run_frame_voltage(std::span<const double> data, std::span<const double> weights,
                         const EngineConfig& cfg, FrameContext ctx) {
  return detect_and_integrate(simulate_optical_frame(data, weights, cfg, ctx), cfg, ctx);
}

double weighted_sum(std::span<const double> data, std::span<const double> weights,
                    const EngineConfig& cfg, const CalibrationResult& cal, FrameContext ctx) {
  if (!(cal.gain > 0.0) || !std::isfinite(cal.gain)) {
    throw CalibrationError("calibration gain must be positive; run calibrate_gain first");
  }
  return (run_frame_voltage(data, weights, cfg, ctx) - cal.residual_offset) / cal.gain;
}

double weighted_sum(std::span<const double> data, std::span<const double> weights,
                    const EngineConfig& cfg, const CalibrationResult& cal) {
  return weighted_sum(data, weights, cfg, cal, FrameContext{});
}

Matrix batched_weighted_sum(const Matrix& data, const Matrix& weights, const EngineConfig& cfg,
                            const CalibrationResult& cal, uint64_t channel) {
  if (data.cols != weights.cols) {
    throw DimensionError("batched_weighted_sum: data has " + std::to_string(data.cols) +
                         " columns, weights have " + std::to_string(weights.cols));
  }
  Matrix out(data.rows, weights.rows);
  for (size_t m = 0; m < data.rows; ++m) {
    for (size_t l = 0; l < weights.rows; ++l) {
      FrameContext ctx{channel, static_cast<uint64_t>(m * weights.rows + l)};
      out.at(m, l) = weighted_sum(data.row(m), weights.row(l), cfg, cal, ctx);
    }
  }
  return out;
}

CalibrationResult calibrate_gain(const EngineConfig& cfg) {
  cfg.validate();
  EngineConfig pilot_cfg = cfg;
  pilot_cfg.noise_enabled = false;
  constexpr size_t kPilotLen = 16;
  const std::vector<double> zeros(kPilotLen, 0.0);
  const std::vector<double> ones(kPilotLen, 1.0);
  CalibrationResult cal;
  cal.residual_offset = run_frame_voltage(zeros, zeros, pilot_cfg, {});
  const double v_ones = run_frame_voltage(ones, ones, pilot_cfg, {});
  cal.gain = (v_ones - cal.residual_offset) / static_cast<double>(kPilotLen);
  cal.found_sync_offset = cfg.sync_offset;
  if (!(cal.gain > 0.0) || !std::isfinite(cal.gain)) {
    throw CalibrationError("degenerate calibration gain " + std::to_string(cal.gain));
  }
  return cal;
}

int find_sync_offset(const EngineConfig& cfg, std::span<const double> pilot, int injected_offset) {
  cfg.validate();
  if (pilot.size() < 32) {
    throw DimensionError("sync pilot needs at least 32 symbols, got " +
                         std::to_string(pilot.size()));
  }
  const bool constant = std::all_of(pilot.begin(), pilot.end(),
                                    [&](double x) { return x == pilot[0]; });
  if (constant) {
    throw CalibrationError("constant sync pilot gives a flat response curve");
  }
  // +/-1 mapped weights make the response an autocorrelation that peaks at
  // perfect alignment
  std::vector<double> probe_weights(pilot.size());
  for (size_t k = 0; k < pilot.size(); ++k) probe_weights[k] = 2.0 * pilot[k] - 1.0;

  const int span = 2 * static_cast<int>(cfg.scheme.samples_per_symbol);
  double best_score = -std::numeric_limits<double>::infinity();
  double worst_score = std::numeric_limits<double>::infinity();
  int best = 0;
  for (int c = -span; c <= span; ++c) {
    EngineConfig probe = cfg;
    probe.sync_offset = cfg.sync_offset + injected_offset - c;
    FrameContext ctx{0, static_cast<uint64_t>(c + span)};
    const double score = run_frame_voltage(pilot, probe_weights, probe, ctx);
    worst_score = std::min(worst_score, score);
    if (score > best_score || (score == best_score && std::abs(c) < std::abs(best))) {
      best_score = score;
      best = c;
    }
  }
  if (!(best_score > worst_score)) {
    throw CalibrationError("sync response curve is flat; pilot carries no timing information");
  }
  return best;
}

}  // namespace tempocomp
