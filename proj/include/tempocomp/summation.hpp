#pragma once

#include <cstdint>
#include <span>

#include "tempocomp/devices.hpp"
#include "tempocomp/matrix.hpp"
#include "tempocomp/signal_encoding.hpp"

namespace tempocomp {

// Full configuration of one weighted-summation unit. Defaults reproduce the
// calibrated bench setup: 1 mW laser, 3.5 V half-wave voltage, alpha = 1/2,
// 150 MHz balanced detector into 10 kOhm, 10 GBaud symbols.
struct EngineConfig {
  LaserParams laser;
  MzmParams mzm_data{3.5, BiasPoint::NullPoint, 0.0};
  MzmParams mzm_weight{3.5, BiasPoint::QuadraturePoint, 0.0};
  VoaParams voa;
  BpdParams bpd;
  EncodingScheme scheme;
  NoiseModel noise;
  Fidelity fidelity = Fidelity::Linearized;
  // deliberate misalignment of the weight stream, in samples; the sync search
  // recovers it
  int sync_offset = 0;
  bool noise_enabled = true;
  // Physical mode only: drive the weight arm with arcsin(w) so the sine
  // transfer lands back on the linear weight
  bool weight_predistort = false;

  void validate() const;
};

struct CalibrationResult {
  double gain = 0.0;             // volts per unit of the digital dot product
  double residual_offset = 0.0;  // volts read back with both streams at zero
  int found_sync_offset = 0;
};

// Substream addressing for noise draws. Every (channel, frame) pair gets its
// own deterministic stream, so batch order and threading cannot change results.
struct FrameContext {
  uint64_t channel = 0;
  uint64_t frame = 0;
};

// The two photodetector inputs for one frame, before detection.
struct OpticalFrame {
  Waveform upper;
  Waveform lower;
};

// Modulate one frame: pre-distorted data through the null-biased MZM, the
// weight stream through the quadrature-biased MZM on the upper split arm,
// the VOA on the lower arm. Noise (when enabled) draws from ctx-addressed
// substreams.
OpticalFrame simulate_optical_frame(std::span<const double> data, std::span<const double> weights,
                                    const EngineConfig& cfg, FrameContext ctx = {});

// Differential photocurrent exactly as the detector stage sees it, noise
// substream included.
Waveform frame_photocurrent(const OpticalFrame& frame, const EngineConfig& cfg,
                            FrameContext ctx = {});

// Balanced detection plus integration over the whole frame window, guard
// included; the reading is the integrator state at the final sample.
double detect_and_integrate(const OpticalFrame& frame, const EngineConfig& cfg,
                            FrameContext ctx = {});

// End-to-end frame voltage, uncalibrated.
double run_frame_voltage(std::span<const double> data, std::span<const double> weights,
                         const EngineConfig& cfg, FrameContext ctx = {});

// Calibrated dot product of one data/weight frame.
double weighted_sum(std::span<const double> data, std::span<const double> weights,
                    const EngineConfig& cfg, const CalibrationResult& cal, FrameContext ctx);
double weighted_sum(std::span<const double> data, std::span<const double> weights,
                    const EngineConfig& cfg, const CalibrationResult& cal);

// All pairings of data rows (M x N) against weight rows (L x N), time
// multiplexed on one simulated channel. Frame index is m * L + l so every
// pair keeps a stable noise substream regardless of evaluation order.
Matrix batched_weighted_sum(const Matrix& data, const Matrix& weights, const EngineConfig& cfg,
                            const CalibrationResult& cal, uint64_t channel = 0);

// Two pilot frames with noise muted: all zeros for the residual offset, then
// sixteen ones for the volts-per-unit gain.
CalibrationResult calibrate_gain(const EngineConfig& cfg);

// Recover the total weight-stream misalignment (cfg.sync_offset plus
// injected_offset): sweep compensating offsets two symbols either side, map
// the pilot to +/-1 weights, and take the peak response. Ties resolve toward
// zero. A constant pilot has no peak.
int find_sync_offset(const EngineConfig& cfg, std::span<const double> pilot, int injected_offset);

}  // namespace tempocomp
