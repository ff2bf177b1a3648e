#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tempocomp/signal_encoding.hpp"

namespace tempocomp {

struct LaserParams {
  double intensity_in = 1e-3;   // W
  double wavelength = 1550e-9;  // m
  void validate() const;
};

enum class BiasPoint {
  NullPoint,        // intensity ~ sin^2(drive), blocks light at zero drive
  QuadraturePoint,  // 50% transmission rest point, locally linear
};

struct MzmParams {
  double v_pi = 3.5;        // V
  BiasPoint bias = BiasPoint::NullPoint;
  double bias_error = 0.0;  // rad, static offset from the ideal bias phase
  void validate() const;
};

struct VoaParams {
  double alpha = 0.5;  // attenuation coefficient in [0,1]
  void validate() const;
};

enum class IntegratorMode {
  IdealGated,  // perfect charge accumulation, hard reset at frame start
  LeakyRC,     // single-pole RC response, state reset at frame start
};

struct BpdParams {
  double responsivity = 1.0;          // A/W
  double parasitic_resistance = 1e4;  // ohm
  double bandwidth = 150e6;           // Hz
  IntegratorMode integrator_mode = IntegratorMode::IdealGated;

  // Effective integration capacitance, fixed by RC = 1/(2 pi bandwidth).
  double capacitance() const;
  void validate() const;
};

// Impairment magnitudes. The defaults are fitted, not measured: drift and
// detector noise are tuned so the noisy digit-classification accuracy lands
// below the noiseless one by a few percent (see README).
struct NoiseModel {
  double bias_drift_std = 8e-3;       // rad per sqrt(symbol), random-walk step
  double detector_noise_std = 8e-7;   // A, additive white noise on the BPD current
  double sync_jitter_std = 0.0;      // samples, per-frame timing jitter
  uint64_t rng_seed = 1;
  void validate() const;

  NoiseModel quiet() const;  // same seed, all magnitudes zero
};

enum class Fidelity {
  Linearized,  // quadrature MZM treated as exactly linear in the drive
  Physical,    // true sine transfer
};

// Null-biased data modulator: out = i_in * sin^2(pi*drive/(2 v_pi) + phi/2)
// with phi = bias_error plus the optional per-sample drift phase. With zero
// phase error and drive = predistort(M) this returns i_in * M exactly.
Waveform mzm_data_modulate(double i_in, const Waveform& drive, const MzmParams& mzm,
                           std::span<const double> bias_phase = {});

// 3-dB coupler: each output is half the input, per sample.
std::pair<Waveform, Waveform> split_3db(const Waveform& w);

// Quadrature-biased weight modulator acting on the post-split upper path.
// Linearized: out = (i/2) * (1 + pi*w_drive/v_pi), drive restricted to
// |pi*w_drive/v_pi| <= 1. Physical: out = (i/2) * (1 + sin(pi*w_drive/v_pi
// + bias_error + drift)).
Waveform mzm_weight_modulate(const Waveform& i, const Waveform& w_drive, const MzmParams& mzm,
                             Fidelity fidelity, std::span<const double> bias_phase = {});

Waveform voa_attenuate(const Waveform& i, const VoaParams& voa);

// Differential photocurrent R*(upper - lower) plus additive detector noise.
// stream_key selects the deterministic noise substream.
Waveform bpd_differential(const Waveform& upper, const Waveform& lower, const BpdParams& bpd,
                          const NoiseModel& noise, uint64_t stream_key = 0);

// Frame readout voltage. IdealGated sums charge over the window into
// C = 1/(2 pi bandwidth R); LeakyRC runs the exact zero-order-hold
// discretization of dV/dt = (R i - V)/tau with tau = 1/(2 pi bandwidth).
// Integrator state is reset at frame_start; the value at the final window
// sample is returned.
double integrate_frame(const Waveform& i, size_t frame_start, size_t frame_len,
                       const BpdParams& bpd);

// Random-walk bias phase: phi[0] = 0, phi[k] = phi[k-1] + N(0, std^2).
// Deterministic under (rng_seed, stream_key).
std::vector<double> apply_bias_drift(const NoiseModel& noise, size_t n_symbols,
                                     uint64_t stream_key = 0);

}  // namespace tempocomp
