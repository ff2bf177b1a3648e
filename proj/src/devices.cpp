#include "tempocomp/devices.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tempocomp/rng.hpp"

namespace tempocomp {

namespace {

constexpr double kPi = std::numbers::pi;

void require_kind(const Waveform& w, SignalKind kind, const char* what) {
  if (w.kind != kind) {
    throw ConfigError(std::string(what) + ": expected " + signal_kind_name(kind) + " waveform, got " +
                      signal_kind_name(w.kind));
  }
}

void require_aligned(const Waveform& a, const Waveform& b, const char* what) {
  if (a.samples.size() != b.samples.size()) {
    throw DimensionError(std::string(what) + ": length mismatch (" +
                         std::to_string(a.samples.size()) + " vs " +
                         std::to_string(b.samples.size()) + ")");
  }
  if (a.sample_rate != b.sample_rate) {
    throw DimensionError(std::string(what) + ": sample rate mismatch");
  }
}

}  // namespace

void LaserParams::validate() const {
  if (!(intensity_in > 0.0)) throw ConfigError("laser intensity_in must be positive");
  if (!(wavelength > 0.0)) throw ConfigError("laser wavelength must be positive");
}

void MzmParams::validate() const {
  if (!(v_pi > 0.0)) throw ConfigError("mzm v_pi must be positive");
  if (!std::isfinite(bias_error)) throw ConfigError("mzm bias_error must be finite");
}

void VoaParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("voa alpha must be in [0,1]");
}

double BpdParams::capacitance() const { return 1.0 / (2.0 * kPi * bandwidth * parasitic_resistance); }

void BpdParams::validate() const {
  if (!(responsivity > 0.0)) throw ConfigError("bpd responsivity must be positive");
  if (!(parasitic_resistance > 0.0)) throw ConfigError("bpd parasitic_resistance must be positive");
  if (!(bandwidth > 0.0)) throw ConfigError("bpd bandwidth must be positive");
}

void NoiseModel::validate() const {
  if (bias_drift_std < 0.0 || detector_noise_std < 0.0 || sync_jitter_std < 0.0) {
    throw ConfigError("noise std fields must be nonnegative");
  }
}

NoiseModel NoiseModel::quiet() const {
  NoiseModel q = *this;
  q.bias_drift_std = 0.0;
  q.detector_noise_std = 0.0;
  q.sync_jitter_std = 0.0;
  return q;
}

Waveform mzm_data_modulate(double i_in, const Waveform& drive, const MzmParams& mzm,
                           std::span<const double> bias_phase) {
  mzm.validate();
  if (mzm.bias != BiasPoint::NullPoint) {
    throw ConfigError("data MZM must be biased at the null-transmission point");
  }
  if (i_in < 0.0 || !std::isfinite(i_in)) throw RangeError("input intensity must be nonnegative");
  require_kind(drive, SignalKind::DriveVoltage, "mzm_data_modulate");
  if (!bias_phase.empty() && bias_phase.size() != drive.samples.size()) {
    throw DimensionError("mzm_data_modulate: bias phase length mismatch");
  }
  const double k = kPi / (2.0 * mzm.v_pi);
  std::vector<double> out(drive.samples.size());
  for (size_t n = 0; n < out.size(); ++n) {
    const double phi = mzm.bias_error + (bias_phase.empty() ? 0.0 : bias_phase[n]);
    const double s = std::sin(k * drive.samples[n] + 0.5 * phi);
    out[n] = i_in * s * s;
  }
  return Waveform::create(std::move(out), drive.sample_rate, SignalKind::OpticalIntensity);
}

std::pair<Waveform, Waveform> split_3db(const Waveform& w) {
  require_kind(w, SignalKind::OpticalIntensity, "split_3db");
  std::vector<double> half(w.samples.size());
  for (size_t n = 0; n < half.size(); ++n) half[n] = 0.5 * w.samples[n];
  Waveform a = Waveform::create(half, w.sample_rate, SignalKind::OpticalIntensity);
  Waveform b = Waveform::create(std::move(half), w.sample_rate, SignalKind::OpticalIntensity);
  return {std::move(a), std::move(b)};
}

Waveform mzm_weight_modulate(const Waveform& i, const Waveform& w_drive, const MzmParams& mzm,
                             Fidelity fidelity, std::span<const double> bias_phase) {
  mzm.validate();
  if (mzm.bias != BiasPoint::QuadraturePoint) {
    throw ConfigError("weight MZM must be biased at the quadrature transmission point");
  }
  require_kind(i, SignalKind::OpticalIntensity, "mzm_weight_modulate");
  require_kind(w_drive, SignalKind::DriveVoltage, "mzm_weight_modulate");
  require_aligned(i, w_drive, "mzm_weight_modulate");
  if (!bias_phase.empty() && bias_phase.size() != i.samples.size()) {
    throw DimensionError("mzm_weight_modulate: bias phase length mismatch");
  }
  // rounding slack on the linear-range check
  constexpr double tol = 1e-9;
  const double k = kPi / mzm.v_pi;
  std::vector<double> out(i.samples.size());
  for (size_t n = 0; n < out.size(); ++n) {
    const double x = k * w_drive.samples[n];
    double bracket;
    if (fidelity == Fidelity::Linearized) {
      if (std::abs(x) > 1.0 + tol) {
        throw RangeError("mzm_weight_modulate: drive sample " + std::to_string(n) +
                         " outside the linear range (|pi*w/v_pi| = " + std::to_string(std::abs(x)) +
                         " > 1)");
      }
      bracket = std::clamp(1.0 + x, 0.0, 2.0);
    } else {
      const double phi = mzm.bias_error + (bias_phase.empty() ? 0.0 : bias_phase[n]);
      bracket = 1.0 + std::sin(x + phi);
    }
    out[n] = 0.5 * i.samples[n] * bracket;
  }
  return Waveform::create(std::move(out), i.sample_rate, SignalKind::OpticalIntensity);
}

Waveform voa_attenuate(const Waveform& i, const VoaParams& voa) {
  voa.validate();
  require_kind(i, SignalKind::OpticalIntensity, "voa_attenuate");
  std::vector<double> out(i.samples.size());
  for (size_t n = 0; n < out.size(); ++n) out[n] = voa.alpha * i.samples[n];
  return Waveform::create(std::move(out), i.sample_rate, SignalKind::OpticalIntensity);
}

Waveform bpd_differential(const Waveform& upper, const Waveform& lower, const BpdParams& bpd,
                          const NoiseModel& noise, uint64_t stream_key) {
  bpd.validate();
  noise.validate();
  require_kind(upper, SignalKind::OpticalIntensity, "bpd_differential");
  require_kind(lower, SignalKind::OpticalIntensity, "bpd_differential");
  require_aligned(upper, lower, "bpd_differential");
  std::vector<double> out(upper.samples.size());
  for (size_t n = 0; n < out.size(); ++n) {
    out[n] = bpd.responsivity * (upper.samples[n] - lower.samples[n]);
  }
  if (noise.detector_noise_std > 0.0) {
    RngStream rng(mix_keys(noise.rng_seed, stream_key));
    for (double& s : out) s += noise.detector_noise_std * rng.gaussian();
  }
  return Waveform::create(std::move(out), upper.sample_rate, SignalKind::Photocurrent);
}

double integrate_frame(const Waveform& i, size_t frame_start, size_t frame_len,
                       const BpdParams& bpd) {
  bpd.validate();
  require_kind(i, SignalKind::Photocurrent, "integrate_frame");
  if (frame_start + frame_len > i.samples.size()) {
    throw DimensionError("integrate_frame: window [" + std::to_string(frame_start) + "," +
                         std::to_string(frame_start + frame_len) + ") outside waveform of " +
                         std::to_string(i.samples.size()) + " samples");
  }
  const double dt = 1.0 / i.sample_rate;
  if (bpd.integrator_mode == IntegratorMode::IdealGated) {
    // Kahan-compensated charge sum; V = Q/C
    double sum = 0.0, comp = 0.0;
    for (size_t n = frame_start; n < frame_start + frame_len; ++n) {
      const double y = i.samples[n] - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum * dt / bpd.capacitance();
  }
  // LeakyRC: exact ZOH discretization of dV/dt = (R i - V)/tau
  const double tau = 1.0 / (2.0 * kPi * bpd.bandwidth);
  const double a = std::exp(-dt / tau);
  double v = 0.0;
  for (size_t n = frame_start; n < frame_start + frame_len; ++n) {
    v = a * v + (1.0 - a) * bpd.parasitic_resistance * i.samples[n];
  }
  return v;
}

std::vector<double> apply_bias_drift(const NoiseModel& noise, size_t n_symbols,
                                     uint64_t stream_key) {
  noise.validate();
  std::vector<double> phi(n_symbols, 0.0);
  if (n_symbols == 0 || noise.bias_drift_std == 0.0) return phi;
  RngStream rng(mix_keys(noise.rng_seed, stream_key));
  for (size_t k = 1; k < n_symbols; ++k) {
    phi[k] = phi[k - 1] + noise.bias_drift_std * rng.gaussian();
  }
  return phi;
}

}  // namespace tempocomp
