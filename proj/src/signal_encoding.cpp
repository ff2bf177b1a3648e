#include "tempocomp/signal_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tempocomp {

const char* signal_kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::OpticalIntensity:
      return "optical_intensity";
    case SignalKind::DriveVoltage:
      return "drive_voltage";
    case SignalKind::Photocurrent:
      return "photocurrent";
    case SignalKind::Voltage:
      return "voltage";
  }
  return "unknown";
}

Waveform Waveform::create(std::vector<double> samples, double sample_rate, SignalKind kind) {
  if (!(sample_rate > 0.0)) {
    throw RangeError("waveform sample_rate must be positive");
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw NumericError("waveform sample " + std::to_string(i) + " is not finite");
    }
    if (kind == SignalKind::OpticalIntensity && samples[i] < 0.0) {
      throw RangeError("optical intensity sample " + std::to_string(i) + " is negative");
    }
  }
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = sample_rate;
  w.kind = kind;
  return w;
}

void EncodingScheme::validate() const {
  if (!(symbol_rate > 0.0)) throw ConfigError("symbol_rate must be positive");
  if (samples_per_symbol < 1) throw ConfigError("samples_per_symbol must be at least 1");
}

ImageTensor ImageTensor::create(size_t height, size_t width, std::vector<double> pixels) {
  if (height == 0 || width == 0) throw DimensionError("image dimensions must be positive");
  if (pixels.size() != height * width) {
    throw DimensionError("pixel count " + std::to_string(pixels.size()) + " does not match " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  for (size_t i = 0; i < pixels.size(); ++i) {
    if (!std::isfinite(pixels[i]) || pixels[i] < 0.0 || pixels[i] > 1.0) {
      throw RangeError("pixel " + std::to_string(i) + " outside [0,1]");
    }
  }
  ImageTensor img;
  img.height = height;
  img.width = width;
  img.pixels = std::move(pixels);
  return img;
}

ImageTensor normalize_pixels(std::span<const uint8_t> raw, size_t height, size_t width) {
  if (raw.size() != height * width) {
    throw DimensionError("raw length " + std::to_string(raw.size()) + " does not match " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  std::vector<double> px(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) px[i] = raw[i] / 255.0;
  return ImageTensor::create(height, width, std::move(px));
}

std::vector<double> flatten_image(const ImageTensor& img) {
  return img.pixels;  // already row-major
}

Waveform encode_vector(std::span<const double> v, const EncodingScheme& scheme, SignalKind kind) {
  scheme.validate();
  const double lo = (kind == SignalKind::DriveVoltage) ? -1.0 : 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError("encode_vector: element " + std::to_string(i) + " is not finite");
    }
    if (v[i] < lo || v[i] > 1.0) {
      throw RangeError("encode_vector: element " + std::to_string(i) + " = " +
                       std::to_string(v[i]) + " outside [" + std::to_string(lo) + ",1]");
    }
  }
  std::vector<double> s;
  if (!v.empty()) {
    s.reserve(scheme.frame_samples(v.size()));
    for (double x : v) {
      s.insert(s.end(), scheme.samples_per_symbol, x);
    }
    s.insert(s.end(), static_cast<size_t>(scheme.guard_symbols) * scheme.samples_per_symbol, 0.0);
  }
  return Waveform::create(std::move(s), scheme.sample_rate(), kind);
}

std::vector<double> decode_vector(const Waveform& w, const EncodingScheme& scheme, size_t n) {
  scheme.validate();
  const size_t sps = scheme.samples_per_symbol;
  if (n * sps > w.samples.size()) {
    throw DimensionError("decode_vector: waveform holds fewer than " + std::to_string(n) +
                         " symbols");
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = w.samples[i * sps + sps / 2];
  return out;
}

Waveform predistort(const Waveform& m, double v_pi) {
  if (!(v_pi > 0.0)) throw RangeError("v_pi must be positive");
  constexpr double tol = 1e-12;
  const double k = 2.0 * v_pi / std::numbers::pi;
  std::vector<double> out(m.samples.size());
  for (size_t i = 0; i < m.samples.size(); ++i) {
    double x = m.samples[i];
    if (x < -tol || x > 1.0 + tol) {
      throw RangeError("predistort: sample " + std::to_string(i) + " = " + std::to_string(x) +
                       " outside [0,1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    // k * asin(1) can land one ulp above v_pi; the drive range is [0, v_pi]
    out[i] = std::min(k * std::asin(std::sqrt(x)), v_pi);
  }
  return Waveform::create(std::move(out), m.sample_rate, SignalKind::DriveVoltage);
}

}  // namespace tempocomp
