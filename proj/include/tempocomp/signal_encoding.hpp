#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tempocomp/errors.hpp"

namespace tempocomp {

// Physical quantity carried by a waveform. The numeric values double as the
// on-disk kind tag of the TCWF dump format, so they are pinned.
enum class SignalKind : uint32_t {
  OpticalIntensity = 0,  // W, samples must be >= 0
  DriveVoltage = 1,      // V
  Photocurrent = 2,      // A
  Voltage = 3,           // V
};

const char* signal_kind_name(SignalKind kind);

// Uniformly sampled real-valued time series. Immutable by convention once
// built; all device transfer functions return fresh waveforms.
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;  // samples/s
  SignalKind kind = SignalKind::Voltage;

  // Validates: finite samples, positive rate, nonnegativity for
  // OpticalIntensity.
  static Waveform create(std::vector<double> samples, double sample_rate, SignalKind kind);

  size_t size() const { return samples.size(); }
};

// Zero-order-hold symbol framing. One frame is one dot product: N held
// symbols followed by guard_symbols of zero drive, which give the detector
// integrator its reset interval.
struct EncodingScheme {
  double symbol_rate = 10e9;        // symbols/s
  uint32_t samples_per_symbol = 8;  // >= 1
  uint32_t guard_symbols = 4;

  double sample_rate() const { return symbol_rate * samples_per_symbol; }
  size_t frame_samples(size_t n_symbols) const {
    return (n_symbols + guard_symbols) * static_cast<size_t>(samples_per_symbol);
  }
  void validate() const;
};

// Grayscale image with pixels normalized to [0,1], row-major.
struct ImageTensor {
  size_t height = 0;
  size_t width = 0;
  std::vector<double> pixels;

  static ImageTensor create(size_t height, size_t width, std::vector<double> pixels);

  double at(size_t y, size_t x) const { return pixels[y * width + x]; }
  double& at(size_t y, size_t x) { return pixels[y * width + x]; }
  size_t size() const { return pixels.size(); }
};

// pixel = raw/255 exactly.
ImageTensor normalize_pixels(std::span<const uint8_t> raw, size_t height, size_t width);

std::vector<double> flatten_image(const ImageTensor& img);

// Holds each element for samples_per_symbol samples and appends
// guard_symbols of zeros. DriveVoltage streams accept [-1,1], everything
// else [0,1]. An empty vector encodes to an empty waveform.
Waveform encode_vector(std::span<const double> v, const EncodingScheme& scheme, SignalKind kind);

// Mid-symbol sampling; exact inverse of encode_vector in noiseless settings.
std::vector<double> decode_vector(const Waveform& w, const EncodingScheme& scheme, size_t n);

// Arcsine pre-compensation of the null-biased data modulator:
// out = (2 v_pi / pi) * asin(sqrt(m)). Inputs within 1e-12 of [0,1] are
// clamped; anything further out is a range error.
Waveform predistort(const Waveform& m, double v_pi);

}  // namespace tempocomp
