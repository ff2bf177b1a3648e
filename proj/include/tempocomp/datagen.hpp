#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tempocomp/signal_encoding.hpp"

namespace tempocomp {

struct DigitDataset {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
};

// 28x28 anti-aliased stroke render of a digit, canonical pose.
ImageTensor render_digit_clean(int digit);

// Same skeleton under a seeded random pose: shift, rotation, scale, shear,
// pen width, and ink level all vary per seed. severity scales every jitter
// amplitude; 1 is the full classifier-training distribution.
ImageTensor render_digit(int digit, uint64_t seed, double severity = 1.0);

// per_class variants of every digit, classes interleaved so any prefix stays
// balanced. Deterministic in seed.
DigitDataset make_digit_dataset(size_t per_class, uint64_t seed, double severity = 1.0);

// High-contrast procedural flower on a dark ground; edge-detection fixture.
ImageTensor make_flower_image(size_t height = 92, size_t width = 92);

struct Placement {
  ImageTensor image;
  size_t top = 0;
  size_t left = 0;
};

// Black canvas with the placements stamped in (max-combined on overlap).
ImageTensor compose_scene(size_t height, size_t width, std::span<const Placement> placements);

}  // namespace tempocomp
