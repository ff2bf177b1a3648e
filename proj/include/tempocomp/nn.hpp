#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tempocomp/matrix.hpp"
#include "tempocomp/signal_encoding.hpp"
#include "tempocomp/summation.hpp"

namespace tempocomp {

// Square-kernel 2-D cross-correlation layer. Kernel entries must fit the
// weight drive range [-1,1].
struct ConvSpec {
  Matrix kernel;
  uint32_t padding = 0;
  uint32_t stride = 1;

  size_t out_dim(size_t in_dim) const;
  void validate() const;
};

// Affine view of a rescaled vector: original = values * scale + offset.
// A constant input collapses to all zeros with scale 0.
struct UnitRescale {
  std::vector<double> values;
  double scale = 1.0;
  double offset = 0.0;
};

UnitRescale rescale_unit(std::span<const double> v);

// Feature map plus the [0,1] view the next photonic layer consumes.
struct ConvResult {
  Matrix raw;
  ImageTensor normalized;
  double scale = 1.0;
  double offset = 0.0;
};

struct FcSpec {
  Matrix weights;                 // one row per class
  std::vector<int> class_labels;  // row -> label

  void validate() const;
};

// Fixed-window detector bank: one template and threshold per label.
struct DetectionSpec {
  uint32_t window = 28;
  uint32_t stride = 10;
  std::vector<int> labels;
  std::vector<Matrix> templates;  // window x window each
  std::vector<double> thresholds;

  size_t grid_dim(size_t image_dim) const;  // patches per axis
  void validate() const;
};

struct Detection {
  int label = 0;
  size_t patch_index = 0;  // 1-based, row-major
  double decision_value = 0.0;
};

struct DetectionResult {
  Matrix decisions;  // patches x classifiers
  std::vector<Detection> detections;
};

// Ground truth for threshold calibration: which patches of a scene hold
// which labels.
struct LabeledScene {
  ImageTensor image;
  std::vector<Detection> truths;  // decision_value ignored
};

// Each padded patch streams as one frame with the flattened kernel as
// weights; frame index y*out_w + x.
ConvResult conv2d_photonic(const ImageTensor& img, const ConvSpec& spec, const EngineConfig& cfg,
                           const CalibrationResult& cal, uint64_t channel = 0);

// One frame per class row; frame index = row.
std::vector<double> fc_forward_photonic(std::span<const double> v, const FcSpec& spec,
                                        const EngineConfig& cfg, const CalibrationResult& cal,
                                        uint64_t channel = 0);

// Argmax; ties go to the lowest index.
size_t classify(std::span<const double> scores);

// Digital minibatch softmax trainer over conv feature maps. Weights come out
// max-abs renormalized so they fit the modulator drive range; argmax
// decisions are unchanged by that scaling.
FcSpec train_fc_digital(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                        const ConvSpec& conv, size_t epochs, double learning_rate,
                        uint64_t rng_seed);

// Scores every window patch against every template, then keeps entries
// strictly above the per-label threshold. Patch frames stream per classifier;
// frame index = classifier*P + patch.
DetectionResult sliding_window_detect(const ImageTensor& img, const DetectionSpec& spec,
                                      const EngineConfig& cfg, const CalibrationResult& cal,
                                      uint64_t channel = 0);

// One-vs-rest logistic templates for the target labels. Negatives are the
// other classes plus grid-shifted copies of the target classes plus blanks,
// so a detector rejects the partial digits that neighbouring windows see.
// Full-batch and deterministic; thresholds are left unset (+inf).
DetectionSpec train_detection_templates(const std::vector<ImageTensor>& images,
                                        const std::vector<int>& labels,
                                        std::span<const int> targets, uint32_t window,
                                        uint32_t stride);

// Sets spec.thresholds to the midpoint between the worst scoring negative
// patch and the best scoring positive patch over the calibration scenes,
// using the exact digital decision matrix.
void calibrate_detection_thresholds(DetectionSpec& spec, std::span<const LabeledScene> scenes);

// 4-neighbour Laplacian scaled by 1/4 to fit the drive range.
Matrix laplacian3x3();

// 5x5 binomial smoothing kernel, peak-normalized well inside [-1,1].
Matrix gaussian5x5();

}  // namespace tempocomp
