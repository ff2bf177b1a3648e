#include "tempocomp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>
#include <vector>

#include "tempocomp/errors.hpp"
#include "tempocomp/oracle.hpp"
#include "tempocomp/rng.hpp"

namespace tempocomp {

namespace {

constexpr size_t kDigitClasses = 10;

void require_drive_range(const Matrix& m, const char* what) {
  for (double x : m.data) {
    if (!std::isfinite(x) || x < -1.0 || x > 1.0) {
      throw RangeError(std::string(what) + " entries must lie in [-1,1]");
    }
  }
}

// zero-padded patch around output cell (y,x), flattened row-major
void fill_conv_patch(const ImageTensor& img, const ConvSpec& spec, size_t y, size_t x,
                     std::vector<double>& patch) {
  const size_t k = spec.kernel.rows;
  for (size_t ky = 0; ky < k; ++ky) {
    for (size_t kx = 0; kx < k; ++kx) {
      const long long sy = static_cast<long long>(y * spec.stride + ky) - spec.padding;
      const long long sx = static_cast<long long>(x * spec.stride + kx) - spec.padding;
      const bool inside = sy >= 0 && sx >= 0 && sy < static_cast<long long>(img.height) &&
                          sx < static_cast<long long>(img.width);
      patch[ky * k + kx] =
          inside ? img.at(static_cast<size_t>(sy), static_cast<size_t>(sx)) : 0.0;
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - top);
    total += p[c];
  }
  for (double& v : p) v /= total;
  return p;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// image translated by (dy,dx), zero fill
std::vector<double> shifted_pixels(const ImageTensor& img, long long dy, long long dx) {
  std::vector<double> out(img.size(), 0.0);
  for (size_t y = 0; y < img.height; ++y) {
    const long long sy = static_cast<long long>(y) - dy;
    if (sy < 0 || sy >= static_cast<long long>(img.height)) continue;
    for (size_t x = 0; x < img.width; ++x) {
      const long long sx = static_cast<long long>(x) - dx;
      if (sx < 0 || sx >= static_cast<long long>(img.width)) continue;
      out[y * img.width + x] = img.at(static_cast<size_t>(sy), static_cast<size_t>(sx));
    }
  }
  return out;
}

}  // namespace

size_t ConvSpec::out_dim(size_t in_dim) const {
  const size_t padded = in_dim + 2 * static_cast<size_t>(padding);
  if (padded < kernel.rows) {
    throw DimensionError("kernel of " + std::to_string(kernel.rows) +
                         " exceeds padded image extent " + std::to_string(padded));
  }
  return (padded - kernel.rows) / stride + 1;
}

void ConvSpec::validate() const {
  if (kernel.rows == 0 || kernel.rows != kernel.cols) {
    throw DimensionError("conv kernel must be square and nonempty");
  }
  if (stride < 1) throw ConfigError("conv stride must be at least 1");
  require_drive_range(kernel, "conv kernel");
}

UnitRescale rescale_unit(std::span<const double> v) {
  UnitRescale r;
  r.values.assign(v.begin(), v.end());
  if (v.empty()) {
    r.scale = 0.0;
    return r;
  }
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  r.offset = *lo_it;
  r.scale = *hi_it - *lo_it;
  if (r.scale == 0.0) {
    std::fill(r.values.begin(), r.values.end(), 0.0);
    return r;
  }
  for (double& x : r.values) x = (x - r.offset) / r.scale;
  return r;
}

void FcSpec::validate() const {
  if (weights.rows == 0 || weights.cols == 0) {
    throw DimensionError("fc weights must be nonempty");
  }
  if (class_labels.size() != weights.rows) {
    throw DimensionError("fc has " + std::to_string(weights.rows) + " rows but " +
                         std::to_string(class_labels.size()) + " labels");
  }
  require_drive_range(weights, "fc weight");
}

size_t DetectionSpec::grid_dim(size_t image_dim) const {
  if (image_dim < window) {
    throw DimensionError("image extent " + std::to_string(image_dim) +
                         " smaller than the detection window");
  }
  if ((image_dim - window) % stride != 0) {
    throw DimensionError("image extent " + std::to_string(image_dim) +
                         " does not land on the stride grid");
  }
  return (image_dim - window) / stride + 1;
}

void DetectionSpec::validate() const {
  if (window < 1 || stride < 1) throw ConfigError("detection window and stride must be positive");
  if (labels.empty() || templates.size() != labels.size() ||
      thresholds.size() != labels.size()) {
    throw DimensionError("detection spec needs matching labels, templates, and thresholds");
  }
  for (const Matrix& t : templates) {
    if (t.rows != window || t.cols != window) {
      throw DimensionError("detection template must be window x window");
    }
    require_drive_range(t, "detection template");
  }
}

ConvResult conv2d_photonic(const ImageTensor& img, const ConvSpec& spec, const EngineConfig& cfg,
                           const CalibrationResult& cal, uint64_t channel) {
  spec.validate();
  const size_t out_h = spec.out_dim(img.height);
  const size_t out_w = spec.out_dim(img.width);
  const size_t k = spec.kernel.rows;
  std::vector<double> patch(k * k);
  Matrix raw(out_h, out_w);
  for (size_t y = 0; y < out_h; ++y) {
    for (size_t x = 0; x < out_w; ++x) {
      fill_conv_patch(img, spec, y, x, patch);
      FrameContext ctx{channel, static_cast<uint64_t>(y * out_w + x)};
      raw.at(y, x) = weighted_sum(patch, spec.kernel.data, cfg, cal, ctx);
    }
  }
  UnitRescale r = rescale_unit(raw.data);
  ConvResult res;
  res.normalized = ImageTensor::create(out_h, out_w, std::move(r.values));
  res.raw = std::move(raw);
  res.scale = r.scale;
  res.offset = r.offset;
  return res;
}

std::vector<double> fc_forward_photonic(std::span<const double> v, const FcSpec& spec,
                                        const EngineConfig& cfg, const CalibrationResult& cal,
                                        uint64_t channel) {
  spec.validate();
  if (v.size() != spec.weights.cols) {
    throw DimensionError("fc input length " + std::to_string(v.size()) + " != weight columns " +
                         std::to_string(spec.weights.cols));
  }
  std::vector<double> scores(spec.weights.rows);
  for (size_t c = 0; c < spec.weights.rows; ++c) {
    scores[c] = weighted_sum(v, spec.weights.row(c), cfg, cal,
                             FrameContext{channel, static_cast<uint64_t>(c)});
  }
  return scores;
}

size_t classify(std::span<const double> scores) {
  if (scores.empty()) throw DimensionError("classify needs at least one score");
  size_t best = 0;
  for (size_t c = 0; c < scores.size(); ++c) {
    if (std::isnan(scores[c])) {
      throw NumericError("classify: score " + std::to_string(c) + " is NaN");
    }
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

FcSpec train_fc_digital(const std::vector<ImageTensor>& images, const std::vector<int>& labels,
                        const ConvSpec& conv, size_t epochs, double learning_rate,
                        uint64_t rng_seed) {
  if (images.empty()) throw DataError("empty training set");
  if (images.size() != labels.size()) {
    throw DimensionError("got " + std::to_string(images.size()) + " images but " +
                         std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= static_cast<int>(kDigitClasses)) {
      throw DataError("label " + std::to_string(y) + " outside 0..9");
    }
  }
  conv.validate();

  std::vector<std::vector<double>> features(images.size());
  for (size_t i = 0; i < images.size(); ++i) {
    Matrix fm = oracle::conv2d_digital(images[i], conv);
    features[i] = std::move(rescale_unit(fm.data).values);
    if (features[i].size() != features[0].size()) {
      throw DimensionError("training images disagree on feature size");
    }
  }
  const size_t dim = features[0].size();

  Matrix w(kDigitClasses, dim);
  RngStream rng(mix_keys(rng_seed, 0x7261696e));
  std::vector<size_t> order(images.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  constexpr size_t kBatch = 64;
  std::vector<double> logits(kDigitClasses);
  Matrix grad(kDigitClasses, dim);

  for (size_t epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates with the pinned stream; std::shuffle output is
    // implementation defined
    for (size_t i = order.size() - 1; i > 0; --i) {
      const size_t j = std::min(i, static_cast<size_t>(rng.uniform() * (i + 1)));
      std::swap(order[i], order[j]);
    }
    for (size_t start = 0; start < order.size(); start += kBatch) {
      const size_t stop = std::min(start + kBatch, order.size());
      std::fill(grad.data.begin(), grad.data.end(), 0.0);
      for (size_t s = start; s < stop; ++s) {
        const std::vector<double>& x = features[order[s]];
        for (size_t c = 0; c < kDigitClasses; ++c) {
          double acc = 0.0;
          const double* row = w.data.data() + c * dim;
          for (size_t d = 0; d < dim; ++d) acc += row[d] * x[d];
          logits[c] = acc;
        }
        const std::vector<double> p = softmax(logits);
        const int y = labels[order[s]];
        for (size_t c = 0; c < kDigitClasses; ++c) {
          const double g = p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
          double* grow = grad.data.data() + c * dim;
          for (size_t d = 0; d < dim; ++d) grow[d] += g * x[d];
        }
      }
      const double step = learning_rate / static_cast<double>(stop - start);
      for (size_t i = 0; i < w.data.size(); ++i) w.data[i] -= step * grad.data[i];
    }
  }

  const double top = max_abs(w.data);
  if (top > 0.0) {
    for (double& v : w.data) v /= top;
  }
  FcSpec spec;
  spec.weights = std::move(w);
  spec.class_labels.resize(kDigitClasses);
  for (size_t c = 0; c < kDigitClasses; ++c) spec.class_labels[c] = static_cast<int>(c);
  return spec;
}

DetectionResult sliding_window_detect(const ImageTensor& img, const DetectionSpec& spec,
                                      const EngineConfig& cfg, const CalibrationResult& cal,
                                      uint64_t channel) {
  spec.validate();
  const size_t grid_h = spec.grid_dim(img.height);
  const size_t grid_w = spec.grid_dim(img.width);
  const size_t patches = grid_h * grid_w;
  const size_t w = spec.window;
  std::vector<double> patch(w * w);
  DetectionResult result;
  result.decisions = Matrix(patches, spec.templates.size());
  for (size_t c = 0; c < spec.templates.size(); ++c) {
    for (size_t p = 0; p < patches; ++p) {
      const size_t gy = p / grid_w;
      const size_t gx = p % grid_w;
      for (size_t py = 0; py < w; ++py) {
        for (size_t px = 0; px < w; ++px) {
          patch[py * w + px] = img.at(gy * spec.stride + py, gx * spec.stride + px);
        }
      }
      FrameContext ctx{channel, static_cast<uint64_t>(c * patches + p)};
      result.decisions.at(p, c) = weighted_sum(patch, spec.templates[c].data, cfg, cal, ctx);
    }
  }
  for (size_t p = 0; p < patches; ++p) {
    for (size_t c = 0; c < spec.templates.size(); ++c) {
      const double v = result.decisions.at(p, c);
      if (v > spec.thresholds[c]) {
        result.detections.push_back({spec.labels[c], p + 1, v});
      }
    }
  }
  return result;
}

DetectionSpec train_detection_templates(const std::vector<ImageTensor>& images,
                                        const std::vector<int>& labels,
                                        std::span<const int> targets, uint32_t window,
                                        uint32_t stride) {
  if (images.empty()) throw DataError("empty detection training set");
  if (images.size() != labels.size()) {
    throw DimensionError("got " + std::to_string(images.size()) + " images but " +
                         std::to_string(labels.size()) + " labels");
  }
  if (targets.empty()) throw DataError("no target labels to train detectors for");
  for (const ImageTensor& img : images) {
    if (img.height != window || img.width != window) {
      throw DimensionError("detection training images must match the window size");
    }
  }
  const size_t dim = static_cast<size_t>(window) * window;
  const long long s = static_cast<long long>(stride);

  // every view a sliding window can have of a grid-aligned target digit: the
  // digit itself, or the digit displaced by one or two stride steps into a
  // neighbouring window
  const std::unordered_set<int> target_set(targets.begin(), targets.end());
  std::vector<std::vector<double>> centered(images.size());
  for (size_t i = 0; i < images.size(); ++i) centered[i] = flatten_image(images[i]);
  std::vector<std::vector<double>> displaced;
  for (size_t i = 0; i < images.size(); ++i) {
    if (!target_set.count(labels[i])) continue;
    for (long long dy = -2 * s; dy <= 2 * s; dy += s) {
      for (long long dx = -2 * s; dx <= 2 * s; dx += s) {
        if (dy == 0 && dx == 0) continue;
        displaced.push_back(shifted_pixels(images[i], dy, dx));
      }
    }
  }
  const std::vector<double> blank(dim, 0.0);

  DetectionSpec spec;
  spec.window = window;
  spec.stride = stride;
  constexpr size_t kIters = 400;
  constexpr double kRate = 2.0;
  for (int target : targets) {
    std::vector<const std::vector<double>*> pos, neg;
    for (size_t i = 0; i < images.size(); ++i) {
      (labels[i] == target ? pos : neg).push_back(&centered[i]);
    }
    if (pos.empty()) {
      throw DataError("no training images labeled " + std::to_string(target));
    }
    for (const auto& d : displaced) neg.push_back(&d);
    neg.push_back(&blank);

    // balanced full-batch logistic regression through the origin; the
    // decision threshold supplies the bias later
    std::vector<double> w(dim, 0.0);
    std::vector<double> grad(dim);
    for (size_t iter = 0; iter < kIters; ++iter) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (const auto* sets : {&pos, &neg}) {
        const double sign = (sets == &pos) ? 1.0 : -1.0;
        const double scale = sign / (2.0 * static_cast<double>(sets->size()));
        for (const std::vector<double>* xp : *sets) {
          const std::vector<double>& x = *xp;
          double score = 0.0;
          for (size_t d = 0; d < dim; ++d) score += w[d] * x[d];
          const double pull = scale * sigmoid(-sign * score);
          for (size_t d = 0; d < dim; ++d) grad[d] += pull * x[d];
        }
      }
      for (size_t d = 0; d < dim; ++d) w[d] += kRate * grad[d];
    }
    const double top = max_abs(w);
    if (top > 0.0) {
      for (double& v : w) v /= top;
    }
    spec.labels.push_back(target);
    spec.templates.emplace_back(window, window, std::move(w));
    spec.thresholds.push_back(std::numeric_limits<double>::infinity());
  }
  return spec;
}

void calibrate_detection_thresholds(DetectionSpec& spec, std::span<const LabeledScene> scenes) {
  spec.validate();
  if (scenes.empty()) throw DataError("no calibration scenes");
  const size_t classes = spec.labels.size();
  std::vector<double> min_pos(classes, std::numeric_limits<double>::infinity());
  std::vector<double> max_neg(classes, -std::numeric_limits<double>::infinity());
  for (const LabeledScene& scene : scenes) {
    const Matrix d = oracle::detect_digital(scene.image, spec);
    std::unordered_set<size_t> positive_cells;
    for (const Detection& truth : scene.truths) {
      const auto label_it = std::find(spec.labels.begin(), spec.labels.end(), truth.label);
      if (label_it == spec.labels.end()) {
        throw DataError("scene truth labels a class with no detector: " +
                        std::to_string(truth.label));
      }
      if (truth.patch_index < 1 || truth.patch_index > d.rows) {
        throw DimensionError("scene truth patch index " + std::to_string(truth.patch_index) +
                             " outside 1.." + std::to_string(d.rows));
      }
      const size_t c = static_cast<size_t>(label_it - spec.labels.begin());
      positive_cells.insert((truth.patch_index - 1) * classes + c);
    }
    for (size_t p = 0; p < d.rows; ++p) {
      for (size_t c = 0; c < classes; ++c) {
        const double v = d.at(p, c);
        if (positive_cells.count(p * classes + c)) {
          min_pos[c] = std::min(min_pos[c], v);
        } else {
          max_neg[c] = std::max(max_neg[c], v);
        }
      }
    }
  }
  for (size_t c = 0; c < classes; ++c) {
    if (!std::isfinite(min_pos[c])) {
      throw CalibrationError("no positive calibration patch for label " +
                             std::to_string(spec.labels[c]));
    }
    if (!(max_neg[c] < min_pos[c])) {
      throw CalibrationError("label " + std::to_string(spec.labels[c]) +
                             " is not separable on the calibration scenes (worst negative " +
                             std::to_string(max_neg[c]) + " >= best positive " +
                             std::to_string(min_pos[c]) + ")");
    }
    spec.thresholds[c] = 0.5 * (max_neg[c] + min_pos[c]);
  }
}

Matrix laplacian3x3() {
  return Matrix(3, 3, {0.0, 0.25, 0.0, 0.25, -1.0, 0.25, 0.0, 0.25, 0.0});
}

Matrix gaussian5x5() {
  const double b[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
  Matrix k(5, 5);
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) k.at(i, j) = b[i] * b[j] / 256.0;
  }
  return k;
}

}  // namespace tempocomp
