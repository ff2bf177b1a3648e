#include "tempocomp/oracle.hpp"

#include <cmath>
#include <string>

#include "tempocomp/errors.hpp"

namespace tempocomp::oracle {

double dot_digital(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot_digital: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  double sum = 0.0, comp = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

Matrix conv2d_digital(const ImageTensor& img, const ConvSpec& spec) {
  spec.validate();
  const size_t k = spec.kernel.rows;
  const size_t out_h = spec.out_dim(img.height);
  const size_t out_w = spec.out_dim(img.width);
  std::vector<double> kernel_flat(spec.kernel.data);
  std::vector<double> patch(k * k);
  Matrix out(out_h, out_w);
  for (size_t y = 0; y < out_h; ++y) {
    for (size_t x = 0; x < out_w; ++x) {
      for (size_t ky = 0; ky < k; ++ky) {
        for (size_t kx = 0; kx < k; ++kx) {
          const long long sy = static_cast<long long>(y * spec.stride + ky) - spec.padding;
          const long long sx = static_cast<long long>(x * spec.stride + kx) - spec.padding;
          const bool inside = sy >= 0 && sx >= 0 && sy < static_cast<long long>(img.height) &&
                              sx < static_cast<long long>(img.width);
          patch[ky * k + kx] = inside ? img.at(static_cast<size_t>(sy), static_cast<size_t>(sx))
                                      : 0.0;
        }
      }
      out.at(y, x) = dot_digital(patch, kernel_flat);
    }
  }
  return out;
}

std::vector<double> fc_digital(std::span<const double> v, const FcSpec& spec) {
  spec.validate();
  if (v.size() != spec.weights.cols) {
    throw DimensionError("fc_digital: input length " + std::to_string(v.size()) +
                         " != weight columns " + std::to_string(spec.weights.cols));
  }
  std::vector<double> scores(spec.weights.rows);
  for (size_t c = 0; c < spec.weights.rows; ++c) {
    scores[c] = dot_digital(v, spec.weights.row(c));
  }
  return scores;
}

Matrix detect_digital(const ImageTensor& img, const DetectionSpec& spec) {
  spec.validate();
  const size_t grid_h = spec.grid_dim(img.height);
  const size_t grid_w = spec.grid_dim(img.width);
  const size_t w = spec.window;
  std::vector<double> patch(w * w);
  Matrix out(grid_h * grid_w, spec.templates.size());
  for (size_t gy = 0; gy < grid_h; ++gy) {
    for (size_t gx = 0; gx < grid_w; ++gx) {
      for (size_t py = 0; py < w; ++py) {
        for (size_t px = 0; px < w; ++px) {
          patch[py * w + px] = img.at(gy * spec.stride + py, gx * spec.stride + px);
        }
      }
      for (size_t c = 0; c < spec.templates.size(); ++c) {
        out.at(gy * grid_w + gx, c) = dot_digital(patch, spec.templates[c].data);
      }
    }
  }
  return out;
}

}  // namespace tempocomp::oracle
