#include "tempocomp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tempocomp/errors.hpp"
#include "tempocomp/rng.hpp"

namespace tempocomp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr size_t kDigitSide = 28;

struct Pt {
  double x = 0.0;
  double y = 0.0;
};

// a stroke is a polyline; arcs and ellipses are flattened into one
using Stroke = std::vector<Pt>;

Stroke segment(Pt a, Pt b) { return {a, b}; }

Stroke polyline(std::initializer_list<Pt> pts) { return Stroke(pts); }

// y grows downward, angles in degrees measured from +x toward +y
Stroke arc(Pt center, double rx, double ry, double deg_from, double deg_to, int steps = 48) {
  Stroke s;
  s.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = deg_from + (deg_to - deg_from) * i / steps;
    const double a = t * kPi / 180.0;
    s.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
  }
  return s;
}

// skeletons live in a unit box, (0,0) top-left
std::vector<Stroke> digit_skeleton(int digit) {
  switch (digit) {
    case 0:
      return {arc({0.5, 0.5}, 0.30, 0.42, 0.0, 360.0)};
    case 1:
      return {polyline({{0.32, 0.22}, {0.52, 0.06}, {0.52, 0.94}}),
              segment({0.34, 0.94}, {0.70, 0.94})};
    case 2:
      return {arc({0.48, 0.28}, 0.26, 0.24, 180.0, 340.0),
              polyline({{0.72, 0.36}, {0.24, 0.92}, {0.78, 0.92}})};
    case 3:
      return {arc({0.44, 0.28}, 0.26, 0.22, 170.0, 430.0),
              arc({0.44, 0.72}, 0.29, 0.24, 290.0, 550.0)};
    case 4:
      return {polyline({{0.64, 0.06}, {0.20, 0.62}, {0.86, 0.62}}),
              segment({0.64, 0.06}, {0.64, 0.94})};
    case 5:
      return {polyline({{0.76, 0.08}, {0.30, 0.08}, {0.27, 0.45}}),
              arc({0.47, 0.66}, 0.27, 0.26, 215.0, 450.0)};
    case 6:
      return {arc({0.62, 0.10}, 0.45, 0.62, 115.0, 180.0),
              arc({0.48, 0.68}, 0.24, 0.24, 0.0, 360.0)};
    case 7:
      return {polyline({{0.20, 0.10}, {0.80, 0.10}, {0.40, 0.94}})};
    case 8:
      return {arc({0.5, 0.28}, 0.22, 0.20, 0.0, 360.0),
              arc({0.5, 0.71}, 0.26, 0.23, 0.0, 360.0)};
    case 9:
      return {arc({0.52, 0.32}, 0.24, 0.24, 0.0, 360.0),
              arc({0.40, 0.35}, 0.38, 0.58, 355.0, 430.0)};
    default:
      throw RangeError("digit must be 0..9, got " + std::to_string(digit));
  }
}

double dist_to_segment(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  const double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
  const double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

struct Pose {
  double cos_r = 1.0, sin_r = 0.0;
  double scale_x = 1.0, scale_y = 1.0;
  double shear = 0.0;
  double shift_x = 0.0, shift_y = 0.0;
  double pen = 1.35;   // stroke radius, pixels
  double ink = 1.0;    // peak intensity
};

ImageTensor rasterize(const std::vector<Stroke>& skeleton, const Pose& pose) {
  // map the unit box to a 20 px glyph box centered in the 28 px tile, then
  // apply the pose about the tile center
  constexpr double box = 20.0;
  constexpr double origin = (kDigitSide - box) / 2.0;
  constexpr double cx = kDigitSide / 2.0, cy = kDigitSide / 2.0;
  std::vector<Stroke> placed(skeleton.size());
  for (size_t i = 0; i < skeleton.size(); ++i) {
    placed[i].reserve(skeleton[i].size());
    for (Pt p : skeleton[i]) {
      double x = origin + p.x * box - cx;
      double y = origin + p.y * box - cy;
      x += pose.shear * y;
      x *= pose.scale_x;
      y *= pose.scale_y;
      const double rx = pose.cos_r * x - pose.sin_r * y;
      const double ry = pose.sin_r * x + pose.cos_r * y;
      placed[i].push_back({rx + cx + pose.shift_x, ry + cy + pose.shift_y});
    }
  }
  constexpr double aa = 0.9;  // edge softness, pixels
  std::vector<double> pixels(kDigitSide * kDigitSide, 0.0);
  for (size_t py = 0; py < kDigitSide; ++py) {
    for (size_t px = 0; px < kDigitSide; ++px) {
      const Pt p{px + 0.5, py + 0.5};
      double d = 1e9;
      for (const Stroke& s : placed) {
        for (size_t k = 0; k + 1 < s.size(); ++k) {
          d = std::min(d, dist_to_segment(p, s[k], s[k + 1]));
        }
      }
      const double v = std::clamp((pose.pen + aa - d) / (2.0 * aa), 0.0, 1.0);
      pixels[py * kDigitSide + px] = pose.ink * v;
    }
  }
  return ImageTensor::create(kDigitSide, kDigitSide, std::move(pixels));
}

}  // namespace

ImageTensor render_digit_clean(int digit) { return rasterize(digit_skeleton(digit), Pose{}); }

ImageTensor render_digit(int digit, uint64_t seed, double severity) {
  if (!(severity >= 0.0) || severity > 1.0) {
    throw RangeError("render severity must lie in [0,1]");
  }
  RngStream rng(mix_keys(seed, 0x64696769, static_cast<uint64_t>(digit)));
  auto centered = [&](double amp) { return severity * amp * (2.0 * rng.uniform() - 1.0); };
  Pose pose;
  const double rot = centered(20.0) * kPi / 180.0;
  pose.cos_r = std::cos(rot);
  pose.sin_r = std::sin(rot);
  pose.scale_x = 1.0 + centered(0.2);
  pose.scale_y = 1.0 + centered(0.2);
  pose.shear = centered(0.28);
  pose.shift_x = centered(2.5);
  pose.shift_y = centered(2.5);
  pose.pen = 1.35 + centered(0.55);
  pose.ink = 1.0 - severity * 0.35 * rng.uniform();
  return rasterize(digit_skeleton(digit), pose);
}

DigitDataset make_digit_dataset(size_t per_class, uint64_t seed, double severity) {
  DigitDataset set;
  set.images.reserve(per_class * 10);
  set.labels.reserve(per_class * 10);
  for (size_t variant = 0; variant < per_class; ++variant) {
    for (int digit = 0; digit < 10; ++digit) {
      set.images.push_back(render_digit(digit, mix_keys(seed, variant, 7), severity));
      set.labels.push_back(digit);
    }
  }
  return set;
}

ImageTensor make_flower_image(size_t height, size_t width) {
  if (height == 0 || width == 0) throw DimensionError("flower image must be nonempty");
  std::vector<double> pixels(height * width, 0.0);
  const double cx = width * 0.52, cy = height * 0.42;
  const double unit = 0.5 * std::min(height, width);
  auto smooth = [](double edge, double soft, double d) {
    return std::clamp((edge - d) / soft + 0.5, 0.0, 1.0);
  };
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      const double dx = (x + 0.5 - cx) / unit;
      const double dy = (y + 0.5 - cy) / unit;
      const double r = std::sqrt(dx * dx + dy * dy);
      const double phi = std::atan2(dy, dx);
      // five-lobed rose for the petals, bright core, dim stem and leaf
      const double lobe = std::abs(std::cos(2.5 * phi + 0.4));
      const double petal_r = 0.30 + 0.46 * lobe * lobe;
      double v = 0.85 * smooth(petal_r, 0.05, r);
      v = std::max(v, 1.0 * smooth(0.16, 0.04, r));
      const double sx = dx - 0.12 * std::sin(3.0 * dy);
      if (dy > 0.0) v = std::max(v, 0.55 * smooth(0.05, 0.03, std::abs(sx)) * smooth(1.7, 0.2, dy));
      const double lx = dx + 0.35, ly = dy - 0.75;
      v = std::max(v, 0.45 * smooth(0.11, 0.05, std::sqrt(lx * lx * 2.5 + ly * ly * 9.0)));
      pixels[y * width + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return ImageTensor::create(height, width, std::move(pixels));
}

ImageTensor compose_scene(size_t height, size_t width, std::span<const Placement> placements) {
  if (height == 0 || width == 0) throw DimensionError("scene must be nonempty");
  ImageTensor scene = ImageTensor::create(height, width, std::vector<double>(height * width, 0.0));
  for (const Placement& pl : placements) {
    if (pl.top + pl.image.height > height || pl.left + pl.image.width > width) {
      throw DimensionError("placement at (" + std::to_string(pl.top) + "," +
                           std::to_string(pl.left) + ") spills outside the scene");
    }
    for (size_t y = 0; y < pl.image.height; ++y) {
      for (size_t x = 0; x < pl.image.width; ++x) {
        double& cell = scene.at(pl.top + y, pl.left + x);
        cell = std::max(cell, pl.image.at(y, x));
      }
    }
  }
  return scene;
}

}  // namespace tempocomp
