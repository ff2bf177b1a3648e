#include "tempocomp/wdm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>

#include "tempocomp/errors.hpp"

namespace tempocomp {

namespace {

size_t ceil_div(size_t a, size_t b) { return (a + b - 1) / b; }

}  // namespace

size_t ChannelPlan::slot_count() const {
  if (data_rows == 0 || weight_rows == 0) return 0;
  return ceil_div(data_rows, n_wavelengths) * ceil_div(weight_rows, n_spatial);
}

size_t ChannelPlan::parallel_channels() const {
  std::map<size_t, size_t> per_slot;
  for (const Assignment& a : assignments) ++per_slot[a.slot];
  size_t widest = 0;
  for (const auto& [slot, count] : per_slot) widest = std::max(widest, count);
  return widest;
}

void ChannelPlan::validate() const {
  if (n_wavelengths < 1 || n_spatial < 1) {
    throw ConfigError("plan needs at least one wavelength and one spatial channel");
  }
  if (crosstalk_db > 0.0) {
    throw ConfigError("crosstalk_db must be nonpositive (leakage, not gain)");
  }
  if (assignments.size() != data_rows * weight_rows) {
    throw ConfigError("plan covers " + std::to_string(assignments.size()) + " pairs, expected " +
                      std::to_string(data_rows * weight_rows));
  }
  std::set<std::pair<size_t, size_t>> pairs;
  std::set<std::tuple<size_t, size_t, size_t>> channels;
  const size_t slots = slot_count();
  for (const Assignment& a : assignments) {
    if (a.data_row >= data_rows || a.weight_row >= weight_rows) {
      throw ConfigError("assignment row indices outside the matrix shapes");
    }
    if (a.wavelength >= n_wavelengths || a.spatial >= n_spatial || a.slot >= slots) {
      throw ConfigError("assignment channel indices outside the plan grid");
    }
    if (!pairs.emplace(a.data_row, a.weight_row).second) {
      throw ConfigError("pair (" + std::to_string(a.data_row) + "," +
                        std::to_string(a.weight_row) + ") assigned twice");
    }
    if (!channels.emplace(a.wavelength, a.spatial, a.slot).second) {
      throw ConfigError("two assignments share wavelength " + std::to_string(a.wavelength) +
                        ", spatial " + std::to_string(a.spatial) + ", slot " +
                        std::to_string(a.slot));
    }
  }
}

ChannelPlan plan_matmul(size_t data_rows, size_t inner_dim, size_t weight_rows,
                        size_t n_wavelengths, size_t n_spatial) {
  if (data_rows < 1 || inner_dim < 1 || weight_rows < 1 || n_wavelengths < 1 || n_spatial < 1) {
    throw DimensionError("plan_matmul arguments must all be at least 1");
  }
  ChannelPlan plan;
  plan.n_wavelengths = n_wavelengths;
  plan.n_spatial = n_spatial;
  plan.data_rows = data_rows;
  plan.inner_dim = inner_dim;
  plan.weight_rows = weight_rows;
  plan.assignments.reserve(data_rows * weight_rows);
  const size_t weight_tiles = ceil_div(weight_rows, n_spatial);
  for (size_t m = 0; m < data_rows; ++m) {
    for (size_t l = 0; l < weight_rows; ++l) {
      Assignment a;
      a.data_row = m;
      a.weight_row = l;
      a.wavelength = m % n_wavelengths;
      a.spatial = l % n_spatial;
      a.slot = (m / n_wavelengths) * weight_tiles + l / n_spatial;
      plan.assignments.push_back(a);
    }
  }
  plan.validate();
  return plan;
}

Matrix execute_plan(const Matrix& data, const Matrix& weights, const ChannelPlan& plan,
                    const EngineConfig& cfg, const CalibrationResult& cal) {
  plan.validate();
  if (data.rows != plan.data_rows || data.cols != plan.inner_dim ||
      weights.rows != plan.weight_rows || weights.cols != plan.inner_dim) {
    throw DimensionError("matrix shapes do not match the plan (" +
                         std::to_string(plan.data_rows) + "x" + std::to_string(plan.inner_dim) +
                         " by " + std::to_string(plan.weight_rows) + "x" +
                         std::to_string(plan.inner_dim) + ")");
  }
  if (!(cal.gain > 0.0) || !std::isfinite(cal.gain)) {
    throw CalibrationError("calibration gain must be positive; run calibrate_gain first");
  }
  const double leak =
      std::isinf(plan.crosstalk_db) ? 0.0 : std::pow(10.0, plan.crosstalk_db / 10.0);

  // co-propagating groups: same fiber (spatial channel) and same time slot
  std::map<std::pair<size_t, size_t>, std::vector<const Assignment*>> groups;
  for (const Assignment& a : plan.assignments) groups[{a.spatial, a.slot}].push_back(&a);

  Matrix out(plan.data_rows, plan.weight_rows);
  for (const auto& [key, members] : groups) {
    std::vector<OpticalFrame> frames;
    std::vector<FrameContext> contexts;
    frames.reserve(members.size());
    contexts.reserve(members.size());
    for (const Assignment* a : members) {
      FrameContext ctx{a->wavelength * plan.n_spatial + a->spatial, a->slot};
      frames.push_back(
          simulate_optical_frame(data.row(a->data_row), weights.row(a->weight_row), cfg, ctx));
      contexts.push_back(ctx);
    }
    if (leak > 0.0 && frames.size() > 1) {
      const size_t n_samples = frames.front().upper.samples.size();
      std::vector<double> sum_upper(n_samples, 0.0), sum_lower(n_samples, 0.0);
      for (const OpticalFrame& f : frames) {
        for (size_t n = 0; n < n_samples; ++n) {
          sum_upper[n] += f.upper.samples[n];
          sum_lower[n] += f.lower.samples[n];
        }
      }
      for (OpticalFrame& f : frames) {
        std::vector<double> upper(n_samples), lower(n_samples);
        for (size_t n = 0; n < n_samples; ++n) {
          upper[n] = f.upper.samples[n] + leak * (sum_upper[n] - f.upper.samples[n]);
          lower[n] = f.lower.samples[n] + leak * (sum_lower[n] - f.lower.samples[n]);
        }
        f.upper = Waveform::create(std::move(upper), f.upper.sample_rate, f.upper.kind);
        f.lower = Waveform::create(std::move(lower), f.lower.sample_rate, f.lower.kind);
      }
    }
    for (size_t k = 0; k < members.size(); ++k) {
      const double v = detect_and_integrate(frames[k], cfg, contexts[k]);
      out.at(members[k]->data_row, members[k]->weight_row) =
          (v - cal.residual_offset) / cal.gain;
    }
  }
  return out;
}

double throughput_estimate(const ChannelPlan& plan, double symbol_rate, uint32_t guard_symbols) {
  if (!(symbol_rate > 0.0)) throw RangeError("symbol_rate must be positive");
  const double n = static_cast<double>(plan.inner_dim);
  const double duty = n / (n + static_cast<double>(guard_symbols));
  return 2.0 * symbol_rate * static_cast<double>(plan.parallel_channels()) * duty;
}

}  // namespace tempocomp
