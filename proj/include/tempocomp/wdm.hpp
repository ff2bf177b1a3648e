#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "tempocomp/matrix.hpp"
#include "tempocomp/summation.hpp"

namespace tempocomp {

// One dot product placed on the channel grid: data row m rides wavelength
// `wavelength`, weight row l rides spatial channel `spatial`, in time slot
// `slot`.
struct Assignment {
  size_t data_row = 0;
  size_t weight_row = 0;
  size_t wavelength = 0;
  size_t spatial = 0;
  size_t slot = 0;
};

// Tiling of an M x N by L x N multiply across wavelength, space, and time.
struct ChannelPlan {
  size_t n_wavelengths = 1;
  size_t n_spatial = 1;
  size_t data_rows = 0;
  size_t inner_dim = 0;
  size_t weight_rows = 0;
  // demux leakage between co-propagating wavelengths; -inf means ideal
  double crosstalk_db = -std::numeric_limits<double>::infinity();
  std::vector<Assignment> assignments;

  size_t slot_count() const;
  // widest set of simultaneously active channels across the slots
  size_t parallel_channels() const;
  void validate() const;
};

// Greedy row-major tiling: every (m, l) pair exactly once, no collisions on
// (wavelength, spatial, slot), slot count ceil(M/W) * ceil(L/S).
ChannelPlan plan_matmul(size_t data_rows, size_t inner_dim, size_t weight_rows,
                        size_t n_wavelengths, size_t n_spatial);

// Run every assignment on its (wavelength, spatial) engine. With finite
// crosstalk, frames sharing a spatial channel and slot leak
// 10^(crosstalk_db/10) of their intensity into each other before detection.
Matrix execute_plan(const Matrix& data, const Matrix& weights, const ChannelPlan& plan,
                    const EngineConfig& cfg, const CalibrationResult& cal);

// Multiply-accumulate rate: 2 ops per symbol per active channel, derated by
// the guard overhead N/(N+guard).
double throughput_estimate(const ChannelPlan& plan, double symbol_rate,
                           uint32_t guard_symbols = 0);

}  // namespace tempocomp
