#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "tempocomp/matrix.hpp"
#include "tempocomp/summation.hpp"
#include "tempocomp/wdm.hpp"

using namespace tempocomp;

namespace {

void check_plan_invariants(const ChannelPlan& plan, size_t m_rows, size_t l_rows) {
  CHECK(plan.assignments.size() == m_rows * l_rows);

  std::set<std::pair<size_t, size_t>> pairs;
  std::set<std::tuple<size_t, size_t, size_t>> cells;
  for (const Assignment& a : plan.assignments) {
    CHECK(a.data_row < m_rows);
    CHECK(a.weight_row < l_rows);
    CHECK(a.wavelength < plan.n_wavelengths);
    CHECK(a.spatial < plan.n_spatial);
    CHECK(pairs.insert({a.data_row, a.weight_row}).second);
    CHECK(cells.insert({a.wavelength, a.spatial, a.slot}).second);
  }
  CHECK(pairs.size() == m_rows * l_rows);

  const size_t expected_slots = ((m_rows + plan.n_wavelengths - 1) / plan.n_wavelengths) *
                                ((l_rows + plan.n_spatial - 1) / plan.n_spatial);
  CHECK(plan.slot_count() == expected_slots);
  CHECK_NOTHROW(plan.validate());
}

Matrix random_matrix(std::mt19937_64& rng, size_t rows, size_t cols, double lo, double hi) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : m.data) x = u(rng);
  return m;
}

}  // namespace

TEST_CASE("single-cell plan") {
  ChannelPlan plan = plan_matmul(1, 4, 1, 1, 1);
  CHECK(plan.assignments.size() == 1);
  CHECK(plan.slot_count() == 1);
  check_plan_invariants(plan, 1, 1);
}

TEST_CASE("two wavelengths share one weight modulator in one slot") {
  ChannelPlan plan = plan_matmul(2, 784, 1, 2, 1);
  CHECK(plan.assignments.size() == 2);
  CHECK(plan.slot_count() == 1);
  CHECK(plan.parallel_channels() == 2);
  check_plan_invariants(plan, 2, 1);
}

TEST_CASE("3x2 grid over a 2x2 channel fabric") {
  ChannelPlan plan = plan_matmul(3, 8, 2, 2, 2);
  CHECK(plan.assignments.size() == 6);
  CHECK(plan.slot_count() == 2);
  std::map<size_t, size_t> per_slot;
  for (const Assignment& a : plan.assignments) ++per_slot[a.slot];
  for (auto [slot, n] : per_slot) CHECK(n <= 4);
  check_plan_invariants(plan, 3, 2);
}

TEST_CASE("plan invariants hold across the full shape sweep") {
  for (size_t m = 1; m <= 16; ++m) {
    for (size_t l = 1; l <= 16; ++l) {
      for (size_t w = 1; w <= 8; w += 2) {
        for (size_t s = 1; s <= 8; s += 2) {
          check_plan_invariants(plan_matmul(m, 4, l, w, s), m, l);
        }
      }
    }
  }
}

TEST_CASE("plan rejects bad arguments") {
  CHECK_THROWS_AS(plan_matmul(0, 4, 1, 1, 1), DimensionError);
  CHECK_THROWS_AS(plan_matmul(1, 4, 1, 0, 1), DimensionError);
  ChannelPlan plan = plan_matmul(2, 4, 2, 2, 1);
  plan.crosstalk_db = 3.0;  // leakage above unity is not an attenuation
  CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("ideal demux reproduces the sequential result") {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(21);
  Matrix data = random_matrix(rng, 2, 16, 0.0, 1.0);
  Matrix weights = random_matrix(rng, 3, 16, -1.0, 1.0);

  ChannelPlan plan = plan_matmul(2, 16, 3, 2, 2);
  Matrix parallel = execute_plan(data, weights, plan, cfg, cal);
  Matrix sequential = batched_weighted_sum(data, weights, cfg, cal);
  CHECK(parallel.rows == 2);
  CHECK(parallel.cols == 3);
  for (size_t k = 0; k < parallel.data.size(); ++k) {
    CHECK(parallel.data[k] == doctest::Approx(sequential.data[k]).epsilon(1e-9));
  }
}

TEST_CASE("parallel equals sequential across swept shapes") {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(22);
  const std::vector<std::array<size_t, 4>> shapes = {
      {1, 1, 1, 1}, {4, 3, 2, 2}, {5, 2, 3, 1}, {3, 5, 1, 4}, {7, 4, 4, 3}, {2, 6, 5, 5}};
  for (auto [m, l, w, s] : shapes) {
    Matrix data = random_matrix(rng, m, 8, 0.0, 1.0);
    Matrix weights = random_matrix(rng, l, 8, -1.0, 1.0);
    ChannelPlan plan = plan_matmul(m, 8, l, w, s);
    Matrix parallel = execute_plan(data, weights, plan, cfg, cal);
    Matrix sequential = batched_weighted_sum(data, weights, cfg, cal);
    for (size_t k = 0; k < parallel.data.size(); ++k) {
      CHECK(parallel.data[k] == doctest::Approx(sequential.data[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("plan and data shapes must agree") {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(23);
  Matrix data = random_matrix(rng, 2, 8, 0.0, 1.0);
  Matrix weights = random_matrix(rng, 3, 8, -1.0, 1.0);
  ChannelPlan plan = plan_matmul(4, 8, 3, 2, 1);
  CHECK_THROWS_AS(execute_plan(data, weights, plan, cfg, cal), DimensionError);
}

TEST_CASE("crosstalk error grows as isolation degrades") {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(24);
  Matrix data = random_matrix(rng, 4, 16, 0.0, 1.0);
  Matrix weights = random_matrix(rng, 2, 16, -1.0, 1.0);
  Matrix ideal_out;
  {
    ChannelPlan plan = plan_matmul(4, 16, 2, 2, 1);
    ideal_out = execute_plan(data, weights, plan, cfg, cal);
  }

  double last_err = 0.0;
  for (double db : {-60.0, -40.0, -30.0, -20.0, -10.0, -3.0}) {
    ChannelPlan plan = plan_matmul(4, 16, 2, 2, 1);
    plan.crosstalk_db = db;
    Matrix leaky = execute_plan(data, weights, plan, cfg, cal);
    double err = 0.0;
    for (size_t k = 0; k < leaky.data.size(); ++k) {
      err = std::max(err, std::abs(leaky.data[k] - ideal_out.data[k]));
    }
    CHECK(err >= last_err);
    last_err = err;
  }
  CHECK(last_err > 1e-3);
}

TEST_CASE("negative-infinity crosstalk is the ideal path") {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(25);
  Matrix data = random_matrix(rng, 3, 8, 0.0, 1.0);
  Matrix weights = random_matrix(rng, 2, 8, -1.0, 1.0);
  ChannelPlan plan = plan_matmul(3, 8, 2, 2, 2);
  Matrix a = execute_plan(data, weights, plan, cfg, cal);
  plan.crosstalk_db = -std::numeric_limits<double>::infinity();
  Matrix b = execute_plan(data, weights, plan, cfg, cal);
  CHECK(a.data == b.data);
}

TEST_CASE("throughput arithmetic") {
  ChannelPlan one = plan_matmul(1, 784, 1, 1, 1);
  CHECK(throughput_estimate(one, 50e9) == 1.0e11);

  ChannelPlan hundred = plan_matmul(100, 784, 1, 100, 1);
  CHECK(hundred.parallel_channels() == 100);
  CHECK(throughput_estimate(hundred, 50e9) == 1.0e13);

  ChannelPlan tiny = plan_matmul(1, 4, 1, 1, 1);
  CHECK(throughput_estimate(tiny, 1.0) == 2.0);

  // guard symbols derate by N/(N+guard)
  ChannelPlan guarded = plan_matmul(1, 12, 1, 1, 1);
  CHECK(throughput_estimate(guarded, 1.0, 4) == doctest::Approx(2.0 * 12.0 / 16.0));

  CHECK_THROWS_AS(throughput_estimate(one, 0.0), RangeError);
}
