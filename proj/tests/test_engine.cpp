#include <doctest.h>

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "tempocomp/matrix.hpp"
#include "tempocomp/oracle.hpp"
#include "tempocomp/summation.hpp"

using namespace tempocomp;

namespace {

EngineConfig noiseless() {
  EngineConfig cfg;
  cfg.noise_enabled = false;
  return cfg;
}

std::vector<double> random_unit(std::mt19937_64& rng, size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<double> random_signed(std::mt19937_64& rng, size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("weighted sum reproduces the hand dot product") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  const std::vector<double> data{1.0, 0.0, 1.0};
  const std::vector<double> weights{0.5, -0.3, 0.25};
  CHECK(weighted_sum(data, weights, cfg, cal) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("zero weights give zero output") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(2);
  auto data = random_unit(rng, 24);
  std::vector<double> weights(24, 0.0);
  CHECK(std::abs(weighted_sum(data, weights, cfg, cal)) <= 1e-12);
}

TEST_CASE("basis-vector data selects one weight") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(3);
  auto weights = random_signed(rng, 8);
  for (size_t k = 0; k < 8; ++k) {
    std::vector<double> e(8, 0.0);
    e[k] = 1.0;
    CHECK(weighted_sum(e, weights, cfg, cal) ==
          doctest::Approx(weights[k]).epsilon(1e-9));
  }
}

TEST_CASE("length mismatch is rejected") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::vector<double> d{0.5, 0.5};
  std::vector<double> w{1.0};
  CHECK_THROWS_AS(weighted_sum(d, w, cfg, cal), DimensionError);
}

TEST_CASE("calibration makes the unit product read one") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  CHECK(cal.gain > 0.0);
  CHECK(cal.residual_offset == doctest::Approx(0.0));
  std::vector<double> one{1.0};
  CHECK(weighted_sum(one, one, cfg, cal) == doctest::Approx(1.0).epsilon(1e-9));

  // the charge-per-unit-product closed form at the default operating point
  const double per_unit = cfg.bpd.responsivity * cfg.laser.intensity_in / 4.0;
  const double t_sym = cfg.scheme.samples_per_symbol / cfg.scheme.sample_rate();
  const double expected_gain = per_unit * t_sym / cfg.bpd.capacitance();
  CHECK(cal.gain == doctest::Approx(expected_gain).epsilon(1e-9));
}

TEST_CASE("calibration absorbs laser power changes") {
  EngineConfig cfg = noiseless();
  EngineConfig doubled = cfg;
  doubled.laser.intensity_in *= 2.0;
  CalibrationResult cal = calibrate_gain(cfg);
  CalibrationResult cal2 = calibrate_gain(doubled);
  CHECK(cal2.gain == doctest::Approx(2.0 * cal.gain).epsilon(1e-9));

  std::mt19937_64 rng(4);
  auto data = random_unit(rng, 16);
  auto weights = random_signed(rng, 16);
  CHECK(weighted_sum(data, weights, doubled, cal2) ==
        doctest::Approx(weighted_sum(data, weights, cfg, cal)).epsilon(1e-9));
}

TEST_CASE("noise is muted during calibration") {
  EngineConfig cfg;  // noise on
  CalibrationResult a = calibrate_gain(cfg);
  cfg.noise.rng_seed += 17;
  CalibrationResult b = calibrate_gain(cfg);
  CHECK(a.gain == b.gain);
  CHECK(a.residual_offset == b.residual_offset);
}

TEST_CASE("engine output matches the exact dot product across sizes") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(5);
  for (size_t n : {1u, 16u, 64u, 256u}) {
    for (int rep = 0; rep < 8; ++rep) {
      auto data = random_unit(rng, n);
      auto weights = random_signed(rng, n);
      const double expected = oracle::dot_digital(data, weights);
      const double got = weighted_sum(data, weights, cfg, cal);
      const double tol = std::abs(expected) > 1e-12 ? 1e-9 * std::abs(expected) : 1e-12;
      CHECK(std::abs(got - expected) <= tol);
    }
  }
}

TEST_CASE("scaling the data scales the output") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(6);
  auto data = random_unit(rng, 32);
  auto weights = random_signed(rng, 32);
  const double base = weighted_sum(data, weights, cfg, cal);
  for (double a : {0.0, 0.25, 0.5, 0.9}) {
    std::vector<double> scaled(data);
    for (double& x : scaled) x *= a;
    CHECK(weighted_sum(scaled, weights, cfg, cal) ==
          doctest::Approx(a * base).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("weights are additive while inside drive range") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(7);
  auto data = random_unit(rng, 32);
  auto w1 = random_signed(rng, 32);
  auto w2 = random_signed(rng, 32);
  std::vector<double> sum(32);
  for (size_t k = 0; k < 32; ++k) {
    w1[k] *= 0.5;
    w2[k] *= 0.5;
    sum[k] = w1[k] + w2[k];
  }
  const double v = weighted_sum(data, sum, cfg, cal);
  const double split = weighted_sum(data, w1, cfg, cal) + weighted_sum(data, w2, cfg, cal);
  CHECK(v == doctest::Approx(split).epsilon(1e-9).scale(1.0));
}

TEST_CASE("negating the weights negates the output") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(8);
  auto data = random_unit(rng, 48);
  auto weights = random_signed(rng, 48);
  std::vector<double> negated(weights);
  for (double& x : negated) x = -x;
  CHECK(weighted_sum(data, negated, cfg, cal) ==
        doctest::Approx(-weighted_sum(data, weights, cfg, cal)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("batched product matches the matrix oracle") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);

  Matrix unit(1, 1);
  unit.data = {1.0};
  Matrix out = batched_weighted_sum(unit, unit, cfg, cal);
  CHECK(out.rows == 1);
  CHECK(out.cols == 1);
  CHECK(out.data[0] == doctest::Approx(1.0).epsilon(1e-9));

  // identity pairing: matching basis rows light up the diagonal
  Matrix basis(3, 3);
  for (size_t k = 0; k < 3; ++k) basis.at(k, k) = 1.0;
  Matrix diag = batched_weighted_sum(basis, basis, cfg, cal);
  for (size_t m = 0; m < 3; ++m) {
    for (size_t l = 0; l < 3; ++l) {
      CHECK(diag.at(m, l) == doctest::Approx(m == l ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
    }
  }

  std::mt19937_64 rng(9);
  Matrix data(3, 8);
  Matrix weights(2, 8);
  for (double& x : data.data) x = std::uniform_real_distribution<double>(0, 1)(rng);
  for (double& x : weights.data) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  Matrix got = batched_weighted_sum(data, weights, cfg, cal);
  for (size_t m = 0; m < 3; ++m) {
    for (size_t l = 0; l < 2; ++l) {
      const double expected = oracle::dot_digital(data.row(m), weights.row(l));
      CHECK(got.at(m, l) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
    }
  }

  Matrix wrong(2, 7);
  CHECK_THROWS_AS(batched_weighted_sum(data, wrong, cfg, cal), DimensionError);
}

TEST_CASE("sync search recovers injected misalignment") {
  EngineConfig cfg = noiseless();
  std::mt19937_64 rng(10);
  std::vector<double> pilot(64);
  for (double& x : pilot) x = rng() & 1 ? 1.0 : 0.0;

  CHECK(find_sync_offset(cfg, pilot, 0) == 0);
  CHECK(find_sync_offset(cfg, pilot, 5) == 5);
  CHECK(find_sync_offset(cfg, pilot, -3) == -3);

  // pre-existing engine misalignment is part of what the search reports
  EngineConfig skewed = cfg;
  skewed.sync_offset = 4;
  CHECK(find_sync_offset(skewed, pilot, 2) == 6);
}

TEST_CASE("sync search rejects degenerate pilots") {
  EngineConfig cfg = noiseless();
  std::vector<double> short_pilot(16, 1.0);
  CHECK_THROWS_AS(find_sync_offset(cfg, short_pilot, 0), DimensionError);
  std::vector<double> flat(64, 1.0);
  CHECK_THROWS_AS(find_sync_offset(cfg, flat, 0), CalibrationError);
}

TEST_CASE("sync search stays within a sample under default noise") {
  EngineConfig cfg;  // noise on
  std::mt19937_64 rng(11);
  std::vector<double> pilot(64);
  for (double& x : pilot) x = rng() & 1 ? 1.0 : 0.0;
  int hits = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    cfg.noise.rng_seed = seed;
    const int found = find_sync_offset(cfg, pilot, 5);
    hits += std::abs(found - 5) <= 1;
  }
  CHECK(hits >= 95);
}

TEST_CASE("a full symbol of desync wrecks the output") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(12);
  auto data = random_unit(rng, 64);
  auto weights = random_signed(rng, 64);
  const double expected = oracle::dot_digital(data, weights);

  EngineConfig skewed = cfg;
  skewed.sync_offset = static_cast<int>(cfg.scheme.samples_per_symbol);
  const double got = weighted_sum(data, weights, skewed, cal);
  CHECK(std::abs(got - expected) >= 10.0 * 1e-9 * std::abs(expected));
}

TEST_CASE("identical seeds give bit-identical noisy outputs") {
  EngineConfig cfg;  // noise on, default seed
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(13);
  auto data = random_unit(rng, 32);
  auto weights = random_signed(rng, 32);

  const double a = weighted_sum(data, weights, cfg, cal, FrameContext{2, 5});
  const double b = weighted_sum(data, weights, cfg, cal, FrameContext{2, 5});
  CHECK(a == b);

  // distinct substreams draw distinct noise
  const double c = weighted_sum(data, weights, cfg, cal, FrameContext{2, 6});
  CHECK(a != c);

  EngineConfig reseeded = cfg;
  reseeded.noise.rng_seed += 1;
  CHECK(a != weighted_sum(data, weights, reseeded, cal, FrameContext{2, 5}));
}

TEST_CASE("batched evaluation equals frame-by-frame evaluation under noise") {
  EngineConfig cfg;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(14);
  Matrix data(2, 12);
  Matrix weights(3, 12);
  for (double& x : data.data) x = std::uniform_real_distribution<double>(0, 1)(rng);
  for (double& x : weights.data) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  Matrix batched = batched_weighted_sum(data, weights, cfg, cal, 4);
  for (size_t m = 0; m < 2; ++m) {
    for (size_t l = 0; l < 3; ++l) {
      const double single =
          weighted_sum(data.row(m), weights.row(l), cfg, cal, FrameContext{4, m * 3 + l});
      CHECK(batched.at(m, l) == single);
    }
  }
}

TEST_CASE("config validation catches bias misassignment") {
  EngineConfig cfg;
  cfg.mzm_data.bias = BiasPoint::QuadraturePoint;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  EngineConfig cfg2;
  cfg2.mzm_weight.bias = BiasPoint::NullPoint;
  CHECK_THROWS_AS(cfg2.validate(), ConfigError);

  // leaky integrator needs at least one guard symbol for its reset interval
  EngineConfig cfg3;
  cfg3.bpd.integrator_mode = IntegratorMode::LeakyRC;
  cfg3.scheme.guard_symbols = 0;
  CHECK_THROWS_AS(cfg3.validate(), ConfigError);

  EngineConfig ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("out-of-range operands are rejected with their index") {
  EngineConfig cfg = noiseless();
  CalibrationResult cal = calibrate_gain(cfg);
  std::vector<double> data{0.5, 1.2};
  std::vector<double> weights{0.5, 0.5};
  CHECK_THROWS_AS(weighted_sum(data, weights, cfg, cal), RangeError);
  std::vector<double> data_ok{0.5, 0.5};
  std::vector<double> weights_bad{0.5, -1.2};
  CHECK_THROWS_AS(weighted_sum(data_ok, weights_bad, cfg, cal), RangeError);
}

TEST_CASE("physical weight arm with predistortion matches the oracle") {
  EngineConfig cfg = noiseless();
  cfg.fidelity = Fidelity::Physical;
  cfg.weight_predistort = true;
  CalibrationResult cal = calibrate_gain(cfg);
  std::mt19937_64 rng(15);
  auto data = random_unit(rng, 24);
  auto weights = random_signed(rng, 24);
  const double expected = oracle::dot_digital(data, weights);
  CHECK(weighted_sum(data, weights, cfg, cal) ==
        doctest::Approx(expected).epsilon(1e-9).scale(1.0));
}

TEST_CASE("physical weight arm without predistortion bends the response") {
  EngineConfig cfg = noiseless();
  cfg.fidelity = Fidelity::Physical;
  CalibrationResult cal = calibrate_gain(cfg);
  // gain calibration runs at w = 1, so the response follows sin(w)/sin(1)
  std::vector<double> data{1.0};
  for (double w : {0.1, 0.5, 0.95}) {
    std::vector<double> weights{w};
    const double got = weighted_sum(data, weights, cfg, cal);
    CHECK(got == doctest::Approx(std::sin(w) / std::sin(1.0)).epsilon(1e-9));
    CHECK(std::abs(got - w) > 1e-3);
  }
}
