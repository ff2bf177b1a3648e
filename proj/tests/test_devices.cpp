#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tempocomp/devices.hpp"
#include "tempocomp/signal_encoding.hpp"

using namespace tempocomp;

namespace {

constexpr double kPi = std::numbers::pi;

Waveform intensity(std::vector<double> samples, double rate = 80e9) {
  return Waveform::create(std::move(samples), rate, SignalKind::OpticalIntensity);
}

Waveform drive(std::vector<double> samples, double rate = 80e9) {
  return Waveform::create(std::move(samples), rate, SignalKind::DriveVoltage);
}

NoiseModel no_noise() { return NoiseModel{}.quiet(); }

// full noiseless chain at the stated operating point, constant symbols
double chain_current(double m, double w, Fidelity fidelity = Fidelity::Linearized) {
  LaserParams laser;
  MzmParams data_mzm;
  MzmParams weight_mzm;
  weight_mzm.bias = BiasPoint::QuadraturePoint;
  VoaParams voa;  // alpha = 1/2

  Waveform m_wave = intensity({m}, 80e9);
  Waveform d = predistort(m_wave, data_mzm.v_pi);
  Waveform modulated = mzm_data_modulate(laser.intensity_in, d, data_mzm);
  auto [upper, lower] = split_3db(modulated);
  Waveform w_drive = drive({w * weight_mzm.v_pi / kPi});
  Waveform weighted = mzm_weight_modulate(upper, w_drive, weight_mzm, fidelity);
  Waveform attenuated = voa_attenuate(lower, voa);
  Waveform i = bpd_differential(weighted, attenuated, BpdParams{}, no_noise());
  return i.samples[0];
}

}  // namespace

TEST_CASE("data modulator anchor points") {
  MzmParams mzm;
  CHECK(mzm_data_modulate(1.0, drive({0.0}), mzm).samples[0] == doctest::Approx(0.0));
  CHECK(mzm_data_modulate(1.0, drive({3.5}), mzm).samples[0] == doctest::Approx(1.0));

  Waveform d = predistort(intensity({0.25}), mzm.v_pi);
  CHECK(mzm_data_modulate(1e-3, d, mzm).samples[0] == doctest::Approx(0.25e-3).epsilon(1e-12));
}

TEST_CASE("data modulator rejects quadrature bias") {
  MzmParams mzm;
  mzm.bias = BiasPoint::QuadraturePoint;
  CHECK_THROWS_AS(mzm_data_modulate(1.0, drive({0.0}), mzm), ConfigError);
}

TEST_CASE("3-dB splitter halves every sample") {
  auto [a, b] = split_3db(intensity({1.0}));
  CHECK(a.samples == std::vector<double>{0.5});
  CHECK(b.samples == std::vector<double>{0.5});

  auto [z1, z2] = split_3db(intensity({0.0}));
  CHECK(z1.samples == std::vector<double>{0.0});
  CHECK(z2.samples == std::vector<double>{0.0});

  auto [c, d] = split_3db(intensity({0.2, 0.4}));
  CHECK(c.samples[0] == doctest::Approx(0.1));
  CHECK(c.samples[1] == doctest::Approx(0.2));
  CHECK(d.samples == c.samples);
}

TEST_CASE("weight modulator anchor points") {
  MzmParams mzm;
  mzm.bias = BiasPoint::QuadraturePoint;
  Waveform in = intensity({0.6});

  CHECK(mzm_weight_modulate(in, drive({0.0}), mzm, Fidelity::Linearized).samples[0] ==
        doctest::Approx(0.3));
  CHECK(mzm_weight_modulate(in, drive({mzm.v_pi / kPi}), mzm, Fidelity::Linearized).samples[0] ==
        doctest::Approx(0.6));
  CHECK(mzm_weight_modulate(in, drive({-mzm.v_pi / kPi}), mzm, Fidelity::Linearized).samples[0] ==
        doctest::Approx(0.0));
}

TEST_CASE("weight modulator rejects over-range linearized drive and null bias") {
  MzmParams mzm;
  mzm.bias = BiasPoint::QuadraturePoint;
  Waveform in = intensity({1.0});
  CHECK_THROWS_AS(
      mzm_weight_modulate(in, drive({1.01 * mzm.v_pi / kPi}), mzm, Fidelity::Linearized),
      RangeError);
  // the physical sine transfer has no such restriction
  CHECK_NOTHROW(
      mzm_weight_modulate(in, drive({1.01 * mzm.v_pi / kPi}), mzm, Fidelity::Physical));

  MzmParams null_biased;
  CHECK_THROWS_AS(mzm_weight_modulate(in, drive({0.0}), null_biased, Fidelity::Linearized),
                  ConfigError);
}

TEST_CASE("attenuator scales intensity") {
  CHECK(voa_attenuate(intensity({1.0}), VoaParams{0.5}).samples[0] == doctest::Approx(0.5));
  CHECK(voa_attenuate(intensity({0.7}), VoaParams{0.0}).samples[0] == doctest::Approx(0.0));
  CHECK(voa_attenuate(intensity({0.7}), VoaParams{1.0}).samples[0] == doctest::Approx(0.7));
}

TEST_CASE("balanced detector cancels common mode") {
  Waveform same = intensity({0.1, 0.2, 0.3});
  Waveform i = bpd_differential(same, same, BpdParams{}, no_noise());
  for (double s : i.samples) CHECK(s == 0.0);
}

TEST_CASE("balanced detector rejects length mismatch") {
  CHECK_THROWS_AS(
      bpd_differential(intensity({0.1, 0.2}), intensity({0.1}), BpdParams{}, no_noise()),
      DimensionError);
}

TEST_CASE("full chain hits the quarter-scale operating point") {
  // M=1, w=+1, alpha=1/2: differential current is R*I_in/4
  LaserParams laser;
  CHECK(chain_current(1.0, 1.0) == doctest::Approx(laser.intensity_in / 4.0).epsilon(1e-12));
  CHECK(chain_current(1.0, -1.0) == doctest::Approx(-laser.intensity_in / 4.0).epsilon(1e-12));
  CHECK(chain_current(0.3, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("chain current matches the product law over random operands") {
  LaserParams laser;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> um(0.0, 1.0);
  std::uniform_real_distribution<double> uw(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double m = um(rng);
    const double w = uw(rng);
    const double expected = laser.intensity_in * m * w / 4.0;
    const double got = chain_current(m, w);
    CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("optical stages never amplify") {
  MzmParams data_mzm;
  MzmParams weight_mzm;
  weight_mzm.bias = BiasPoint::QuadraturePoint;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> um(0.0, 1.0);
  std::uniform_real_distribution<double> uw(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double i_in = 1e-3;
    Waveform d = predistort(intensity({um(rng)}), data_mzm.v_pi);
    Waveform modulated = mzm_data_modulate(i_in, d, data_mzm);
    CHECK(modulated.samples[0] <= i_in * (1.0 + 1e-15));
    CHECK(modulated.samples[0] >= 0.0);

    auto [upper, lower] = split_3db(modulated);
    CHECK(upper.samples[0] <= modulated.samples[0]);

    Waveform w_drive = drive({uw(rng) * weight_mzm.v_pi / kPi});
    for (Fidelity f : {Fidelity::Linearized, Fidelity::Physical}) {
      Waveform weighted = mzm_weight_modulate(upper, w_drive, weight_mzm, f);
      CHECK(weighted.samples[0] <= upper.samples[0] * (1.0 + 1e-15));
      CHECK(weighted.samples[0] >= 0.0);
    }
    CHECK(voa_attenuate(lower, VoaParams{0.5}).samples[0] <= lower.samples[0]);
  }
}

TEST_CASE("physical transfer stays within the cubic remainder of the linearized one") {
  MzmParams mzm;
  mzm.bias = BiasPoint::QuadraturePoint;
  Waveform in = intensity({0.8});
  for (double x = -0.1; x <= 0.1; x += 0.004) {
    Waveform w_drive = drive({x * mzm.v_pi / kPi});
    const double lin = mzm_weight_modulate(in, w_drive, mzm, Fidelity::Linearized).samples[0];
    const double phys = mzm_weight_modulate(in, w_drive, mzm, Fidelity::Physical).samples[0];
    const double bound = (in.samples[0] / 2.0) * std::abs(x * x * x) / 6.0;
    CHECK(std::abs(phys - lin) <= bound + 1e-18);
  }
}

TEST_CASE("gated integrator closed form") {
  // constant 1 uA over 100 ns into C = 1/(2 pi * 150 MHz * 10 kOhm)
  BpdParams bpd;
  const double rate = 1e9;  // 1 ns steps
  Waveform i = Waveform::create(std::vector<double>(100, 1e-6), rate, SignalKind::Photocurrent);
  const double v = integrate_frame(i, 0, 100, bpd);
  const double expected = 1e-6 * 100e-9 / bpd.capacitance();
  CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.9424777960769379).epsilon(1e-9));
}

TEST_CASE("gated integrator is exactly linear") {
  BpdParams bpd;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e-4, 1e-4);
  std::vector<double> s1(64), s2(64), mix(64);
  const double a = 0.7, b = -1.3;
  for (size_t k = 0; k < 64; ++k) {
    s1[k] = u(rng);
    s2[k] = u(rng);
    mix[k] = a * s1[k] + b * s2[k];
  }
  const double rate = 80e9;
  const double v1 = integrate_frame(Waveform::create(s1, rate, SignalKind::Photocurrent), 0, 64, bpd);
  const double v2 = integrate_frame(Waveform::create(s2, rate, SignalKind::Photocurrent), 0, 64, bpd);
  const double vm = integrate_frame(Waveform::create(mix, rate, SignalKind::Photocurrent), 0, 64, bpd);
  CHECK(vm == doctest::Approx(a * v1 + b * v2).epsilon(1e-12));
}

TEST_CASE("integrator edge cases") {
  BpdParams bpd;
  Waveform zero = Waveform::create(std::vector<double>(16, 0.0), 1e9, SignalKind::Photocurrent);
  CHECK(integrate_frame(zero, 0, 16, bpd) == 0.0);
  CHECK_THROWS_AS(integrate_frame(zero, 8, 16, bpd), DimensionError);
}

TEST_CASE("slow leaky integrator approaches the gated one") {
  // tau >= 1000x window: bandwidth low enough that droop is negligible
  BpdParams gated;
  BpdParams leaky;
  const double window_s = 100e-9;
  leaky.bandwidth = 1.0 / (2.0 * kPi * 1000.0 * window_s);
  gated.bandwidth = leaky.bandwidth;
  leaky.integrator_mode = IntegratorMode::LeakyRC;

  Waveform i = Waveform::create(std::vector<double>(100, 1e-6), 1e9, SignalKind::Photocurrent);
  const double vg = integrate_frame(i, 0, 100, gated);
  const double vl = integrate_frame(i, 0, 100, leaky);
  CHECK(std::abs(vl - vg) / vg <= 0.01);
}

TEST_CASE("leaky integrator matches the scalar recurrence") {
  BpdParams bpd;
  bpd.integrator_mode = IntegratorMode::LeakyRC;
  const double rate = 80e9;
  const double tau = 1.0 / (2.0 * kPi * bpd.bandwidth);
  const double dt = 1.0 / rate;
  const double a = std::exp(-dt / tau);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1e-5, 1e-5);
  std::vector<double> s(40);
  for (double& x : s) x = u(rng);
  double v = 0.0;
  for (double x : s) v = a * v + (1.0 - a) * bpd.parasitic_resistance * x;
  Waveform i = Waveform::create(s, rate, SignalKind::Photocurrent);
  CHECK(integrate_frame(i, 0, 40, bpd) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("bias drift walk is seeded and scales with its std") {
  NoiseModel quiet = no_noise();
  for (double phi : apply_bias_drift(quiet, 32)) CHECK(phi == 0.0);

  NoiseModel noisy;
  noisy.bias_drift_std = 1e-3;
  auto a = apply_bias_drift(noisy, 100, 7);
  auto b = apply_bias_drift(noisy, 100, 7);
  CHECK(a == b);
  CHECK(a[0] == 0.0);
  CHECK(a != apply_bias_drift(noisy, 100, 8));

  // increment std over many seeds should concentrate near 1e-3
  double sum_sq = 0.0;
  size_t count = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    NoiseModel nm = noisy;
    nm.rng_seed = seed;
    auto walk = apply_bias_drift(nm, 10000);
    for (size_t k = 1; k < walk.size(); ++k) {
      const double step = walk[k] - walk[k - 1];
      sum_sq += step * step;
      ++count;
    }
  }
  const double sample_std = std::sqrt(sum_sq / static_cast<double>(count));
  CHECK(sample_std == doctest::Approx(1e-3).epsilon(0.05));
}

TEST_CASE("detector noise is seeded white noise on top of the difference") {
  NoiseModel nm;
  nm.detector_noise_std = 1e-6;
  Waveform upper = intensity(std::vector<double>(256, 0.4));
  Waveform lower = intensity(std::vector<double>(256, 0.4));
  Waveform i1 = bpd_differential(upper, lower, BpdParams{}, nm, 3);
  Waveform i2 = bpd_differential(upper, lower, BpdParams{}, nm, 3);
  CHECK(i1.samples == i2.samples);

  double mean = 0.0;
  for (double s : i1.samples) mean += s;
  mean /= static_cast<double>(i1.samples.size());
  double var = 0.0;
  for (double s : i1.samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(i1.samples.size() - 1);
  CHECK(std::sqrt(var) == doctest::Approx(1e-6).epsilon(0.25));
}

TEST_CASE("parameter validation rejects nonphysical values") {
  LaserParams laser;
  laser.intensity_in = 0.0;
  CHECK_THROWS_AS(laser.validate(), ConfigError);

  MzmParams mzm;
  mzm.v_pi = -1.0;
  CHECK_THROWS_AS(mzm.validate(), ConfigError);

  VoaParams voa;
  voa.alpha = 1.2;
  CHECK_THROWS_AS(voa.validate(), ConfigError);

  BpdParams bpd;
  bpd.bandwidth = 0.0;
  CHECK_THROWS_AS(bpd.validate(), ConfigError);

  NoiseModel nm;
  nm.detector_noise_std = -1.0;
  CHECK_THROWS_AS(nm.validate(), ConfigError);
}
