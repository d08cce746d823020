#include <doctest.h>

#include <random>

#include "edgetune/error.hpp"
#include "edgetune/synth_device.hpp"
#include "oracles.hpp"

using namespace edgetune;
namespace et = edgetune::testing;

TEST_CASE("full occupancy at one volt reduces to static plus linear") {
  SynthDeviceParams p;
  p.voltage_curve = {{50.0, 1.0}, {2000.0, 1.0}};
  for (double f : {100.0, 307.0, 921.0}) {
    CHECK(synth_power(64, f, p) == doctest::Approx(p.p_static + p.power_coeff * f).epsilon(1e-15));
    CHECK(synth_power(128, f, p) == synth_power(64, f, p));
  }
}

TEST_CASE("voltage interpolation is clamped") {
  SynthDeviceParams p;
  CHECK(voltage_at(p, 10.0) == 0.8);
  CHECK(voltage_at(p, 5000.0) == 1.1);
  CHECK(voltage_at(p, (76.8 + 921.6) / 2) == doctest::Approx(0.95));
}

TEST_CASE("power rises and time falls over random parameter sets") {
  std::mt19937_64 rng(101);
  const auto fs = nano_frequencies();
  const std::vector<int> bs{1, 2, 4, 8, 16, 32, 64, 128, 256};
  for (int n = 0; n < 10000; ++n) {
    const auto p = sample_device_params(rng, fs);
    const int b = bs[static_cast<std::size_t>(n) % bs.size()];
    const std::size_t j = static_cast<std::size_t>(n) % (fs.size() - 1);
    CHECK(synth_power(b, fs[j], p) <= synth_power(b, fs[j + 1], p));
    CHECK(synth_time(b, fs[j], p, 4096) >= synth_time(b, fs[j + 1], p, 4096));
    CHECK(synth_power(b, fs[j], p) <= synth_power(b * 2, fs[j], p));
    CHECK(synth_avg_power(b, fs[j], p) <= synth_power(b, fs[j], p));
  }
}

TEST_CASE("doubling frequency halves time") {
  SynthDeviceParams p;
  for (int b : {4, 64, 512}) CHECK(synth_time(b, 200.0, p, 4096) == 2.0 * synth_time(b, 400.0, p, 4096));
}

TEST_CASE("throughput saturates at the parallel cap") {
  SynthDeviceParams p;
  CHECK(synth_time(32, 307, p, 4096) == 2.0 * synth_time(64, 307, p, 4096));
  CHECK(synth_time(64, 307, p, 4096) == synth_time(256, 307, p, 4096));
}

TEST_CASE("generated profiles satisfy the profile invariants") {
  std::mt19937_64 rng(103);
  for (std::size_t n = 0; n < 1000; ++n) {
    const auto nb = static_cast<std::size_t>(et::uniform_int(rng, 1, 8));
    const auto nf = static_cast<std::size_t>(et::uniform_int(rng, 1, 32));
    const auto bs = et::random_axis(rng, nb, 1, 512);
    const auto fi = et::random_axis(rng, nf, 50, 1500);
    const std::vector<double> fs(fi.begin(), fi.end());
    CHECK_NOTHROW(generate_profile(bs, fs, sample_device_params(rng, fs), 4096));
  }
}

TEST_CASE("convergence counts") {
  const std::vector<int> bs{8, 32};
  const auto c = synth_counts(bs, {});
  CHECK(c.at(8) == 15);
  CHECK(c.at(32) == 30);
  SynthConvergenceParams flat;
  flat.b_noise = 1e30;
  CHECK(synth_counts(bs, flat).at(32) == 10);
  const std::vector<int> many{4, 8, 16, 32, 64, 128};
  const auto r = relation_vector(synth_counts(many, {}));
  CHECK(r.ratio(128) == 1.0);
  CHECK(r.ratio(4).value() < 1.0);
}

TEST_CASE("seeded noise is deterministic") {
  SynthDeviceParams p;
  p.noise_level = 0.1;
  p.rng_seed = 12345;
  const std::vector<int> bs{8, 16};
  const auto fs = nano_frequencies();
  const auto a = generate_profile(bs, fs, p, 4096);
  const auto b = generate_profile(bs, fs, p, 4096);
  CHECK(a == b);
  p.rng_seed = 54321;
  CHECK_FALSE(generate_profile(bs, fs, p, 4096) == a);
  CHECK(distort_counts({{8, 100}, {16, 50}}, 0.3, 9) == distort_counts({{8, 100}, {16, 50}}, 0.3, 9));
}

TEST_CASE("parameter validation") {
  SynthDeviceParams p;
  p.noise_level = 1.0;
  CHECK_THROWS_AS(validate(p), DataError);
  p = {};
  p.voltage_curve = {{500.0, 1.0}, {400.0, 1.1}};
  CHECK_THROWS_AS(validate(p), DataError);
  p = {};
  p.power_coeff = 0.0;
  CHECK_THROWS_AS(validate(p), DataError);
  SynthConvergenceParams c;
  c.b_noise = -1;
  CHECK_THROWS_AS(validate(c), DataError);
}

TEST_CASE("parameter files round trip") {
  std::mt19937_64 rng(107);
  for (int n = 0; n < 100; ++n) {
    const auto p = sample_device_params(rng, nano_frequencies());
    CHECK(load_device_params(save_device_params(p)) == p);
  }
  SynthDeviceParams big;
  big.rng_seed = 18446744073709551615ULL;
  CHECK(load_device_params(save_device_params(big)).rng_seed == big.rng_seed);
  CHECK_THROWS_AS(load_device_params("p_static=1\nbogus=2\n"), DataError);
  CHECK_THROWS_AS(load_device_params("p_static=abc\n"), DataError);
  const auto c = load_convergence_params("n_min=20\nb_noise=8\n");
  CHECK(c.n_min == 20.0);
  CHECK(c.b_noise == 8.0);
}

TEST_CASE("unit uniform is platform independent") {
  std::mt19937_64 a(1), b(1);
  for (int i = 0; i < 100; ++i) {
    const double u = unit_uniform(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == static_cast<double>(b() >> 11) / 9007199254740992.0);
  }
}
