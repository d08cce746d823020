#pragma once

// Parametric stand-in for a real device: power follows the dynamic-power
// form p_static + c * f * V(f)^2 scaled by how much of the GPU a batch
// occupies, and time falls as 1 / (f * min(b, parallel_cap)). Convergence
// counts grow linearly with batch size past a critical batch. Neither model
// is fitted to hardware; they exist to exercise the selectors.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgetune/core_model.hpp"

namespace edgetune {

struct VoltagePoint {
  double frequency_mhz;
  double volts;
  bool operator==(const VoltagePoint&) const = default;
};

struct SynthDeviceParams {
  double p_static = 1.2;          // W
  double power_coeff = 0.006;     // W / (MHz * V^2) at full occupancy
  std::vector<VoltagePoint> voltage_curve{{76.8, 0.8}, {921.6, 1.1}};
  double parallel_cap = 64.0;     // batch size where throughput saturates
  double per_sample_cost = 24.0;  // work units per sample
  double freq_efficiency = 20.0;  // cycles per work unit
  std::uint64_t rng_seed = 0;
  double noise_level = 0.0;       // relative coefficient jitter, in [0, 1)
  /// Average dynamic power as a fraction of peak dynamic power.
  double avg_power_fraction = 0.8;

  bool operator==(const SynthDeviceParams&) const = default;
};

struct SynthConvergenceParams {
  double n_min = 10.0;
  double b_noise = 16.0;
  std::uint64_t rng_seed = 0;

  bool operator==(const SynthConvergenceParams&) const = default;
};

/// Throws DataError on non-positive fields or a decreasing voltage curve.
void validate(const SynthDeviceParams& params);
void validate(const SynthConvergenceParams& params);

/// Piecewise-linear interpolation of the voltage curve, clamped at the ends.
double voltage_at(const SynthDeviceParams& params, double frequency_mhz);

/// Applies the seeded per-profile coefficient noise. Identity when
/// noise_level is zero.
SynthDeviceParams effective_params(const SynthDeviceParams& params);

double synth_power(int batch_size, double frequency_mhz, const SynthDeviceParams& params);
double synth_avg_power(int batch_size, double frequency_mhz, const SynthDeviceParams& params);
double synth_time(int batch_size, double frequency_mhz, const SynthDeviceParams& params,
                  std::int64_t samples_per_unit);

/// N(b) = ceil(n_min * (1 + b / b_noise)).
SampleCounts synth_counts(std::span<const int> batch_sizes, const SynthConvergenceParams& params);

/// Scales each count by an independent factor in [1 - magnitude, 1 + magnitude]
/// (rounded up, at least 1): a proxy dataset that disagrees with the target.
SampleCounts distort_counts(const SampleCounts& counts, double magnitude, std::uint64_t seed);

DeviceProfile generate_profile(std::span<const int> batch_sizes,
                               std::span<const double> frequencies_mhz,
                               const SynthDeviceParams& params, std::int64_t samples_per_unit,
                               std::string model_id = "synthetic");

/// Uniform double in [0, 1) with the same sequence on every platform.
double unit_uniform(std::mt19937_64& rng);

/// Random but valid device parameters over the frequency range of `axis`.
SynthDeviceParams sample_device_params(std::mt19937_64& rng, std::span<const double> axis);

/// Jetson Nano GPU frequency steps (MHz), rounded to whole MHz.
std::vector<double> nano_frequencies();

/// Flat `key=value` text; keys are the field names. voltage_curve is
/// written as `f:V;f:V;...`.
SynthDeviceParams load_device_params(std::string_view text);
std::string save_device_params(const SynthDeviceParams& params);
SynthConvergenceParams load_convergence_params(std::string_view text);

}  // namespace edgetune
