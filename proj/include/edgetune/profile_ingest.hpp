#pragma once

// Measurement-log parsing, per-point aggregation, the pruned profiling
// schedule, and the on-disk profile format.
//
// Power log, one sample per line (sampled at ~1 Hz on the device):
//
//     # comments and blank lines are skipped
//     timestamp_s,power_mw
//
// Timing log, a header line followed by one mini-batch duration (seconds)
// per line. `warmup` is optional and defaults to 1; `f` is accepted as an
// alias of `f_mhz`:
//
//     b=32,f_mhz=307,warmup=1
//     0.5
//     0.2
//
// Profile file (UTF-8, LF). Numbers use the shortest decimal form that
// reads back bit-exactly. The avg_w column is present for every cell or
// for none:
//
//     model_id,s
//     resnet18,4096
//     batch_sizes,64,128
//     frequencies_mhz,307,460
//     b,f_mhz,t_s_seconds,peak_w,avg_w
//     64,307,102.04,3.9,3.3
//     ...

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgetune/core_model.hpp"
#include "edgetune/error.hpp"

namespace edgetune {

inline constexpr int kDefaultMinibatches = 5;
inline constexpr int kDefaultWarmup = 1;

struct PowerSample {
  double timestamp_s;
  double power_mw;
};

struct PowerTrace {
  std::vector<PowerSample> samples;
  double nominal_period_s = 1.0;

  double peak_mw() const;
  double mean_mw() const;
};

struct TimingTrace {
  int batch_size = 0;
  double frequency_mhz = 0.0;
  /// Every recorded duration, warm-up included.
  std::vector<double> minibatch_durations;
  std::size_t warmup_discarded = 0;

  std::span<const double> retained() const {
    return std::span<const double>(minibatch_durations).subspan(
        std::min(warmup_discarded, minibatch_durations.size()));
  }
};

/// Throws ParseError naming `source` and the 1-based line.
PowerTrace parse_power_log(std::istream& in, const std::string& source = "<power>");
PowerTrace parse_power_log(std::string_view text, const std::string& source = "<power>");

/// Throws ParseError, including "all samples discarded" when warm-up
/// consumes every duration.
TimingTrace parse_timing_log(std::istream& in, const std::string& source = "<timing>");
TimingTrace parse_timing_log(std::string_view text, const std::string& source = "<timing>");

enum class PeakMode {
  max,           // largest raw sample
  percentile99,  // nearest-rank 99th percentile, for spiky sensors
};

struct PointMeasurement {
  double t_s;     // seconds for samples_per_unit samples
  double peak_w;
  double avg_w;
};

/// T_s = mean(retained durations) * (s / b); peak and mean power in watts.
PointMeasurement aggregate_point(const PowerTrace& power, const TimingTrace& timing,
                                 std::int64_t samples_per_unit, PeakMode mode = PeakMode::max);

struct MeasuredPoint {
  int batch_size;
  double frequency_mhz;
  PointMeasurement value;
};

/// Assembles a full grid from one measurement per (b, f) cell.
/// Throws ProfileFormatError on duplicate or missing cells.
DeviceProfile assemble_profile(std::string model_id, std::int64_t samples_per_unit,
                               std::span<const MeasuredPoint> points);

// ---------------------------------------------------------------------------
// Pruned profiling schedule

struct ProbePoint {
  int batch_size;
  double frequency_mhz;
  double power_w;
  bool feasible;
};

/// Measurement order: batch sizes descending, each with an ascending,
/// contiguous frequency run that ends at the first inadmissible probe.
struct ProfilingSchedule {
  std::vector<ProbePoint> probes;

  std::vector<ProbePoint> feasible_points() const;
  /// Per batch size, the highest admissible frequency probed.
  std::vector<std::pair<int, double>> max_feasible() const;
};

using PowerOracle = std::function<double(int batch_size, double frequency_mhz)>;

/// Starts at (max b, min f) and climbs f until the cap is hit; each smaller
/// batch size resumes from the previous row's highest admissible frequency.
/// Requires power to be non-decreasing in both b and f. An unlimited cap
/// gives no pruning information, so the full grid is scheduled.
ProfilingSchedule profiling_schedule(std::span<const int> batch_sizes,
                                     std::span<const double> frequencies_mhz,
                                     const PowerCap& cap, const PowerOracle& power_oracle);

// ---------------------------------------------------------------------------
// Profile file

class ProfileFormatError : public DataError {
 public:
  enum class Kind { syntax, dimension_mismatch, duplicate_cell, missing_cell, negative_value };

  ProfileFormatError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

std::string_view to_string(ProfileFormatError::Kind kind) noexcept;

std::string save_profile(const DeviceProfile& profile);
void save_profile(const DeviceProfile& profile, std::ostream& out);

DeviceProfile load_profile(std::string_view text);
DeviceProfile load_profile(std::istream& in);

}  // namespace edgetune
