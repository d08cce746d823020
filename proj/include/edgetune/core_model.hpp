#pragma once

// Domain types for power-capped training configuration selection and the
// selection operations over them.
//
// All types are immutable once constructed; every operation is a pure
// function of its arguments.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgetune {

/// Relative tolerance under which two time-to-accuracy estimates are a tie.
inline constexpr double kTieRelTolerance = 1e-9;

bool nearly_equal(double a, double b, double rel_tol = kTieRelTolerance) noexcept;

/// Dense row-major matrix indexed [batch index, frequency index].
class Table {
 public:
  Table() = default;
  Table(std::size_t rows, std::size_t cols, std::vector<double> values);
  Table(std::size_t rows, std::size_t cols, double fill);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const Table&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Per-(batch size, GPU frequency) time and power lookup tables for one model.
///
/// `time_table(i, j)` is the wall-clock seconds to train `samples_per_unit`
/// samples at batch size `batch_sizes[i]` and frequency `frequencies[j]`;
/// `power_table(i, j)` is the peak power in watts observed at that point.
/// The optional average-power table feeds energy estimates only.
///
/// Construction validates the tables: positive entries, matching shapes,
/// time non-increasing and power non-decreasing along the frequency axis,
/// and power non-decreasing along the batch-size axis. Violations throw
/// DataError; noisy tables must be re-profiled, they are never smoothed.
class DeviceProfile {
 public:
  DeviceProfile(std::string model_id, std::vector<int> batch_sizes,
                std::vector<double> frequencies_mhz, Table time_table,
                Table power_table, std::optional<Table> avg_power_table,
                std::int64_t samples_per_unit);

  const std::string& model_id() const noexcept { return model_id_; }
  const std::vector<int>& batch_sizes() const noexcept { return batch_sizes_; }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  const Table& time_table() const noexcept { return time_; }
  const Table& power_table() const noexcept { return power_; }
  const std::optional<Table>& avg_power_table() const noexcept { return avg_power_; }
  std::int64_t samples_per_unit() const noexcept { return samples_per_unit_; }

  std::size_t num_batch_sizes() const noexcept { return batch_sizes_.size(); }
  std::size_t num_frequencies() const noexcept { return frequencies_.size(); }

  /// Index of `batch_size` in the batch axis, if present.
  std::optional<std::size_t> batch_index(int batch_size) const;
  /// Index of a frequency in the frequency axis (exact match), if present.
  std::optional<std::size_t> frequency_index(double frequency_mhz) const;

  bool operator==(const DeviceProfile&) const = default;

 private:
  std::string model_id_;
  std::vector<int> batch_sizes_;
  std::vector<double> frequencies_;
  Table time_;
  Table power_;
  std::optional<Table> avg_power_;
  std::int64_t samples_per_unit_;
};

/// Number of passes over `s` samples needed to reach the target accuracy,
/// keyed by batch size.
using SampleCounts = std::map<int, std::int64_t>;

/// Per-batch-size samples-to-accuracy ratios, normalized so the largest is 1.
class RelationVector {
 public:
  /// Throws DataError unless every ratio is in (0, 1] and one equals 1.
  RelationVector(std::map<int, double> entries, std::string source_id = {});

  const std::map<int, double>& entries() const noexcept { return entries_; }
  const std::string& source_id() const noexcept { return source_id_; }
  std::optional<double> ratio(int batch_size) const;

  bool operator==(const RelationVector&) const = default;

 private:
  std::map<int, double> entries_;
  std::string source_id_;
};

/// Upper bound on peak device power. A finite cap admits a measurement only
/// when it is strictly below the cap.
class PowerCap {
 public:
  static PowerCap unlimited() noexcept { return PowerCap{}; }
  /// Throws DataError for non-positive or non-finite watts.
  static PowerCap watts(double p_max);
  /// Accepts "unlimited" or a positive number of watts.
  static PowerCap parse(std::string_view text);

  bool is_unlimited() const noexcept { return !p_max_.has_value(); }
  /// Cap in watts; +infinity when unlimited.
  double value() const noexcept;
  bool admits(double peak_watts) const noexcept {
    return !p_max_ || peak_watts < *p_max_;
  }
  std::string to_string() const;

  bool operator==(const PowerCap&) const = default;
  std::partial_ordering operator<=>(const PowerCap& other) const noexcept {
    return value() <=> other.value();
  }

 private:
  PowerCap() = default;
  explicit PowerCap(double p) : p_max_(p) {}
  std::optional<double> p_max_;
};

struct FeasiblePair {
  std::size_t batch_index;
  std::size_t freq_index;
  bool operator==(const FeasiblePair&) const = default;
};

/// For each batch size with at least one admissible frequency, the highest
/// such frequency index. Ordered by ascending batch index.
struct FeasibleSet {
  std::vector<FeasiblePair> pairs;

  bool empty() const noexcept { return pairs.empty(); }
  std::size_t size() const noexcept { return pairs.size(); }
  bool operator==(const FeasibleSet&) const = default;
};

enum class PolicyTag { ours, baseline1, baseline2, fastest };

std::string_view to_string(PolicyTag tag) noexcept;

struct SelectionResult {
  int batch_size = 0;
  double frequency_mhz = 0.0;
  std::size_t batch_index = 0;
  std::size_t freq_index = 0;
  /// Seconds. Absolute when `absolute_time` is set (sample counts were
  /// supplied), otherwise scaled by 1 / max count (relation-vector input).
  double estimated_tt_acc = 0.0;
  bool absolute_time = false;
  /// Joules, present when the profile carries average power.
  std::optional<double> estimated_energy;
  std::size_t feasible_count = 0;
  PolicyTag policy = PolicyTag::ours;
};

/// Normalizes per-batch-size counts by their maximum.
/// Throws DataError for an empty map or a non-positive count.
RelationVector relation_vector(const SampleCounts& counts, std::string source_id = {});

/// Linear scan of every row for its highest admissible frequency.
FeasibleSet feasible_combinations(const DeviceProfile& profile, const PowerCap& cap);

/// Same result as feasible_combinations, locating each row's boundary by
/// binary search over the non-decreasing power row.
FeasibleSet feasible_combinations_bisect(const DeviceProfile& profile, const PowerCap& cap);

/// time_table(i, j) * r[b_i]. Because r is normalized by the largest count,
/// this is the time-to-accuracy divided by that count: a positive constant
/// factor that leaves the argmin over pairs unchanged.
/// Throws DataError if r has no entry for the pair's batch size.
double estimate_tt_acc(const DeviceProfile& profile, const RelationVector& r, FeasiblePair pair);

/// time_table(i, j) * N[b_i]: absolute time-to-accuracy in seconds.
double estimate_tt_acc(const DeviceProfile& profile, const SampleCounts& counts, FeasiblePair pair);

/// Picks the feasible pair with the smallest estimated time-to-accuracy.
/// Estimates within kTieRelTolerance of the minimum tie; ties go to the larger
/// batch size. Throws InfeasibleError on an empty feasible set and DataError
/// when the weights do not cover exactly the profile's batch sizes.
SelectionResult select_configuration(const DeviceProfile& profile, const RelationVector& r,
                                     const PowerCap& cap);
SelectionResult select_configuration(const DeviceProfile& profile, const SampleCounts& counts,
                                     const PowerCap& cap);

/// Identical contract to select_configuration, O(|B| log |F|).
SelectionResult select_configuration_fast(const DeviceProfile& profile, const RelationVector& r,
                                          const PowerCap& cap);
SelectionResult select_configuration_fast(const DeviceProfile& profile,
                                          const SampleCounts& counts, const PowerCap& cap);

namespace detail {

/// Weights applied to time-table rows, keyed by batch size.
struct BatchWeights {
  std::map<int, double> weights;
  bool absolute = false;
};

BatchWeights weights_of(const RelationVector& r);
BatchWeights weights_of(const SampleCounts& counts);

/// Throws DataError unless the weight keys equal the profile's batch axis.
void require_coverage(const DeviceProfile& profile, const BatchWeights& w);

SelectionResult select_from(const DeviceProfile& profile, const FeasibleSet& feasible,
                            const BatchWeights& w, PolicyTag tag);

}  // namespace detail

}  // namespace edgetune
