#include "edgetune/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"

namespace edgetune {

bool nearly_equal(double a, double b, double rel_tol) noexcept {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------
// Table

Table::Table(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DataError("table has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Table::Table(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

// ---------------------------------------------------------------------------
// DeviceProfile

namespace {

std::string cell_name(const std::vector<int>& b, const std::vector<double>& f, std::size_t i,
                      std::size_t j) {
  return "(b=" + std::to_string(b[i]) + ", f=" + format_double(f[j]) + " MHz)";
}

void check_shape(const Table& t, std::size_t rows, std::size_t cols, const char* name) {
  if (t.rows() != rows || t.cols() != cols) {
    throw DataError(std::string(name) + " is " + std::to_string(t.rows()) + "x" +
                    std::to_string(t.cols()) + ", axes are " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

void check_positive(const Table& t, const std::vector<int>& b, const std::vector<double>& f,
                    const char* name) {
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double v = t(i, j);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DataError(std::string(name) + " entry at " + cell_name(b, f, i, j) +
                        " must be positive and finite, got " + format_double(v));
      }
    }
  }
}

}  // namespace

DeviceProfile::DeviceProfile(std::string model_id, std::vector<int> batch_sizes,
                             std::vector<double> frequencies_mhz, Table time_table,
                             Table power_table, std::optional<Table> avg_power_table,
                             std::int64_t samples_per_unit)
    : model_id_(std::move(model_id)),
      batch_sizes_(std::move(batch_sizes)),
      frequencies_(std::move(frequencies_mhz)),
      time_(std::move(time_table)),
      power_(std::move(power_table)),
      avg_power_(std::move(avg_power_table)),
      samples_per_unit_(samples_per_unit) {
  if (batch_sizes_.empty()) throw DataError("profile has no batch sizes");
  if (frequencies_.empty()) throw DataError("profile has no frequencies");
  if (samples_per_unit_ <= 0) throw DataError("samples per unit must be positive");
  for (std::size_t i = 0; i < batch_sizes_.size(); ++i) {
    if (batch_sizes_[i] <= 0) throw DataError("batch sizes must be positive");
    if (i > 0 && batch_sizes_[i] <= batch_sizes_[i - 1]) {
      throw DataError("batch sizes must be strictly increasing");
    }
  }
  for (std::size_t j = 0; j < frequencies_.size(); ++j) {
    if (!(frequencies_[j] > 0.0) || !std::isfinite(frequencies_[j])) {
      throw DataError("frequencies must be positive and finite");
    }
    if (j > 0 && frequencies_[j] <= frequencies_[j - 1]) {
      throw DataError("frequencies must be strictly increasing");
    }
  }

  const auto rows = batch_sizes_.size();
  const auto cols = frequencies_.size();
  check_shape(time_, rows, cols, "time table");
  check_shape(power_, rows, cols, "power table");
  check_positive(time_, batch_sizes_, frequencies_, "time table");
  check_positive(power_, batch_sizes_, frequencies_, "power table");
  if (avg_power_) {
    check_shape(*avg_power_, rows, cols, "average power table");
    check_positive(*avg_power_, batch_sizes_, frequencies_, "average power table");
  }

  const std::string hint = "; re-profile the affected points";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 1; j < cols; ++j) {
      if (time_(i, j) > time_(i, j - 1)) {
        throw DataError("time increases with frequency at " +
                        cell_name(batch_sizes_, frequencies_, i, j) + hint);
      }
      if (power_(i, j) < power_(i, j - 1)) {
        throw DataError("power decreases with frequency at " +
                        cell_name(batch_sizes_, frequencies_, i, j) + hint);
      }
    }
  }
  for (std::size_t i = 1; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (power_(i, j) < power_(i - 1, j)) {
        throw DataError("power decreases with batch size at " +
                        cell_name(batch_sizes_, frequencies_, i, j) + hint);
      }
    }
  }
}

std::optional<std::size_t> DeviceProfile::batch_index(int batch_size) const {
  const auto it = std::lower_bound(batch_sizes_.begin(), batch_sizes_.end(), batch_size);
  if (it == batch_sizes_.end() || *it != batch_size) return std::nullopt;
  return static_cast<std::size_t>(it - batch_sizes_.begin());
}

std::optional<std::size_t> DeviceProfile::frequency_index(double frequency_mhz) const {
  const auto it = std::lower_bound(frequencies_.begin(), frequencies_.end(), frequency_mhz);
  if (it == frequencies_.end() || *it != frequency_mhz) return std::nullopt;
  return static_cast<std::size_t>(it - frequencies_.begin());
}

// ---------------------------------------------------------------------------
// RelationVector

RelationVector::RelationVector(std::map<int, double> entries, std::string source_id)
    : entries_(std::move(entries)), source_id_(std::move(source_id)) {
  if (entries_.empty()) throw DataError("no batch sizes");
  bool has_unit = false;
  for (const auto& [b, ratio] : entries_) {
    if (b <= 0) throw DataError("relation vector batch size must be positive");
    if (!(ratio > 0.0 && ratio <= 1.0)) {
      throw DataError("relation ratio for b=" + std::to_string(b) + " outside (0, 1]: " +
                      format_double(ratio));
    }
    has_unit = has_unit || ratio == 1.0;
  }
  if (!has_unit) throw DataError("relation vector has no entry equal to 1");
}

std::optional<double> RelationVector::ratio(int batch_size) const {
  const auto it = entries_.find(batch_size);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

RelationVector relation_vector(const SampleCounts& counts, std::string source_id) {
  if (counts.empty()) throw DataError("no batch sizes");
  std::int64_t max_count = 0;
  for (const auto& [b, n] : counts) {
    if (n <= 0) throw DataError("invalid count for b=" + std::to_string(b));
    max_count = std::max(max_count, n);
  }
  std::map<int, double> ratios;
  for (const auto& [b, n] : counts) {
    ratios[b] = static_cast<double>(n) / static_cast<double>(max_count);
  }
  return RelationVector(std::move(ratios), std::move(source_id));
}

// ---------------------------------------------------------------------------
// PowerCap

PowerCap PowerCap::watts(double p_max) {
  if (!(p_max > 0.0) || !std::isfinite(p_max)) {
    throw DataError("power cap must be a positive number of watts");
  }
  return PowerCap(p_max);
}

PowerCap PowerCap::parse(std::string_view text) {
  text = trim(text);
  if (text == "unlimited") return unlimited();
  const auto v = parse_double(text);
  if (!v) throw DataError("invalid power cap '" + std::string(text) + "'");
  return watts(*v);
}

double PowerCap::value() const noexcept {
  return p_max_ ? *p_max_ : std::numeric_limits<double>::infinity();
}

std::string PowerCap::to_string() const {
  return p_max_ ? format_double(*p_max_) : std::string("unlimited");
}

std::string_view to_string(PolicyTag tag) noexcept {
  switch (tag) {
    case PolicyTag::ours: return "ours";
    case PolicyTag::baseline1: return "baseline1";
    case PolicyTag::baseline2: return "baseline2";
    case PolicyTag::fastest: return "fastest";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Feasible set

FeasibleSet feasible_combinations(const DeviceProfile& profile, const PowerCap& cap) {
  FeasibleSet out;
  const auto& power = profile.power_table();
  for (std::size_t i = 0; i < profile.num_batch_sizes(); ++i) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < profile.num_frequencies(); ++j) {
      if (cap.admits(power(i, j))) best = j;
    }
    if (best) out.pairs.push_back({i, *best});
  }
  return out;
}

FeasibleSet feasible_combinations_bisect(const DeviceProfile& profile, const PowerCap& cap) {
  FeasibleSet out;
  for (std::size_t i = 0; i < profile.num_batch_sizes(); ++i) {
    const auto row = profile.power_table().row(i);
    // rows are non-decreasing, so admissible entries form a prefix
    const auto end = std::partition_point(row.begin(), row.end(),
                                          [&](double p) { return cap.admits(p); });
    if (end != row.begin()) {
      out.pairs.push_back({i, static_cast<std::size_t>(end - row.begin()) - 1});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimates and selection

namespace detail {

BatchWeights weights_of(const RelationVector& r) { return {r.entries(), false}; }

BatchWeights weights_of(const SampleCounts& counts) {
  BatchWeights w{{}, true};
  for (const auto& [b, n] : counts) {
    if (n <= 0) throw DataError("invalid count for b=" + std::to_string(b));
    w.weights[b] = static_cast<double>(n);
  }
  return w;
}

void require_coverage(const DeviceProfile& profile, const BatchWeights& w) {
  for (int b : profile.batch_sizes()) {
    if (!w.weights.contains(b)) {
      throw DataError("relation vector incomplete: no entry for b=" + std::to_string(b));
    }
  }
  for (const auto& [b, value] : w.weights) {
    if (!profile.batch_index(b)) {
      throw DataError("relation vector has b=" + std::to_string(b) +
                      " which is not in the profile's batch sizes");
    }
  }
}

SelectionResult select_from(const DeviceProfile& profile, const FeasibleSet& feasible,
                            const BatchWeights& w, PolicyTag tag) {
  require_coverage(profile, w);
  if (feasible.empty()) throw InfeasibleError();

  std::vector<double> estimates;
  estimates.reserve(feasible.size());
  for (const auto& [i, j] : feasible.pairs) {
    estimates.push_back(profile.time_table()(i, j) * w.weights.at(profile.batch_sizes()[i]));
  }
  const double best = *std::min_element(estimates.begin(), estimates.end());

  // Pairs are in ascending batch order with one pair per batch size, so the
  // last tying pair is the largest batch size.
  std::size_t chosen = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k] == best || nearly_equal(estimates[k], best)) chosen = k;
  }

  const auto [i, j] = feasible.pairs[chosen];
  SelectionResult result;
  result.batch_size = profile.batch_sizes()[i];
  result.frequency_mhz = profile.frequencies()[j];
  result.batch_index = i;
  result.freq_index = j;
  result.estimated_tt_acc = estimates[chosen];
  result.absolute_time = w.absolute;
  if (profile.avg_power_table()) {
    result.estimated_energy = (*profile.avg_power_table())(i, j) * result.estimated_tt_acc;
  }
  result.feasible_count = feasible.size();
  result.policy = tag;
  return result;
}

}  // namespace detail

namespace {

void check_pair(const DeviceProfile& profile, FeasiblePair pair) {
  if (pair.batch_index >= profile.num_batch_sizes() ||
      pair.freq_index >= profile.num_frequencies()) {
    throw DataError("pair index out of range");
  }
}

}  // namespace

double estimate_tt_acc(const DeviceProfile& profile, const RelationVector& r, FeasiblePair pair) {
  check_pair(profile, pair);
  const int b = profile.batch_sizes()[pair.batch_index];
  const auto ratio = r.ratio(b);
  if (!ratio) throw DataError("relation vector incomplete: no entry for b=" + std::to_string(b));
  return profile.time_table()(pair.batch_index, pair.freq_index) * *ratio;
}

double estimate_tt_acc(const DeviceProfile& profile, const SampleCounts& counts,
                       FeasiblePair pair) {
  check_pair(profile, pair);
  const int b = profile.batch_sizes()[pair.batch_index];
  const auto it = counts.find(b);
  if (it == counts.end()) {
    throw DataError("relation vector incomplete: no entry for b=" + std::to_string(b));
  }
  if (it->second <= 0) throw DataError("invalid count for b=" + std::to_string(b));
  return profile.time_table()(pair.batch_index, pair.freq_index) *
         static_cast<double>(it->second);
}

SelectionResult select_configuration(const DeviceProfile& profile, const RelationVector& r,
                                     const PowerCap& cap) {
  return detail::select_from(profile, feasible_combinations(profile, cap), detail::weights_of(r),
                             PolicyTag::ours);
}

SelectionResult select_configuration(const DeviceProfile& profile, const SampleCounts& counts,
                                     const PowerCap& cap) {
  return detail::select_from(profile, feasible_combinations(profile, cap),
                             detail::weights_of(counts), PolicyTag::ours);
}

SelectionResult select_configuration_fast(const DeviceProfile& profile, const RelationVector& r,
                                          const PowerCap& cap) {
  return detail::select_from(profile, feasible_combinations_bisect(profile, cap),
                             detail::weights_of(r), PolicyTag::ours);
}

SelectionResult select_configuration_fast(const DeviceProfile& profile,
                                          const SampleCounts& counts, const PowerCap& cap) {
  return detail::select_from(profile, feasible_combinations_bisect(profile, cap),
                             detail::weights_of(counts), PolicyTag::ours);
}

}  // namespace edgetune
