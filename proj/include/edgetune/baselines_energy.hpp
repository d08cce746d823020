#pragma once

// Comparison policies (fixed safe frequency with the largest batch, fixed
// safe frequency with the proxy-best batch, ground-truth fastest) and the
// energy model used to compare them.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "edgetune/core_model.hpp"

namespace edgetune {

/// Worst-case frequency ceiling per power cap. An unlimited cap is stored as
/// an infinite key. Frequencies must be non-decreasing in the cap.
class SafeFrequencyTable {
 public:
  SafeFrequencyTable() = default;
  explicit SafeFrequencyTable(std::map<double, double> cap_to_mhz);

  std::optional<double> frequency_for(const PowerCap& cap) const;
  const std::map<double, double>& entries() const noexcept { return entries_; }

  bool operator==(const SafeFrequencyTable&) const = default;

 private:
  std::map<double, double> entries_;
};

/// CSV `p_max_w,f_mhz`, optional header line, '#' comments; p_max_w may be
/// "unlimited".
SafeFrequencyTable load_safe_frequencies(std::string_view text,
                                         const std::string& source = "<safe-freqs>");
SafeFrequencyTable load_safe_frequencies(std::istream& in,
                                         const std::string& source = "<safe-freqs>");
std::string save_safe_frequencies(const SafeFrequencyTable& table);

/// For each cap, the highest frequency whose worst-case peak power across
/// every profile and batch size is admitted by the cap. All profiles must
/// share one frequency axis. Caps with no safe frequency are omitted.
SafeFrequencyTable compute_safe_frequencies(std::span<const DeviceProfile> profiles,
                                            std::span<const PowerCap> caps);

/// Largest batch size at the cap's safe frequency. The pair's power is not
/// checked against the cap; the table is trusted. The estimate uses `r`
/// when given, otherwise the raw time table entry.
SelectionResult baseline1_select(const DeviceProfile& profile, const PowerCap& cap,
                                 const SafeFrequencyTable& safe,
                                 const RelationVector* r = nullptr);

/// Batch size with the smallest ratio in `r` (ties to the larger batch) at
/// the cap's safe frequency.
SelectionResult baseline2_select(const DeviceProfile& profile, const RelationVector& r,
                                 const PowerCap& cap, const SafeFrequencyTable& safe);

/// Exhaustive minimum over the feasible set using ground-truth counts.
/// Estimates are absolute seconds.
SelectionResult fastest_configuration(const DeviceProfile& profile,
                                      const SampleCounts& true_counts, const PowerCap& cap);

/// Time-to-accuracy of the result's (b, f) under ground-truth counts.
double realized_tt_acc(const SelectionResult& result, const DeviceProfile& profile,
                       const SampleCounts& true_counts);

/// avg_power(b, f) * time_table(b, f) * weight, where weight is the relation
/// ratio or sample count of the result's batch size. Average power is a
/// model of consumed energy, not a measurement of it.
/// Throws DataError "profile lacks average power" without an average table.
double energy_estimate(const SelectionResult& result, const DeviceProfile& profile,
                       double ratio_or_count);

}  // namespace edgetune
