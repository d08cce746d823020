#include "edgetune/baselines_energy.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"

namespace edgetune {

SafeFrequencyTable::SafeFrequencyTable(std::map<double, double> cap_to_mhz)
    : entries_(std::move(cap_to_mhz)) {
  double prev = 0.0;
  for (const auto& [cap, f] : entries_) {
    if (!(cap > 0.0)) throw DataError("safe frequency caps must be positive");
    if (!(f > 0.0) || !std::isfinite(f)) throw DataError("safe frequencies must be positive");
    if (f < prev) {
      throw DataError("safe frequencies must be non-decreasing in the cap (cap " +
                      format_double(cap) + " W)");
    }
    prev = f;
  }
}

std::optional<double> SafeFrequencyTable::frequency_for(const PowerCap& cap) const {
  const auto it = entries_.find(cap.value());
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SafeFrequencyTable load_safe_frequencies(std::istream& in, const std::string& source) {
  std::map<double, double> entries;
  const auto lines = read_lines(in);
  bool first = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    if (first && line == "p_max_w,f_mhz") {
      first = false;
      continue;
    }
    first = false;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ParseError(source, n + 1, "expected 'p_max_w,f_mhz'");
    double cap = 0.0;
    try {
      cap = PowerCap::parse(fields[0]).value();
    } catch (const DataError& e) {
      throw ParseError(source, n + 1, e.what());
    }
    const auto f = parse_double(fields[1]);
    if (!f || *f <= 0.0) throw ParseError(source, n + 1, "invalid frequency");
    if (!entries.emplace(cap, *f).second) throw ParseError(source, n + 1, "duplicate cap");
  }
  try {
    return SafeFrequencyTable(std::move(entries));
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

SafeFrequencyTable load_safe_frequencies(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  return load_safe_frequencies(in, source);
}

std::string save_safe_frequencies(const SafeFrequencyTable& table) {
  std::string out = "p_max_w,f_mhz\n";
  for (const auto& [cap, f] : table.entries()) {
    out += std::isinf(cap) ? std::string("unlimited") : format_double(cap);
    out += ',' + format_double(f) + '\n';
  }
  return out;
}

SafeFrequencyTable compute_safe_frequencies(std::span<const DeviceProfile> profiles,
                                            std::span<const PowerCap> caps) {
  if (profiles.empty()) throw DataError("no profiles to derive safe frequencies from");
  const auto& axis = profiles.front().frequencies();
  for (const auto& p : profiles) {
    if (p.frequencies() != axis) throw DataError("profiles do not share a frequency axis");
  }
  // worst-case peak power per frequency over all models and batch sizes
  std::vector<double> worst(axis.size(), 0.0);
  for (const auto& p : profiles) {
    for (std::size_t i = 0; i < p.num_batch_sizes(); ++i) {
      for (std::size_t j = 0; j < axis.size(); ++j) {
        worst[j] = std::max(worst[j], p.power_table()(i, j));
      }
    }
  }
  std::map<double, double> entries;
  for (const auto& cap : caps) {
    std::optional<double> best;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      if (cap.admits(worst[j])) best = axis[j];
    }
    if (best) entries[cap.value()] = *best;
  }
  return SafeFrequencyTable(std::move(entries));
}

namespace {

std::size_t safe_freq_index(const DeviceProfile& profile, const PowerCap& cap,
                            const SafeFrequencyTable& safe) {
  const auto f = safe.frequency_for(cap);
  if (!f) throw DataError("no safe frequency for cap " + cap.to_string());
  const auto j = profile.frequency_index(*f);
  if (!j) {
    throw DataError("safe frequency " + format_double(*f) + " MHz is not on the profile's axis");
  }
  return *j;
}

SelectionResult fixed_point(const DeviceProfile& profile, std::size_t i, std::size_t j,
                            double weight, bool absolute, const PowerCap& cap, PolicyTag tag) {
  SelectionResult r;
  r.batch_size = profile.batch_sizes()[i];
  r.frequency_mhz = profile.frequencies()[j];
  r.batch_index = i;
  r.freq_index = j;
  r.estimated_tt_acc = profile.time_table()(i, j) * weight;
  r.absolute_time = absolute;
  if (profile.avg_power_table()) {
    r.estimated_energy = (*profile.avg_power_table())(i, j) * r.estimated_tt_acc;
  }
  r.feasible_count = feasible_combinations(profile, cap).size();
  r.policy = tag;
  return r;
}

}  // namespace

SelectionResult baseline1_select(const DeviceProfile& profile, const PowerCap& cap,
                                 const SafeFrequencyTable& safe, const RelationVector* r) {
  const std::size_t j = safe_freq_index(profile, cap, safe);
  const std::size_t i = profile.num_batch_sizes() - 1;
  double weight = 1.0;
  if (r) {
    detail::require_coverage(profile, detail::weights_of(*r));
    weight = *r->ratio(profile.batch_sizes()[i]);
  }
  return fixed_point(profile, i, j, weight, false, cap, PolicyTag::baseline1);
}

SelectionResult baseline2_select(const DeviceProfile& profile, const RelationVector& r,
                                 const PowerCap& cap, const SafeFrequencyTable& safe) {
  detail::require_coverage(profile, detail::weights_of(r));
  const std::size_t j = safe_freq_index(profile, cap, safe);

  double smallest = std::numeric_limits<double>::infinity();
  for (int b : profile.batch_sizes()) smallest = std::min(smallest, *r.ratio(b));
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < profile.num_batch_sizes(); ++i) {
    const double v = *r.ratio(profile.batch_sizes()[i]);
    if (v == smallest || nearly_equal(v, smallest)) chosen = i;
  }
  return fixed_point(profile, chosen, j, *r.ratio(profile.batch_sizes()[chosen]), false, cap,
                     PolicyTag::baseline2);
}

SelectionResult fastest_configuration(const DeviceProfile& profile,
                                      const SampleCounts& true_counts, const PowerCap& cap) {
  return detail::select_from(profile, feasible_combinations(profile, cap),
                             detail::weights_of(true_counts), PolicyTag::fastest);
}

double realized_tt_acc(const SelectionResult& result, const DeviceProfile& profile,
                       const SampleCounts& true_counts) {
  return estimate_tt_acc(profile, true_counts, {result.batch_index, result.freq_index});
}

double energy_estimate(const SelectionResult& result, const DeviceProfile& profile,
                       double ratio_or_count) {
  if (!profile.avg_power_table()) throw DataError("profile lacks average power");
  if (!(ratio_or_count > 0.0)) throw DataError("energy weight must be positive");
  const auto i = result.batch_index;
  const auto j = result.freq_index;
  return (*profile.avg_power_table())(i, j) * profile.time_table()(i, j) * ratio_or_count;
}

}  // namespace edgetune
