#include "edgetune/synth_device.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"

namespace edgetune {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate(const SynthDeviceParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError(std::string(name) + " must be positive");
  };
  positive(p.p_static, "p_static");
  positive(p.power_coeff, "power_coeff");
  positive(p.parallel_cap, "parallel_cap");
  positive(p.per_sample_cost, "per_sample_cost");
  positive(p.freq_efficiency, "freq_efficiency");
  positive(p.avg_power_fraction, "avg_power_fraction");
  if (p.avg_power_fraction > 1.0) throw DataError("avg_power_fraction must be at most 1");
  if (!(p.noise_level >= 0.0 && p.noise_level < 1.0)) {
    throw DataError("noise_level must be in [0, 1)");
  }
  if (p.voltage_curve.empty()) throw DataError("voltage_curve is empty");
  for (std::size_t k = 0; k < p.voltage_curve.size(); ++k) {
    const auto& v = p.voltage_curve[k];
    positive(v.frequency_mhz, "voltage_curve frequency");
    positive(v.volts, "voltage_curve volts");
    if (k > 0) {
      const auto& prev = p.voltage_curve[k - 1];
      if (v.frequency_mhz <= prev.frequency_mhz) {
        throw DataError("voltage_curve frequencies must be strictly increasing");
      }
      if (v.volts < prev.volts) throw DataError("voltage_curve must be non-decreasing");
    }
  }
}

void validate(const SynthConvergenceParams& p) {
  if (!(p.n_min > 0.0) || !std::isfinite(p.n_min)) throw DataError("n_min must be positive");
  if (!(p.b_noise > 0.0) || !std::isfinite(p.b_noise)) throw DataError("b_noise must be positive");
}

double voltage_at(const SynthDeviceParams& params, double f) {
  const auto& curve = params.voltage_curve;
  if (f <= curve.front().frequency_mhz) return curve.front().volts;
  if (f >= curve.back().frequency_mhz) return curve.back().volts;
  const auto hi = std::upper_bound(curve.begin(), curve.end(), f,
                                   [](double x, const VoltagePoint& v) { return x < v.frequency_mhz; });
  const auto lo = hi - 1;
  const double t = (f - lo->frequency_mhz) / (hi->frequency_mhz - lo->frequency_mhz);
  // clamp guards the interpolation against rounding past either endpoint
  return std::clamp(lo->volts + t * (hi->volts - lo->volts), lo->volts, hi->volts);
}

SynthDeviceParams effective_params(const SynthDeviceParams& params) {
  if (params.noise_level == 0.0) return params;
  std::mt19937_64 rng(params.rng_seed);
  auto jitter = [&] { return 1.0 + params.noise_level * (2.0 * unit_uniform(rng) - 1.0); };
  SynthDeviceParams out = params;
  out.p_static *= jitter();
  out.power_coeff *= jitter();
  out.per_sample_cost *= jitter();
  out.noise_level = 0.0;
  return out;
}

namespace {

double occupancy(int b, double parallel_cap) {
  return std::min(static_cast<double>(b), parallel_cap) / parallel_cap;
}

double dynamic_power(int b, double f, const SynthDeviceParams& p) {
  const double v = voltage_at(p, f);
  return p.power_coeff * f * v * v * occupancy(b, p.parallel_cap);
}

double time_noiseless(int b, double f, const SynthDeviceParams& p, std::int64_t s) {
  const double work = static_cast<double>(s) * p.per_sample_cost * p.freq_efficiency;
  return work / (f * std::min(static_cast<double>(b), p.parallel_cap));
}

}  // namespace

double synth_power(int batch_size, double frequency_mhz, const SynthDeviceParams& params) {
  const auto p = effective_params(params);
  return p.p_static + dynamic_power(batch_size, frequency_mhz, p);
}

double synth_avg_power(int batch_size, double frequency_mhz, const SynthDeviceParams& params) {
  const auto p = effective_params(params);
  return p.p_static + p.avg_power_fraction * dynamic_power(batch_size, frequency_mhz, p);
}

double synth_time(int batch_size, double frequency_mhz, const SynthDeviceParams& params,
                  std::int64_t samples_per_unit) {
  return time_noiseless(batch_size, frequency_mhz, effective_params(params), samples_per_unit);
}

SampleCounts synth_counts(std::span<const int> batch_sizes, const SynthConvergenceParams& params) {
  validate(params);
  SampleCounts counts;
  for (int b : batch_sizes) {
    const double n = std::ceil(params.n_min * (1.0 + static_cast<double>(b) / params.b_noise));
    counts[b] = std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
  }
  return counts;
}

SampleCounts distort_counts(const SampleCounts& counts, double magnitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleCounts out;
  for (const auto& [b, n] : counts) {
    const double factor = 1.0 + magnitude * (2.0 * unit_uniform(rng) - 1.0);
    out[b] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(n * factor)));
  }
  return out;
}

DeviceProfile generate_profile(std::span<const int> batch_sizes,
                               std::span<const double> frequencies_mhz,
                               const SynthDeviceParams& params, std::int64_t samples_per_unit,
                               std::string model_id) {
  validate(params);
  const auto p = effective_params(params);
  const auto nb = batch_sizes.size();
  const auto nf = frequencies_mhz.size();
  Table time(nb, nf, 0.0);
  Table peak = time;
  Table avg = time;
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nf; ++j) {
      const int b = batch_sizes[i];
      const double f = frequencies_mhz[j];
      const double dyn = dynamic_power(b, f, p);
      time(i, j) = time_noiseless(b, f, p, samples_per_unit);
      peak(i, j) = p.p_static + dyn;
      avg(i, j) = p.p_static + p.avg_power_fraction * dyn;
    }
  }
  return DeviceProfile(std::move(model_id), {batch_sizes.begin(), batch_sizes.end()},
                       {frequencies_mhz.begin(), frequencies_mhz.end()}, std::move(time),
                       std::move(peak), std::move(avg), samples_per_unit);
}

SynthDeviceParams sample_device_params(std::mt19937_64& rng, std::span<const double> axis) {
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
  SynthDeviceParams p;
  p.p_static = uniform(0.5, 2.5);
  p.power_coeff = uniform(0.002, 0.01);
  const double f_lo = axis.empty() ? 100.0 : axis.front();
  const double f_hi = axis.empty() ? 1000.0 : axis.back();
  const double v_lo = uniform(0.6, 0.9);
  const double v_hi = v_lo + uniform(0.0, 0.5);
  p.voltage_curve = {{f_lo, v_lo}};
  if (f_hi > f_lo) {
    const double f_mid = f_lo + uniform(0.2, 0.8) * (f_hi - f_lo);
    p.voltage_curve.push_back({f_mid, v_lo + uniform(0.0, 1.0) * (v_hi - v_lo)});
    p.voltage_curve.push_back({f_hi, v_hi});
  }
  p.parallel_cap = std::exp2(std::floor(uniform(2.0, 8.0)));
  p.per_sample_cost = uniform(1.0, 50.0);
  p.freq_efficiency = uniform(1.0, 30.0);
  p.rng_seed = rng();
  p.noise_level = uniform(0.0, 0.2);
  p.avg_power_fraction = uniform(0.5, 0.95);
  return p;
}

std::vector<double> nano_frequencies() {
  return {77, 154, 230, 307, 384, 460, 537, 614, 691, 768, 845, 921};
}

// ---------------------------------------------------------------------------
// key=value files

namespace {

std::map<std::string, std::string> parse_key_values(std::string_view text, const char* source) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  const auto lines = read_lines(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, n + 1, "expected key=value");
    std::string key(trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ParseError(source, n + 1, "duplicate key '" + key + "'");
    }
  }
  return kv;
}

double take_double(std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto v = parse_double(it->second);
  if (!v) throw DataError("invalid value for " + key + ": '" + it->second + "'");
  kv.erase(it);
  return *v;
}

std::uint64_t take_seed(std::map<std::string, std::string>& kv, std::uint64_t fallback) {
  const auto it = kv.find("rng_seed");
  if (it == kv.end()) return fallback;
  std::uint64_t seed = 0;
  const auto& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("invalid rng_seed '" + text + "'");
  }
  kv.erase(it);
  return seed;
}

void reject_leftovers(const std::map<std::string, std::string>& kv) {
  if (!kv.empty()) throw DataError("unknown key '" + kv.begin()->first + "'");
}

}  // namespace

SynthDeviceParams load_device_params(std::string_view text) {
  auto kv = parse_key_values(text, "<device-params>");
  SynthDeviceParams p;
  p.p_static = take_double(kv, "p_static", p.p_static);
  p.power_coeff = take_double(kv, "power_coeff", p.power_coeff);
  p.parallel_cap = take_double(kv, "parallel_cap", p.parallel_cap);
  p.per_sample_cost = take_double(kv, "per_sample_cost", p.per_sample_cost);
  p.freq_efficiency = take_double(kv, "freq_efficiency", p.freq_efficiency);
  p.noise_level = take_double(kv, "noise_level", p.noise_level);
  p.avg_power_fraction = take_double(kv, "avg_power_fraction", p.avg_power_fraction);
  p.rng_seed = take_seed(kv, p.rng_seed);
  if (const auto it = kv.find("voltage_curve"); it != kv.end()) {
    p.voltage_curve.clear();
    for (auto point : split(it->second, ';')) {
      const auto parts = split(point, ':');
      const auto f = parts.size() == 2 ? parse_double(parts[0]) : std::nullopt;
      const auto v = parts.size() == 2 ? parse_double(parts[1]) : std::nullopt;
      if (!f || !v) throw DataError("invalid voltage_curve point '" + std::string(point) + "'");
      p.voltage_curve.push_back({*f, *v});
    }
    kv.erase(it);
  }
  reject_leftovers(kv);
  validate(p);
  return p;
}

std::string save_device_params(const SynthDeviceParams& p) {
  std::string out;
  out += "p_static=" + format_double(p.p_static) + '\n';
  out += "power_coeff=" + format_double(p.power_coeff) + '\n';
  out += "voltage_curve=";
  for (std::size_t k = 0; k < p.voltage_curve.size(); ++k) {
    if (k > 0) out += ';';
    out += format_double(p.voltage_curve[k].frequency_mhz) + ':' +
           format_double(p.voltage_curve[k].volts);
  }
  out += '\n';
  out += "parallel_cap=" + format_double(p.parallel_cap) + '\n';
  out += "per_sample_cost=" + format_double(p.per_sample_cost) + '\n';
  out += "freq_efficiency=" + format_double(p.freq_efficiency) + '\n';
  out += "rng_seed=" + std::to_string(p.rng_seed) + '\n';
  out += "noise_level=" + format_double(p.noise_level) + '\n';
  out += "avg_power_fraction=" + format_double(p.avg_power_fraction) + '\n';
  return out;
}

SynthConvergenceParams load_convergence_params(std::string_view text) {
  auto kv = parse_key_values(text, "<convergence-params>");
  SynthConvergenceParams p;
  p.n_min = take_double(kv, "n_min", p.n_min);
  p.b_noise = take_double(kv, "b_noise", p.b_noise);
  p.rng_seed = take_seed(kv, p.rng_seed);
  reject_leftovers(kv);
  validate(p);
  return p;
}

}  // namespace edgetune
