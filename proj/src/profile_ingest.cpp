#include "edgetune/profile_ingest.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "edgetune/numeric_text.hpp"

namespace edgetune {

namespace {

bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

// ---------------------------------------------------------------------------
// Power log

double PowerTrace::peak_mw() const {
  if (samples.empty()) throw DataError("power trace is empty");
  double peak = samples.front().power_mw;
  for (const auto& s : samples) peak = std::max(peak, s.power_mw);
  return peak;
}

double PowerTrace::mean_mw() const {
  if (samples.empty()) throw DataError("power trace is empty");
  double sum = 0.0;
  for (const auto& s : samples) sum += s.power_mw;
  return sum / static_cast<double>(samples.size());
}

PowerTrace parse_power_log(std::istream& in, const std::string& source) {
  PowerTrace trace;
  const auto lines = read_lines(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (is_skippable(line)) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      throw ParseError(source, n + 1, "expected 'timestamp_s,power_mw'");
    }
    const auto ts = parse_double(fields[0]);
    const auto mw = parse_double(fields[1]);
    if (!ts) throw ParseError(source, n + 1, "invalid timestamp '" + std::string(trim(fields[0])) + "'");
    if (!mw) throw ParseError(source, n + 1, "invalid power '" + std::string(trim(fields[1])) + "'");
    if (*mw < 0.0) throw ParseError(source, n + 1, "negative power");
    if (!trace.samples.empty() && *ts <= trace.samples.back().timestamp_s) {
      throw ParseError(source, n + 1, "timestamps must be strictly increasing");
    }
    trace.samples.push_back({*ts, *mw});
  }
  return trace;
}

PowerTrace parse_power_log(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  return parse_power_log(in, source);
}

// ---------------------------------------------------------------------------
// Timing log

TimingTrace parse_timing_log(std::istream& in, const std::string& source) {
  TimingTrace trace;
  const auto lines = read_lines(in);
  std::size_t header_line = 0;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (is_skippable(line)) continue;

    if (header_line == 0) {
      header_line = n + 1;
      std::optional<std::int64_t> b;
      std::optional<double> f;
      std::int64_t warmup = kDefaultWarmup;
      for (auto field : split(line, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) {
          throw ParseError(source, n + 1, "expected header 'b=<int>,f_mhz=<num>,warmup=<int>'");
        }
        const auto key = trim(field.substr(0, eq));
        const auto value = field.substr(eq + 1);
        if (key == "b") {
          b = parse_int(value);
          if (!b || *b <= 0) throw ParseError(source, n + 1, "invalid batch size");
        } else if (key == "f_mhz" || key == "f") {
          f = parse_double(value);
          if (!f || *f <= 0.0) throw ParseError(source, n + 1, "invalid frequency");
        } else if (key == "warmup") {
          const auto w = parse_int(value);
          if (!w || *w < 0) throw ParseError(source, n + 1, "invalid warmup count");
          warmup = *w;
        } else {
          throw ParseError(source, n + 1, "unknown header key '" + std::string(key) + "'");
        }
      }
      if (!b) throw ParseError(source, n + 1, "header is missing b");
      if (!f) throw ParseError(source, n + 1, "header is missing f_mhz");
      trace.batch_size = static_cast<int>(*b);
      trace.frequency_mhz = *f;
      trace.warmup_discarded = static_cast<std::size_t>(warmup);
      continue;
    }

    const auto d = parse_double(line);
    if (!d) throw ParseError(source, n + 1, "invalid duration '" + std::string(trim(line)) + "'");
    if (*d <= 0.0) throw ParseError(source, n + 1, "durations must be positive");
    trace.minibatch_durations.push_back(*d);
  }
  if (header_line == 0) throw ParseError(source, lines.size() + 1, "missing header line");
  if (trace.retained().empty()) throw ParseError(source, header_line, "all samples discarded");
  return trace;
}

TimingTrace parse_timing_log(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  return parse_timing_log(in, source);
}

// ---------------------------------------------------------------------------
// Aggregation

PointMeasurement aggregate_point(const PowerTrace& power, const TimingTrace& timing,
                                 std::int64_t samples_per_unit, PeakMode mode) {
  const auto retained = timing.retained();
  if (retained.empty()) throw DataError("all samples discarded");
  if (power.samples.empty()) throw DataError("power trace is empty");
  if (timing.batch_size <= 0) throw DataError("batch size must be positive");
  if (samples_per_unit <= 0) throw DataError("samples per unit must be positive");

  const double mean_duration =
      std::accumulate(retained.begin(), retained.end(), 0.0) / static_cast<double>(retained.size());
  const double scale = static_cast<double>(samples_per_unit) / timing.batch_size;

  double peak_mw = power.peak_mw();
  if (mode == PeakMode::percentile99) {
    std::vector<double> sorted;
    sorted.reserve(power.samples.size());
    for (const auto& s : power.samples) sorted.push_back(s.power_mw);
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
    peak_mw = sorted[std::max<std::size_t>(rank, 1) - 1];
  }

  return {mean_duration * scale, peak_mw / 1000.0, power.mean_mw() / 1000.0};
}

DeviceProfile assemble_profile(std::string model_id, std::int64_t samples_per_unit,
                               std::span<const MeasuredPoint> points) {
  using Kind = ProfileFormatError::Kind;
  std::set<int> bs;
  std::set<double> fs;
  std::map<std::pair<int, double>, PointMeasurement> cells;
  for (const auto& p : points) {
    if (!cells.emplace(std::pair{p.batch_size, p.frequency_mhz}, p.value).second) {
      throw ProfileFormatError(Kind::duplicate_cell, 0,
                               "duplicate measurement for b=" + std::to_string(p.batch_size) +
                                   ", f=" + format_double(p.frequency_mhz) + " MHz");
    }
    bs.insert(p.batch_size);
    fs.insert(p.frequency_mhz);
  }
  if (cells.empty()) throw ProfileFormatError(Kind::missing_cell, 0, "no measurements");

  const std::vector<int> batch_sizes(bs.begin(), bs.end());
  const std::vector<double> freqs(fs.begin(), fs.end());
  Table time(batch_sizes.size(), freqs.size(), 0.0);
  Table peak = time;
  Table avg = time;
  for (std::size_t i = 0; i < batch_sizes.size(); ++i) {
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      const auto it = cells.find({batch_sizes[i], freqs[j]});
      if (it == cells.end()) {
        throw ProfileFormatError(Kind::missing_cell, 0,
                                 "no measurement for b=" + std::to_string(batch_sizes[i]) +
                                     ", f=" + format_double(freqs[j]) + " MHz");
      }
      time(i, j) = it->second.t_s;
      peak(i, j) = it->second.peak_w;
      avg(i, j) = it->second.avg_w;
    }
  }
  return DeviceProfile(std::move(model_id), batch_sizes, freqs, std::move(time), std::move(peak),
                       std::move(avg), samples_per_unit);
}

// ---------------------------------------------------------------------------
// Profiling schedule

std::vector<ProbePoint> ProfilingSchedule::feasible_points() const {
  std::vector<ProbePoint> out;
  for (const auto& p : probes) {
    if (p.feasible) out.push_back(p);
  }
  return out;
}

std::vector<std::pair<int, double>> ProfilingSchedule::max_feasible() const {
  std::map<int, double> best;
  for (const auto& p : probes) {
    if (!p.feasible) continue;
    auto [it, inserted] = best.emplace(p.batch_size, p.frequency_mhz);
    if (!inserted) it->second = std::max(it->second, p.frequency_mhz);
  }
  return {best.begin(), best.end()};
}

ProfilingSchedule profiling_schedule(std::span<const int> batch_sizes,
                                     std::span<const double> frequencies_mhz,
                                     const PowerCap& cap, const PowerOracle& power_oracle) {
  ProfilingSchedule schedule;
  if (batch_sizes.empty() || frequencies_mhz.empty()) return schedule;

  if (cap.is_unlimited()) {
    for (auto b = batch_sizes.rbegin(); b != batch_sizes.rend(); ++b) {
      for (double f : frequencies_mhz) {
        schedule.probes.push_back({*b, f, power_oracle(*b, f), true});
      }
    }
    return schedule;
  }

  std::size_t start = 0;
  for (auto b = batch_sizes.rbegin(); b != batch_sizes.rend(); ++b) {
    std::optional<std::size_t> last_ok;
    for (std::size_t j = start; j < frequencies_mhz.size(); ++j) {
      const double f = frequencies_mhz[j];
      const double p = power_oracle(*b, f);
      const bool ok = cap.admits(p);
      schedule.probes.push_back({*b, f, p, ok});
      if (!ok) break;
      last_ok = j;
    }
    // a row with nothing admissible leaves the resume point where it was
    if (last_ok) start = *last_ok;
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Profile file

ProfileFormatError::ProfileFormatError(Kind kind, std::size_t line, const std::string& what)
    : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      kind_(kind),
      line_(line) {}

std::string_view to_string(ProfileFormatError::Kind kind) noexcept {
  using Kind = ProfileFormatError::Kind;
  switch (kind) {
    case Kind::syntax: return "syntax";
    case Kind::dimension_mismatch: return "dimension mismatch";
    case Kind::duplicate_cell: return "duplicate cell";
    case Kind::missing_cell: return "missing cell";
    case Kind::negative_value: return "negative value";
  }
  return "unknown";
}

void save_profile(const DeviceProfile& profile, std::ostream& out) {
  if (profile.model_id().find_first_of(",\n\r") != std::string::npos) {
    throw DataError("model id must not contain commas or line breaks");
  }
  const bool has_avg = profile.avg_power_table().has_value();
  out << "model_id,s\n" << profile.model_id() << ',' << profile.samples_per_unit() << '\n';
  out << "batch_sizes";
  for (int b : profile.batch_sizes()) out << ',' << b;
  out << "\nfrequencies_mhz";
  for (double f : profile.frequencies()) out << ',' << format_double(f);
  out << "\nb,f_mhz,t_s_seconds,peak_w" << (has_avg ? ",avg_w" : "") << '\n';
  for (std::size_t i = 0; i < profile.num_batch_sizes(); ++i) {
    for (std::size_t j = 0; j < profile.num_frequencies(); ++j) {
      out << profile.batch_sizes()[i] << ',' << format_double(profile.frequencies()[j]) << ','
          << format_double(profile.time_table()(i, j)) << ','
          << format_double(profile.power_table()(i, j));
      if (has_avg) out << ',' << format_double((*profile.avg_power_table())(i, j));
      out << '\n';
    }
  }
}

std::string save_profile(const DeviceProfile& profile) {
  std::ostringstream out;
  save_profile(profile, out);
  return out.str();
}

DeviceProfile load_profile(std::istream& in) {
  using Kind = ProfileFormatError::Kind;
  const auto lines = read_lines(in);

  // (line number, content) of every meaningful line
  std::vector<std::pair<std::size_t, std::string_view>> rows;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (!is_skippable(lines[n])) rows.emplace_back(n + 1, lines[n]);
  }
  auto need = [&](std::size_t k, const char* what) -> std::pair<std::size_t, std::string_view> {
    if (k >= rows.size()) {
      throw ProfileFormatError(Kind::syntax, lines.size() + 1, std::string("missing ") + what);
    }
    return rows[k];
  };

  auto [l0, header] = need(0, "'model_id,s' header");
  if (trim(header) != "model_id,s") {
    throw ProfileFormatError(Kind::syntax, l0, "expected 'model_id,s' header");
  }

  auto [l1, ident] = need(1, "model id line");
  const auto id_fields = split(ident, ',');
  if (id_fields.size() != 2) throw ProfileFormatError(Kind::syntax, l1, "expected '<model_id>,<s>'");
  const auto s = parse_int(id_fields[1]);
  if (!s) throw ProfileFormatError(Kind::syntax, l1, "invalid samples count");
  if (*s < 0) throw ProfileFormatError(Kind::negative_value, l1, "negative samples count");

  auto [l2, b_line] = need(2, "batch_sizes line");
  auto b_fields = split(b_line, ',');
  if (trim(b_fields[0]) != "batch_sizes" || b_fields.size() < 2) {
    throw ProfileFormatError(Kind::syntax, l2, "expected 'batch_sizes,<b>,...'");
  }
  std::vector<int> batch_sizes;
  for (std::size_t k = 1; k < b_fields.size(); ++k) {
    const auto b = parse_int(b_fields[k]);
    if (!b) throw ProfileFormatError(Kind::syntax, l2, "invalid batch size");
    if (*b < 0) throw ProfileFormatError(Kind::negative_value, l2, "negative batch size");
    batch_sizes.push_back(static_cast<int>(*b));
  }

  auto [l3, f_line] = need(3, "frequencies_mhz line");
  auto f_fields = split(f_line, ',');
  if (trim(f_fields[0]) != "frequencies_mhz" || f_fields.size() < 2) {
    throw ProfileFormatError(Kind::syntax, l3, "expected 'frequencies_mhz,<f>,...'");
  }
  std::vector<double> freqs;
  for (std::size_t k = 1; k < f_fields.size(); ++k) {
    const auto f = parse_double(f_fields[k]);
    if (!f) throw ProfileFormatError(Kind::syntax, l3, "invalid frequency");
    if (*f < 0.0) throw ProfileFormatError(Kind::negative_value, l3, "negative frequency");
    freqs.push_back(*f);
  }

  auto [l4, columns] = need(4, "column header");
  const auto col_text = trim(columns);
  bool has_avg = false;
  if (col_text == "b,f_mhz,t_s_seconds,peak_w,avg_w") {
    has_avg = true;
  } else if (col_text != "b,f_mhz,t_s_seconds,peak_w") {
    throw ProfileFormatError(Kind::syntax, l4, "expected 'b,f_mhz,t_s_seconds,peak_w[,avg_w]'");
  }
  const std::size_t width = has_avg ? 5 : 4;

  // Indices are resolved by exact lookup, so the axes must be sorted first;
  // DeviceProfile reports unsorted axes more specifically.
  const auto find_b = [&](int b) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < batch_sizes.size(); ++i) if (batch_sizes[i] == b) return i;
    return std::nullopt;
  };
  const auto find_f = [&](double f) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < freqs.size(); ++j) if (freqs[j] == f) return j;
    return std::nullopt;
  };

  const std::size_t nb = batch_sizes.size();
  const std::size_t nf = freqs.size();
  Table time(nb, nf, 0.0);
  Table peak = time;
  Table avg = time;
  std::vector<std::size_t> seen(nb * nf, 0);

  for (std::size_t k = 5; k < rows.size(); ++k) {
    const auto [ln, text] = rows[k];
    const auto fields = split(text, ',');
    if (fields.size() != width) {
      throw ProfileFormatError(Kind::syntax, ln,
                               "expected " + std::to_string(width) + " fields, got " +
                                   std::to_string(fields.size()));
    }
    const auto b = parse_int(fields[0]);
    if (!b) throw ProfileFormatError(Kind::syntax, ln, "invalid batch size");
    std::vector<double> values;
    for (std::size_t c = 1; c < width; ++c) {
      const auto v = parse_double(fields[c]);
      if (!v) throw ProfileFormatError(Kind::syntax, ln, "invalid number '" + std::string(trim(fields[c])) + "'");
      values.push_back(*v);
    }
    if (*b < 0 || std::any_of(values.begin(), values.end(), [](double v) { return v < 0.0; })) {
      throw ProfileFormatError(Kind::negative_value, ln, "negative value in cell");
    }
    const auto i = find_b(static_cast<int>(*b));
    const auto j = find_f(values[0]);
    if (!i || !j) {
      throw ProfileFormatError(Kind::dimension_mismatch, ln,
                               "cell (b=" + std::to_string(*b) + ", f=" + format_double(values[0]) +
                                   ") is not on the declared axes");
    }
    if (seen[*i * nf + *j] != 0) {
      throw ProfileFormatError(Kind::duplicate_cell, ln,
                               "duplicate cell (b=" + std::to_string(*b) + ", f=" +
                                   format_double(values[0]) + "), first on line " +
                                   std::to_string(seen[*i * nf + *j]));
    }
    seen[*i * nf + *j] = ln;
    time(*i, *j) = values[1];
    peak(*i, *j) = values[2];
    if (has_avg) avg(*i, *j) = values[3];
  }

  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nf; ++j) {
      if (seen[i * nf + j] == 0) {
        throw ProfileFormatError(Kind::missing_cell, 0,
                                 "missing cell (b=" + std::to_string(batch_sizes[i]) +
                                     ", f=" + format_double(freqs[j]) + ")");
      }
    }
  }

  std::optional<Table> avg_table;
  if (has_avg) avg_table = std::move(avg);
  return DeviceProfile(std::string(id_fields[0]), std::move(batch_sizes), std::move(freqs),
                       std::move(time), std::move(peak), std::move(avg_table), *s);
}

DeviceProfile load_profile(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_profile(in);
}

}  // namespace edgetune
