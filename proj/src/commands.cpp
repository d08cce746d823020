#include "edgetune/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"
#include "edgetune/synth_device.hpp"
#include "edgetune/weights_io.hpp"

namespace edgetune {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string dataset_id(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<PowerCap> parse_caps(std::span<const std::string> texts) {
  std::vector<PowerCap> caps;
  for (const auto& t : texts) {
    try {
      caps.push_back(PowerCap::parse(t));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  if (caps.empty()) throw UsageError("at least one --p-max is required");
  return caps;
}

std::string opt_num(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Maps exceptions to exit codes, printing the message.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Comparison

ComparisonReport build_comparison(const DeviceProfile& profile, const RelationVector& r,
                                  const SampleCounts* true_counts, std::span<const PowerCap> caps,
                                  const SafeFrequencyTable& safe) {
  if (true_counts) detail::require_coverage(profile, detail::weights_of(*true_counts));
  ComparisonReport report;
  for (const auto& cap : caps) {
    std::vector<ComparisonRow> rows;
    auto add = [&](PolicyTag tag, std::optional<SelectionResult> result) {
      ComparisonRow row;
      row.cap = cap;
      row.policy = tag;
      row.result = std::move(result);
      if (row.result) {
        if (true_counts) {
          row.realized_tt_acc = realized_tt_acc(*row.result, profile, *true_counts);
          if (profile.avg_power_table()) {
            row.energy = energy_estimate(*row.result, profile,
                                         static_cast<double>(true_counts->at(row.result->batch_size)));
          }
        } else {
          row.energy = row.result->estimated_energy;
        }
      }
      rows.push_back(std::move(row));
    };

    try {
      add(PolicyTag::ours, select_configuration(profile, r, cap));
    } catch (const InfeasibleError&) {
      add(PolicyTag::ours, std::nullopt);
    }
    add(PolicyTag::baseline1, baseline1_select(profile, cap, safe, &r));
    add(PolicyTag::baseline2, baseline2_select(profile, r, cap, safe));
    if (true_counts) {
      try {
        add(PolicyTag::fastest, fastest_configuration(profile, *true_counts, cap));
      } catch (const InfeasibleError&) {
        add(PolicyTag::fastest, std::nullopt);
      }
    }

    // speedups relative to baseline 1 on the same time basis
    auto time_of = [&](const ComparisonRow& row) -> std::optional<double> {
      if (!row.result) return std::nullopt;
      if (true_counts) return row.realized_tt_acc;
      if (row.policy == PolicyTag::fastest) return std::nullopt;
      return row.result->estimated_tt_acc;
    };
    const auto base = time_of(rows[1]);
    for (auto& row : rows) {
      const auto t = time_of(row);
      if (base && t) row.speedup_vs_baseline1 = row.policy == PolicyTag::baseline1 ? 1.0 : *base / *t;
    }
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  return report;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out =
      "p_max_w,policy,feasible,b,f_mhz,estimated_tt_acc,realized_tt_acc,energy_j,speedup_vs_baseline1\n";
  for (const auto& row : report.rows) {
    out += row.cap.to_string() + ',' + std::string(to_string(row.policy)) + ',';
    if (row.result) {
      out += "1," + std::to_string(row.result->batch_size) + ',' +
             format_double(row.result->frequency_mhz) + ',' +
             format_double(row.result->estimated_tt_acc) + ',';
    } else {
      out += "0,,,,";
    }
    out += opt_num(row.realized_tt_acc) + ',' + opt_num(row.energy) + ',' +
           opt_num(row.speedup_vs_baseline1) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sensitivity

std::vector<SensitivityMatrix> build_sensitivity(const DeviceProfile& profile,
                                                 std::vector<NamedRelation> proxies,
                                                 std::vector<NamedCounts> targets,
                                                 std::span<const PowerCap> caps) {
  std::sort(proxies.begin(), proxies.end(), [](auto& a, auto& b) { return a.id < b.id; });
  std::sort(targets.begin(), targets.end(), [](auto& a, auto& b) { return a.id < b.id; });

  std::vector<SensitivityMatrix> out;
  for (const auto& cap : caps) {
    SensitivityMatrix m;
    m.cap = cap;
    for (const auto& p : proxies) m.proxy_ids.push_back(p.id);
    for (const auto& t : targets) m.target_ids.push_back(t.id);
    m.percent.assign(proxies.size(), std::vector<std::optional<double>>(targets.size()));

    const auto feasible = feasible_combinations(profile, cap);
    if (!feasible.empty()) {
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto fastest = fastest_configuration(profile, targets[t].counts, cap);
        const double best = fastest.estimated_tt_acc;
        for (std::size_t p = 0; p < proxies.size(); ++p) {
          const auto ours = select_configuration(profile, proxies[p].r, cap);
          const double realized = realized_tt_acc(ours, profile, targets[t].counts);
          m.percent[p][t] = nearly_equal(realized, best) ? 0.0 : (realized - best) / best * 100.0;
        }
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string sensitivity_csv(std::span<const SensitivityMatrix> matrices) {
  std::string out = "p_max_w,proxy,target,time_increase_pct\n";
  for (const auto& m : matrices) {
    for (std::size_t p = 0; p < m.proxy_ids.size(); ++p) {
      for (std::size_t t = 0; t < m.target_ids.size(); ++t) {
        const auto& v = m.percent[p][t];
        out += m.cap.to_string() + ',' + m.proxy_ids[p] + ',' + m.target_ids[t] + ',' +
               (v ? format_fixed(*v, 1) : std::string("infeasible")) + '\n';
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<SweepRow> build_sweep(const DeviceProfile& profile, const RelationVector& r,
                                  double from, double to, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("--step must be positive");
  if (!(from > 0.0) || !std::isfinite(from)) throw UsageError("--from must be positive");
  if (!(to >= from) || !std::isfinite(to)) throw UsageError("--to must be at least --from");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<SweepRow> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double p = from + static_cast<double>(k) * step;
    SweepRow row{p, std::nullopt};
    try {
      row.result = select_configuration_fast(profile, r, PowerCap::watts(p));
    } catch (const InfeasibleError&) {
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "p_max_w,feasible,b,f_mhz,tt_acc,energy_j\n";
  for (const auto& row : rows) {
    out += format_double(row.p_max_w) + ',';
    if (row.result) {
      out += "1," + std::to_string(row.result->batch_size) + ',' +
             format_double(row.result->frequency_mhz) + ',' +
             format_double(row.result->estimated_tt_acc) + ',' +
             opt_num(row.result->estimated_energy) + '\n';
    } else {
      out += "0,,,,\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const IngestOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.power_logs.empty() || opts.timing_logs.empty()) {
      throw UsageError("ingest needs at least one --power and one --timing log");
    }
    if (opts.power_logs.size() != opts.timing_logs.size()) {
      throw UsageError("--power and --timing must be given in pairs");
    }
    if (opts.samples_per_unit <= 0) throw UsageError("--s must be a positive sample count");
    if (opts.minibatches && *opts.minibatches <= 0) throw UsageError("--m must be positive");
    if (opts.warmup && *opts.warmup < 0) throw UsageError("--warmup must be non-negative");

    std::vector<MeasuredPoint> points;
    for (std::size_t k = 0; k < opts.power_logs.size(); ++k) {
      const auto& ppath = opts.power_logs[k];
      const auto& tpath = opts.timing_logs[k];
      const auto power = parse_power_log(std::string_view(read_text_file(ppath)), ppath);
      if (power.samples.empty()) throw DataError(ppath + ": no power samples");
      auto timing = parse_timing_log(std::string_view(read_text_file(tpath)), tpath);
      if (opts.warmup) timing.warmup_discarded = static_cast<std::size_t>(*opts.warmup);
      if (timing.retained().empty()) throw DataError(tpath + ": all samples discarded");
      if (opts.minibatches) {
        const auto keep = timing.warmup_discarded + static_cast<std::size_t>(*opts.minibatches);
        if (timing.minibatch_durations.size() < keep) {
          throw DataError(tpath + ": fewer than " + std::to_string(*opts.minibatches) +
                          " retained mini-batches");
        }
        timing.minibatch_durations.resize(keep);
      }
      points.push_back({timing.batch_size, timing.frequency_mhz,
                        aggregate_point(power, timing, opts.samples_per_unit, opts.peak)});
    }
    const auto profile = assemble_profile(opts.model_id, opts.samples_per_unit, points);
    const auto text = save_profile(profile);
    if (opts.out.empty()) {
      out << text;
    } else {
      write_text_file(opts.out, text);
      out << "wrote " << opts.out << " (" << profile.num_batch_sizes() << " batch sizes x "
          << profile.num_frequencies() << " frequencies)\n";
    }
    return int{kExitOk};
  });
}

int cmd_select(const SelectOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.profile.empty()) throw UsageError("--profile is required");
    if (opts.relation.empty() == opts.counts.empty()) {
      throw UsageError("exactly one of --relation or --counts is required");
    }
    PowerCap cap = PowerCap::unlimited();
    try {
      cap = PowerCap::parse(opts.p_max);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    const auto profile = load_profile(std::string_view(read_text_file(opts.profile)));

    SelectionResult result;
    if (!opts.relation.empty()) {
      const auto r = load_relation_vector(read_text_file(opts.relation), opts.relation,
                                          dataset_id(opts.relation));
      result = opts.fast ? select_configuration_fast(profile, r, cap)
                         : select_configuration(profile, r, cap);
    } else {
      const auto counts = load_counts(read_text_file(opts.counts), opts.counts);
      result = opts.fast ? select_configuration_fast(profile, counts, cap)
                         : select_configuration(profile, counts, cap);
    }

    // Reference: the largest batch size at its highest admissible frequency.
    std::optional<FeasiblePair> ref;
    const auto feasible = feasible_combinations(profile, cap);
    if (!feasible.empty() && feasible.pairs.back().batch_index + 1 == profile.num_batch_sizes()) {
      ref = feasible.pairs.back();
    }
    std::optional<double> reduction;
    const double t_sel = profile.time_table()(result.batch_index, result.freq_index);
    if (ref) {
      const double t_ref = profile.time_table()(ref->batch_index, ref->freq_index);
      reduction = (t_ref - t_sel) / t_ref * 100.0;
    }

    out << "selected b=" << result.batch_size << " f=" << format_double(result.frequency_mhz)
        << " MHz under p_max=" << cap.to_string() << (cap.is_unlimited() ? "" : " W") << '\n';
    out << "  t_s            " << format_double(t_sel) << " s\n";
    out << "  tt_acc         " << format_double(result.estimated_tt_acc) << " s"
        << (result.absolute_time ? "" : " (relative: divided by the largest N_s_acc)") << '\n';
    if (result.estimated_energy) {
      out << "  energy         " << format_double(*result.estimated_energy) << " J"
          << (result.absolute_time ? "" : " (relative)") << '\n';
    }
    out << "  feasible pairs " << result.feasible_count << '\n';
    if (ref) {
      out << "  reference b=" << profile.batch_sizes()[ref->batch_index]
          << " f=" << format_double(profile.frequencies()[ref->freq_index])
          << " MHz, t_s reduction " << format_fixed(*reduction, 1) << "%\n";
    }

    if (!opts.csv.empty()) {
      std::string csv =
          "policy,p_max_w,b,f_mhz,t_s,tt_acc,absolute,energy_j,feasible_count,ref_b,ref_f_mhz,"
          "t_s_reduction_pct\n";
      csv += std::string(to_string(result.policy)) + ',' + cap.to_string() + ',' +
             std::to_string(result.batch_size) + ',' + format_double(result.frequency_mhz) + ',' +
             format_double(t_sel) + ',' + format_double(result.estimated_tt_acc) + ',' +
             (result.absolute_time ? "1" : "0") + ',' + opt_num(result.estimated_energy) + ',' +
             std::to_string(result.feasible_count) + ',';
      if (ref) {
        csv += std::to_string(profile.batch_sizes()[ref->batch_index]) + ',' +
               format_double(profile.frequencies()[ref->freq_index]) + ',' +
               format_double(*reduction);
      } else {
        csv += ",,";
      }
      csv += '\n';
      write_text_file(opts.csv, csv);
    }
    return int{kExitOk};
  });
}

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.profile.empty() || opts.relation.empty() || opts.safe_freqs.empty()) {
      throw UsageError("compare needs --profile, --relation and --safe-freqs");
    }
    const auto caps = parse_caps(opts.caps);
    const auto profile = load_profile(std::string_view(read_text_file(opts.profile)));
    const auto r = load_relation_vector(read_text_file(opts.relation), opts.relation,
                                        dataset_id(opts.relation));
    std::optional<SampleCounts> counts;
    if (!opts.counts.empty()) counts = load_counts(read_text_file(opts.counts), opts.counts);
    const auto safe = load_safe_frequencies(std::string_view(read_text_file(opts.safe_freqs)),
                                            opts.safe_freqs);

    const auto report = build_comparison(profile, r, counts ? &*counts : nullptr, caps, safe);

    out << std::left << std::setw(10) << "p_max" << std::setw(11) << "policy" << std::setw(6)
        << "b" << std::setw(8) << "f_mhz" << std::setw(14) << "est_tt_acc" << std::setw(14)
        << "real_tt_acc" << std::setw(14) << "energy_j" << "speedup\n";
    for (const auto& row : report.rows) {
      out << std::setw(10) << row.cap.to_string() << std::setw(11) << to_string(row.policy);
      if (row.result) {
        out << std::setw(6) << row.result->batch_size << std::setw(8)
            << format_double(row.result->frequency_mhz) << std::setw(14)
            << format_fixed(row.result->estimated_tt_acc, 2);
      } else {
        out << std::setw(28) << "infeasible";
      }
      out << std::setw(14) << (row.realized_tt_acc ? format_fixed(*row.realized_tt_acc, 2) : "-")
          << std::setw(14) << (row.energy ? format_fixed(*row.energy, 1) : "-")
          << (row.speedup_vs_baseline1 ? format_fixed(*row.speedup_vs_baseline1, 3) + "x" : "-")
          << '\n';
    }
    if (!opts.csv.empty()) write_text_file(opts.csv, comparison_csv(report));
    return int{kExitOk};
  });
}

int cmd_sensitivity(const SensitivityOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.profile.empty() || opts.relations.empty() || opts.counts.empty()) {
      throw UsageError("sensitivity needs --profile, one or more --relation and --counts files");
    }
    const auto caps = parse_caps(opts.caps);
    const auto profile = load_profile(std::string_view(read_text_file(opts.profile)));
    std::vector<NamedRelation> proxies;
    for (const auto& path : opts.relations) {
      proxies.push_back({dataset_id(path),
                         load_relation_vector(read_text_file(path), path, dataset_id(path))});
    }
    std::vector<NamedCounts> targets;
    for (const auto& path : opts.counts) {
      targets.push_back({dataset_id(path), load_counts(read_text_file(path), path)});
    }
    const auto matrices = build_sensitivity(profile, std::move(proxies), std::move(targets), caps);

    for (const auto& m : matrices) {
      out << "p_max=" << m.cap.to_string() << "  time increase vs fastest (%), rows=proxy\n";
      out << std::left << std::setw(16) << "";
      for (const auto& t : m.target_ids) out << std::setw(12) << t;
      out << '\n';
      for (std::size_t p = 0; p < m.proxy_ids.size(); ++p) {
        out << std::setw(16) << m.proxy_ids[p];
        for (const auto& v : m.percent[p]) out << std::setw(12) << (v ? format_fixed(*v, 1) : "n/a");
        out << '\n';
      }
    }
    if (!opts.csv.empty()) write_text_file(opts.csv, sensitivity_csv(matrices));
    return int{kExitOk};
  });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.profile.empty() || opts.relation.empty()) {
      throw UsageError("sweep needs --profile and --relation");
    }
    const auto profile = load_profile(std::string_view(read_text_file(opts.profile)));
    const auto r = load_relation_vector(read_text_file(opts.relation), opts.relation,
                                        dataset_id(opts.relation));
    const auto rows = build_sweep(profile, r, opts.from, opts.to, opts.step);
    out << std::left << std::setw(10) << "p_max_w" << std::setw(6) << "b" << std::setw(8)
        << "f_mhz" << std::setw(14) << "tt_acc" << "energy_j\n";
    for (const auto& row : rows) {
      out << std::setw(10) << format_double(row.p_max_w);
      if (row.result) {
        out << std::setw(6) << row.result->batch_size << std::setw(8)
            << format_double(row.result->frequency_mhz) << std::setw(14)
            << format_fixed(row.result->estimated_tt_acc, 3)
            << (row.result->estimated_energy ? format_fixed(*row.result->estimated_energy, 1) : "-")
            << '\n';
      } else {
        out << "infeasible\n";
      }
    }
    if (!opts.csv.empty()) write_text_file(opts.csv, sweep_csv(rows));
    return int{kExitOk};
  });
}

namespace {

SynthDeviceParams device_params_for(const std::string& path, std::optional<std::uint64_t> seed,
                                    std::span<const double> axis) {
  if (!path.empty()) {
    auto p = load_device_params(read_text_file(path));
    if (seed) p.rng_seed = *seed;
    return p;
  }
  std::mt19937_64 rng(seed.value_or(0));
  return sample_device_params(rng, axis);
}

}  // namespace

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.samples_per_unit <= 0) throw UsageError("--s must be positive");
    const auto freqs = opts.frequencies.empty() ? nano_frequencies() : opts.frequencies;
    const auto params = device_params_for(opts.params, opts.seed, freqs);
    const auto profile =
        generate_profile(opts.batch_sizes, freqs, params, opts.samples_per_unit, opts.model_id);
    const auto text = save_profile(profile);
    if (opts.out.empty()) {
      out << text;
    } else {
      write_text_file(opts.out, text);
      out << "wrote " << opts.out << '\n';
    }
    return int{kExitOk};
  });
}

int cmd_plan(const PlanOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.minibatches <= 0) throw UsageError("--m must be positive");
    if (opts.warmup < 0) throw UsageError("--warmup must be non-negative");
    PowerCap cap = PowerCap::unlimited();
    try {
      cap = PowerCap::parse(opts.p_max);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    auto bs = opts.batch_sizes;
    std::sort(bs.begin(), bs.end());
    auto freqs = opts.frequencies.empty() ? nano_frequencies() : opts.frequencies;
    std::sort(freqs.begin(), freqs.end());
    const auto params = device_params_for(opts.params, opts.seed, freqs);
    const auto schedule = profiling_schedule(
        bs, freqs, cap, [&](int b, double f) { return synth_power(b, f, params); });

    out << "# " << schedule.probes.size() << " probes of " << opts.warmup << " warm-up + "
        << opts.minibatches << " mini-batches each (grid is " << bs.size() * freqs.size()
        << " points)\n";
    out << "b,f_mhz,power_w,feasible\n";
    for (const auto& p : schedule.probes) {
      out << p.batch_size << ',' << format_double(p.frequency_mhz) << ','
          << format_fixed(p.power_w, 3) << ',' << (p.feasible ? 1 : 0) << '\n';
    }
    return int{kExitOk};
  });
}

}  // namespace edgetune
