#pragma once

// Report builders and the command implementations behind the `edgetune`
// executable. Commands write human-readable text to `out`, optional CSV to
// a file, and return a process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgetune/baselines_energy.hpp"
#include "edgetune/core_model.hpp"
#include "edgetune/profile_ingest.hpp"

namespace edgetune {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitInfeasible = 4 };

// ---------------------------------------------------------------------------
// Comparison report

struct ComparisonRow {
  PowerCap cap = PowerCap::unlimited();
  PolicyTag policy = PolicyTag::ours;
  /// Empty when the policy found no admissible configuration.
  std::optional<SelectionResult> result;
  /// Time-to-accuracy under ground-truth counts, when supplied.
  std::optional<double> realized_tt_acc;
  /// Joules: realized when counts are supplied, otherwise the estimate.
  std::optional<double> energy;
  /// Baseline 1 time over this row's time (realized when available).
  std::optional<double> speedup_vs_baseline1;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

/// Rows per cap in order ours, baseline1, baseline2, fastest (fastest only
/// with true counts).
ComparisonReport build_comparison(const DeviceProfile& profile, const RelationVector& r,
                                  const SampleCounts* true_counts, std::span<const PowerCap> caps,
                                  const SafeFrequencyTable& safe);

std::string comparison_csv(const ComparisonReport& report);

// ---------------------------------------------------------------------------
// Proxy sensitivity

struct NamedRelation {
  std::string id;
  RelationVector r;
};

struct NamedCounts {
  std::string id;
  SampleCounts counts;
};

/// Percentage time increase of the proxy-driven choice over the fastest
/// configuration, per (proxy, target). Entries within the tie tolerance of
/// the fastest time are exactly 0; empty entries mean the cap is infeasible.
struct SensitivityMatrix {
  PowerCap cap = PowerCap::unlimited();
  std::vector<std::string> proxy_ids;
  std::vector<std::string> target_ids;
  std::vector<std::vector<std::optional<double>>> percent;
};

/// Proxies and targets are sorted by id for deterministic output.
std::vector<SensitivityMatrix> build_sensitivity(const DeviceProfile& profile,
                                                 std::vector<NamedRelation> proxies,
                                                 std::vector<NamedCounts> targets,
                                                 std::span<const PowerCap> caps);

/// One decimal place per entry.
std::string sensitivity_csv(std::span<const SensitivityMatrix> matrices);

// ---------------------------------------------------------------------------
// Cap sweep

struct SweepRow {
  double p_max_w;
  std::optional<SelectionResult> result;
};

/// Caps from, from + step, ... up to `to` (inclusive within 1e-9 steps).
std::vector<SweepRow> build_sweep(const DeviceProfile& profile, const RelationVector& r,
                                  double from, double to, double step);

std::string sweep_csv(std::span<const SweepRow> rows);

// ---------------------------------------------------------------------------
// Commands

struct IngestOptions {
  std::vector<std::string> power_logs;
  std::vector<std::string> timing_logs;
  std::int64_t samples_per_unit = 0;
  std::string model_id = "model";
  std::optional<int> minibatches;  // keep only the first m retained durations
  std::optional<int> warmup;       // overrides the timing header
  PeakMode peak = PeakMode::max;
  std::string out;                 // empty: standard output
};

struct SelectOptions {
  std::string profile;
  std::string relation;
  std::string counts;
  std::string p_max = "unlimited";
  bool fast = false;
  std::string csv;
};

struct CompareOptions {
  std::string profile;
  std::string relation;
  std::string counts;
  std::vector<std::string> caps;
  std::string safe_freqs;
  std::string csv;
};

struct SensitivityOptions {
  std::string profile;
  std::vector<std::string> relations;
  std::vector<std::string> counts;
  std::vector<std::string> caps;
  std::string csv;
};

struct SweepOptions {
  std::string profile;
  std::string relation;
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::string csv;
};

struct SynthOptions {
  std::string params;
  std::optional<std::uint64_t> seed;
  std::vector<int> batch_sizes{4, 8, 16, 32, 64, 128};
  std::vector<double> frequencies;  // empty: Jetson Nano steps
  std::int64_t samples_per_unit = 4096;
  std::string model_id = "synthetic";
  std::string out;
};

struct PlanOptions {
  std::string params;
  std::optional<std::uint64_t> seed;
  std::vector<int> batch_sizes{4, 8, 16, 32, 64, 128};
  std::vector<double> frequencies;
  std::string p_max = "unlimited";
  int minibatches = kDefaultMinibatches;
  int warmup = kDefaultWarmup;
};

int cmd_ingest(const IngestOptions& opts, std::ostream& out, std::ostream& err);
int cmd_select(const SelectOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sensitivity(const SensitivityOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);
int cmd_plan(const PlanOptions& opts, std::ostream& out, std::ostream& err);

/// File stem used as a dataset id ("data/cifar10.csv" -> "cifar10").
std::string dataset_id(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace edgetune
