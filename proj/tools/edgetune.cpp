// edgetune: pick a (batch size, GPU frequency) operating point for on-device
// training under a power cap, and compare it against fixed-frequency policies.

#include <CLI11.hpp>

#include <iostream>

#include "edgetune/commands.hpp"

int main(int argc, char** argv) {
  using namespace edgetune;

  CLI::App app{"Power-capped batch size / GPU frequency planner"};
  app.require_subcommand(1);

  IngestOptions ingest;
  std::string peak_mode = "max";
  auto* c_ingest = app.add_subcommand("ingest", "Aggregate power/timing logs into a profile");
  c_ingest->add_option("--power", ingest.power_logs, "Power log (timestamp_s,power_mw); repeatable")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--timing", ingest.timing_logs, "Timing log, paired with --power by order")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--s", ingest.samples_per_unit, "Samples per unit of T_s")->required();
  c_ingest->add_option("--model-id", ingest.model_id, "Model identifier");
  c_ingest->add_option("--m", ingest.minibatches, "Keep the first m retained mini-batches");
  c_ingest->add_option("--warmup", ingest.warmup, "Override the warm-up count of every timing log");
  c_ingest->add_option("--peak", peak_mode, "Peak extraction: max or p99")
      ->check(CLI::IsMember({"max", "p99"}));
  c_ingest->add_option("--out", ingest.out, "Output profile (default: stdout)");

  SelectOptions select;
  auto* c_select = app.add_subcommand("select", "Select the operating point under a power cap");
  c_select->add_option("--profile", select.profile)->required();
  c_select->add_option("--relation", select.relation, "Relation vector (b,r) or counts (b,n_s_acc)");
  c_select->add_option("--counts", select.counts, "Sample counts; reports absolute TT_acc");
  c_select->add_option("--p-max", select.p_max, "Watts or 'unlimited'");
  c_select->add_flag("--fast", select.fast, "Use the binary-search selector");
  c_select->add_option("--csv", select.csv);

  CompareOptions compare;
  auto* c_compare = app.add_subcommand("compare", "Compare against baselines across caps");
  c_compare->add_option("--profile", compare.profile)->required();
  c_compare->add_option("--relation", compare.relation)->required();
  c_compare->add_option("--counts", compare.counts, "Ground-truth counts for realized times");
  c_compare->add_option("--p-max", compare.caps, "Caps, comma separated or repeated")
      ->delimiter(',')
      ->required();
  c_compare->add_option("--safe-freqs", compare.safe_freqs, "CSV p_max_w,f_mhz")->required();
  c_compare->add_option("--csv", compare.csv);

  SensitivityOptions sens;
  auto* c_sens = app.add_subcommand("sensitivity", "Proxy x target time-increase matrices");
  c_sens->add_option("--profile", sens.profile)->required();
  c_sens->add_option("--relation", sens.relations, "Proxy relation files")->required();
  c_sens->add_option("--counts", sens.counts, "Target ground-truth counts files")->required();
  c_sens->add_option("--p-max", sens.caps)->delimiter(',')->required();
  c_sens->add_option("--csv", sens.csv);

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Selection across a range of caps");
  c_sweep->add_option("--profile", sweep.profile)->required();
  c_sweep->add_option("--relation", sweep.relation)->required();
  c_sweep->add_option("--from", sweep.from)->required();
  c_sweep->add_option("--to", sweep.to)->required();
  c_sweep->add_option("--step", sweep.step)->required();
  c_sweep->add_option("--csv", sweep.csv);

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic device profile");
  c_synth->add_option("--params", synth.params, "key=value parameter file");
  c_synth->add_option("--seed", synth.seed);
  c_synth->add_option("--batch-sizes", synth.batch_sizes)->delimiter(',');
  c_synth->add_option("--freqs", synth.frequencies)->delimiter(',');
  c_synth->add_option("--s", synth.samples_per_unit);
  c_synth->add_option("--model-id", synth.model_id);
  c_synth->add_option("--out", synth.out);

  PlanOptions plan;
  auto* c_plan = app.add_subcommand("plan", "Pruned profiling order against a synthetic device");
  c_plan->add_option("--params", plan.params);
  c_plan->add_option("--seed", plan.seed);
  c_plan->add_option("--batch-sizes", plan.batch_sizes)->delimiter(',');
  c_plan->add_option("--freqs", plan.frequencies)->delimiter(',');
  c_plan->add_option("--p-max", plan.p_max);
  c_plan->add_option("--m", plan.minibatches);
  c_plan->add_option("--warmup", plan.warmup);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*c_ingest) {
    ingest.peak = peak_mode == "p99" ? PeakMode::percentile99 : PeakMode::max;
    return cmd_ingest(ingest, std::cout, std::cerr);
  }
  if (*c_select) return cmd_select(select, std::cout, std::cerr);
  if (*c_compare) return cmd_compare(compare, std::cout, std::cerr);
  if (*c_sens) return cmd_sensitivity(sens, std::cout, std::cerr);
  if (*c_sweep) return cmd_sweep(sweep, std::cout, std::cerr);
  if (*c_synth) return cmd_synth(synth, std::cout, std::cerr);
  if (*c_plan) return cmd_plan(plan, std::cout, std::cerr);
  return kExitUsage;
}
