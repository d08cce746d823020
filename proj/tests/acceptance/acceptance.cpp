// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include "edgetune/baselines_energy.hpp"
#include "edgetune/commands.hpp"
#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"
#include "edgetune/profile_ingest.hpp"
#include "edgetune/synth_device.hpp"
#include "oracles.hpp"

using namespace edgetune;
namespace et = edgetune::testing;

namespace {

constexpr std::size_t kOracleProfiles = 2000;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr double kCrossoverReduction = 31.9;
constexpr double kCrossoverTolerance = 0.1;  // percentage points
constexpr std::size_t kDominanceProfiles = 1000;
constexpr std::size_t kMonotoneProfiles = 500;
constexpr std::size_t kRoundTripProfiles = 100;
constexpr std::size_t kTraceCases = 200;
constexpr double kTraceRelTolerance = 1e-9;
constexpr std::size_t kScheduleOracles = 200;
constexpr std::size_t kSensitivityProfiles = 200;
constexpr double kSensitivityRelTolerance = 1e-9;
constexpr double kSensitivityAbsTolerance = 1e-7;  // percent, for near-zero cells

struct Outcome {
  bool pass;
  std::string detail;
};

bool at_most(double a, double b) { return a <= b || nearly_equal(a, b); }

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1001);
  std::size_t mismatches = 0, infeasible = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t n = 0; n < kOracleProfiles; ++n) {
    const auto p = et::random_profile(rng, n, 8, 32);
    const auto r = relation_vector(et::random_counts(rng, p));
    const auto cap = et::random_cap(rng, p);
    const auto brute = et::brute_select(p, et::as_weights(r), cap.value());
    if (!brute) {
      ++infeasible;
      bool both_throw = true;
      try {
        select_configuration(p, r, cap);
        both_throw = false;
      } catch (const InfeasibleError&) {
      }
      try {
        select_configuration_fast(p, r, cap);
        both_throw = false;
      } catch (const InfeasibleError&) {
      }
      if (!both_throw) ++mismatches;
      continue;
    }
    const auto a = select_configuration(p, r, cap);
    const auto b = select_configuration_fast(p, r, cap);
    const bool exact_min = a.estimated_tt_acc == brute->value ||
                           nearly_equal(a.estimated_tt_acc, brute->value);
    const bool same_pair = a.batch_index == brute->cell.i && a.freq_index == brute->cell.j;
    const bool fast_agrees = b.batch_index == a.batch_index && b.freq_index == a.freq_index &&
                             b.estimated_tt_acc == a.estimated_tt_acc;
    if (!exact_min || !same_pair || !fast_agrees) ++mismatches;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << kOracleProfiles << " profiles (" << infeasible << " infeasible caps), " << mismatches
    << " mismatches, " << format_fixed(secs, 2) << " s (budget " << kOracleBudgetSeconds << " s)";
  return {mismatches == 0 && secs < kOracleBudgetSeconds, d.str()};
}

Outcome crossover_reduction() {
  SelectOptions o;
  o.profile = et::fixture("crossover_profile.csv");
  o.relation = et::fixture("crossover_uniform_r.csv");
  o.p_max = "5.0";
  std::ostringstream out, err;
  const int rc = cmd_select(o, out, err);
  const std::string text = out.str();
  std::smatch m;
  const std::regex re(R"(reference b=128 f=307 MHz, t_s reduction ([0-9.]+)%)");
  const bool chose = text.find("selected b=64 f=460 MHz under p_max=5 W") != std::string::npos;
  if (rc != kExitOk || !chose || !std::regex_search(text, m, re)) {
    return {false, "unexpected select output: " + text + err.str()};
  }
  // The printed value is rounded; recompute from the tables too.
  const auto p = et::fixture_profile("crossover_profile.csv");
  const double t128 = p.time_table()(*p.batch_index(128), *p.frequency_index(307));
  const double t64 = p.time_table()(*p.batch_index(64), *p.frequency_index(460));
  const double exact = (t128 - t64) / t128 * 100.0;
  const double printed = std::stod(m[1].str());
  const bool ok = std::abs(printed - kCrossoverReduction) <= kCrossoverTolerance &&
                  std::abs(exact - kCrossoverReduction) <= kCrossoverTolerance;
  return {ok, "selected (64, 460 MHz), reduction " + m[1].str() + "% (exact " +
                  format_fixed(exact, 4) + "%), target " + format_fixed(kCrossoverReduction, 1) +
                  " +/- " + format_fixed(kCrossoverTolerance, 1) + " pp"};
}

Outcome batch_switch() {
  const auto p = et::fixture_profile("flip_profile.csv");
  const auto c = et::fixture_counts("flip_counts.csv");
  const std::vector<std::pair<double, int>> expected{{4.5, 8}, {5.0, 8}, {7.0, 32}};
  std::string detail;
  bool ok = true;
  for (const auto& [w, b] : expected) {
    const auto cap = PowerCap::watts(w);
    const auto a = select_configuration(p, c, cap);
    const auto f = select_configuration_fast(p, c, cap);
    const auto r = select_configuration(p, relation_vector(c), cap);
    ok = ok && a.batch_size == b && f.batch_size == b && r.batch_size == b;
    detail += format_double(w) + " W -> b=" + std::to_string(a.batch_size) + " f=" +
              format_double(a.frequency_mhz) + "; ";
  }
  return {ok, detail + "expected b=8, b=8, b=32"};
}

Outcome dominance() {
  std::mt19937_64 rng(4004);
  std::size_t checked_b1 = 0, checked_b2 = 0, violations = 0, fastest_checks = 0;
  for (std::size_t n = 0; n < kDominanceProfiles; ++n) {
    const auto p = et::random_profile(rng, n);
    const auto truth = et::random_counts(rng, p);
    const auto proxy = relation_vector(distort_counts(truth, 0.4, n));
    const auto cap = et::random_cap(rng, p);
    if (feasible_combinations(p, cap).empty()) continue;

    // Safe frequency: either the worst case for this profile, or an
    // arbitrary axis frequency, which may leave a baseline infeasible.
    double safe_f = p.frequencies()[static_cast<std::size_t>(
        unit_uniform(rng) * static_cast<double>(p.num_frequencies()))];
    if (n % 2 == 0) {
      const std::vector<DeviceProfile> ps{p};
      const std::vector<PowerCap> caps{cap};
      const auto computed = compute_safe_frequencies(ps, caps).frequency_for(cap);
      if (computed) safe_f = *computed;
    }
    const SafeFrequencyTable safe(std::map<double, double>{{cap.value(), safe_f}});

    const auto ours = select_configuration(p, proxy, cap);
    const auto b1 = baseline1_select(p, cap, safe, &proxy);
    const auto b2 = baseline2_select(p, proxy, cap, safe);
    if (cap.admits(p.power_table()(b1.batch_index, b1.freq_index))) {
      ++checked_b1;
      if (!at_most(ours.estimated_tt_acc, b1.estimated_tt_acc)) ++violations;
    }
    if (cap.admits(p.power_table()(b2.batch_index, b2.freq_index))) {
      ++checked_b2;
      if (!at_most(ours.estimated_tt_acc, b2.estimated_tt_acc)) ++violations;
    }
    const auto fastest = fastest_configuration(p, truth, cap);
    ++fastest_checks;
    if (!at_most(realized_tt_acc(fastest, p, truth), realized_tt_acc(ours, p, truth))) ++violations;
  }
  return {violations == 0 && checked_b1 > 0 && checked_b2 > 0,
          std::to_string(checked_b1) + " baseline1 and " + std::to_string(checked_b2) +
              " baseline2 feasible instances, " + std::to_string(fastest_checks) +
              " fastest checks, " + std::to_string(violations) + " violations"};
}

Outcome cap_monotonicity() {
  std::mt19937_64 rng(5005);
  std::size_t pairs = 0, violations = 0;
  for (std::size_t n = 0; n < kMonotoneProfiles; ++n) {
    const auto p = et::random_profile(rng, n);
    const auto r = relation_vector(et::random_counts(rng, p));
    std::vector<PowerCap> caps;
    for (int k = 0; k < 12; ++k) caps.push_back(et::random_cap(rng, p));
    for (double v : p.power_table().values()) caps.push_back(PowerCap::watts(v));
    std::sort(caps.begin(), caps.end(), [](const PowerCap& a, const PowerCap& b) { return a < b; });
    std::vector<std::optional<double>> tt;
    for (const auto& c : caps) {
      try {
        tt.push_back(select_configuration(p, r, c).estimated_tt_acc);
      } catch (const InfeasibleError&) {
        tt.push_back(std::nullopt);
      }
    }
    for (std::size_t i = 0; i < caps.size(); ++i) {
      for (std::size_t j = i + 1; j < caps.size(); ++j) {
        ++pairs;
        if (tt[i] && !tt[j]) {
          ++violations;
        } else if (tt[i] && tt[j] && *tt[j] > *tt[i]) {
          ++violations;
        }
      }
    }
  }
  return {violations == 0,
          std::to_string(pairs) + " ascending cap pairs, " + std::to_string(violations) + " violations"};
}

Outcome ingestion_round_trip() {
  std::mt19937_64 rng(6006);
  std::size_t bad_profiles = 0;
  for (std::size_t n = 0; n < kRoundTripProfiles; ++n) {
    const auto p = et::random_profile(rng, n);
    const auto q = load_profile(std::string_view(save_profile(p)));
    if (!(q == p)) ++bad_profiles;
  }

  std::size_t bad_traces = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n < kTraceCases; ++n) {
    const int b = 1 << et::uniform_int(rng, 0, 8);
    const std::int64_t s = 1024 * et::uniform_int(rng, 1, 8);
    const double t_true = et::uniform(rng, 1.0, 500.0);
    const double peak_true_w = et::uniform(rng, 1.0, 15.0);
    const double d = t_true * b / static_cast<double>(s);

    std::string timing = "b=" + std::to_string(b) + ",f_mhz=460,warmup=1\n" + format_double(d * 3) + "\n";
    const int m = et::uniform_int(rng, 1, 6);
    for (int k = 0; k < m; ++k) {
      const double e = d * et::uniform(rng, 0.0, 0.2);
      timing += format_double(d + e) + "\n" + format_double(d - e) + "\n";
    }
    std::string power = "# timestamp_s,power_mw\n";
    const int samples = et::uniform_int(rng, 5, 60);
    const int at_peak = et::uniform_int(rng, 0, samples - 1);
    for (int k = 0; k < samples; ++k) {
      const double mw = k == at_peak ? peak_true_w * 1000.0
                                     : peak_true_w * 1000.0 * et::uniform(rng, 0.5, 0.99);
      power += format_double(k * 1.0) + "," + format_double(mw) + "\n";
    }
    const auto got = aggregate_point(parse_power_log(std::string_view(power)),
                                     parse_timing_log(std::string_view(timing)), s);
    const double et_rel = std::abs(got.t_s - t_true) / t_true;
    const double ep_rel = std::abs(got.peak_w - peak_true_w) / peak_true_w;
    worst = std::max({worst, et_rel, ep_rel});
    if (et_rel > kTraceRelTolerance || ep_rel > kTraceRelTolerance) ++bad_traces;
  }
  std::ostringstream dtl;
  dtl << kRoundTripProfiles << " profiles, " << bad_profiles << " not bit-exact; " << kTraceCases
      << " traces, " << bad_traces << " outside " << kTraceRelTolerance << " relative (worst "
      << worst << ")";
  return {bad_profiles == 0 && bad_traces == 0, dtl.str()};
}

Outcome schedule_completeness() {
  std::mt19937_64 rng(7007);
  std::size_t mismatches = 0, probes = 0, grid = 0;
  for (std::size_t n = 0; n < kScheduleOracles; ++n) {
    const auto p = et::random_profile(rng, n);
    const auto cap = et::random_cap(rng, p);
    const PowerOracle oracle = [&](int b, double f) {
      return p.power_table()(*p.batch_index(b), *p.frequency_index(f));
    };
    const auto s = profiling_schedule(p.batch_sizes(), p.frequencies(), cap, oracle);
    std::vector<std::pair<int, double>> full;
    for (const auto& pair : feasible_combinations(p, cap).pairs)
      full.emplace_back(p.batch_sizes()[pair.batch_index], p.frequencies()[pair.freq_index]);
    if (s.max_feasible() != full) ++mismatches;
    probes += s.probes.size();
    grid += p.num_batch_sizes() * p.num_frequencies();
  }
  return {mismatches == 0, std::to_string(kScheduleOracles) + " oracles, " +
                               std::to_string(mismatches) + " mismatches, " +
                               std::to_string(probes) + " probes vs " + std::to_string(grid) +
                               " grid points"};
}

Outcome sensitivity() {
  std::mt19937_64 rng(8008);
  std::size_t cells = 0, diag_bad = 0, negative = 0, oracle_bad = 0;
  for (std::size_t n = 0; n < kSensitivityProfiles; ++n) {
    const auto p = et::random_profile(rng, n);
    std::vector<NamedRelation> proxies;
    std::vector<NamedCounts> targets;
    const int k = et::uniform_int(rng, 1, 4);
    for (int d = 0; d < k; ++d) {
      const auto c = et::random_counts(rng, p);
      const std::string id = "ds" + std::to_string(d);
      proxies.push_back({id, relation_vector(c, id)});
      targets.push_back({id, c});
    }
    const std::vector<PowerCap> caps{et::random_cap(rng, p), et::random_cap(rng, p)};
    const auto mats = build_sensitivity(p, proxies, targets, caps);
    for (std::size_t ci = 0; ci < caps.size(); ++ci) {
      const auto& m = mats[ci];
      for (std::size_t pi = 0; pi < proxies.size(); ++pi) {
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
          ++cells;
          const auto& v = m.percent[pi][ti];
          const auto pick = et::brute_select(p, et::as_weights(proxies[pi].r), caps[ci].value());
          if (!pick) {
            if (v) ++oracle_bad;
            continue;
          }
          if (!v) {
            ++oracle_bad;
            continue;
          }
          if (*v < 0.0) ++negative;
          if (pi == ti && *v != 0.0) ++diag_bad;
          const auto best = et::brute_select(p, et::as_weights(targets[ti].counts), caps[ci].value());
          const auto& cnt = targets[ti].counts;
          const double realized = p.time_table()(pick->cell.i, pick->cell.j) *
                                  static_cast<double>(cnt.at(p.batch_sizes()[pick->cell.i]));
          const double expect = (realized - best->value) / best->value * 100.0;
          if (!(rel_close(*v, expect, kSensitivityRelTolerance) ||
                std::abs(*v - expect) <= kSensitivityAbsTolerance)) {
            ++oracle_bad;
          }
        }
      }
    }
  }
  return {diag_bad == 0 && negative == 0 && oracle_bad == 0,
          std::to_string(cells) + " cells, " + std::to_string(diag_bad) + " non-zero diagonal, " +
              std::to_string(negative) + " negative, " + std::to_string(oracle_bad) +
              " oracle mismatches"};
}

Outcome jetson_demo() {
  const std::vector<int> bs{4, 8, 16, 32, 64, 128};
  const auto fs = nano_frequencies();
  SynthDeviceParams params;
  params.noise_level = 0.05;
  params.rng_seed = 2023;
  const auto p = generate_profile(bs, fs, params, 4096, "jetson-like");
  const auto truth = synth_counts(bs, {});
  const auto proxy = relation_vector(distort_counts(truth, 0.2, 7), "proxy");

  std::vector<PowerCap> caps;
  for (double w = 2.0; w <= 8.0; w += 0.5) caps.push_back(PowerCap::watts(w));
  const std::vector<DeviceProfile> ps{p};
  const auto safe = compute_safe_frequencies(ps, caps);

  double min_speedup = INFINITY;
  std::size_t compared = 0;
  std::optional<std::string> witness;
  for (const auto& cap : caps) {
    if (!safe.frequency_for(cap) || feasible_combinations(p, cap).empty()) continue;
    const auto ours = select_configuration(p, proxy, cap);
    const auto b1 = baseline1_select(p, cap, safe);
    min_speedup = std::min(min_speedup, realized_tt_acc(b1, p, truth) / realized_tt_acc(ours, p, truth));
    ++compared;

    if (witness) continue;
    // Energy over every admissible cell, not only the per-row maxima.
    const auto fastest = fastest_configuration(p, truth, cap);
    const double e_fast = energy_estimate(fastest, p, static_cast<double>(truth.at(fastest.batch_size)));
    for (std::size_t i = 0; i < p.num_batch_sizes() && !witness; ++i) {
      for (std::size_t j = 0; j < p.num_frequencies(); ++j) {
        if (!cap.admits(p.power_table()(i, j))) break;
        SelectionResult cell;
        cell.batch_index = i;
        cell.freq_index = j;
        const double e = energy_estimate(cell, p, static_cast<double>(truth.at(bs[i])));
        if (e < e_fast && !nearly_equal(e, e_fast)) {
          witness = "at " + cap.to_string() + " W fastest (b=" + std::to_string(fastest.batch_size) +
                    ", " + format_double(fastest.frequency_mhz) + " MHz) uses " +
                    format_fixed(e_fast, 1) + " J, (b=" + std::to_string(bs[i]) + ", " +
                    format_double(fs[j]) + " MHz) uses " + format_fixed(e, 1) + " J";
          break;
        }
      }
    }
  }
  const bool ok = compared > 0 && min_speedup >= 1.0 && witness.has_value();
  return {ok, std::to_string(compared) + " caps, min speedup over baseline1 " +
                  format_fixed(min_speedup, 3) + "x; energy witness: " +
                  witness.value_or("none found")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"crossover t_s reduction", crossover_reduction},
      {"batch switch across caps", batch_switch},
      {"dominance", dominance},
      {"cap monotonicity", cap_monotonicity},
      {"ingestion round trip", ingestion_round_trip},
      {"schedule completeness", schedule_completeness},
      {"sensitivity matrix", sensitivity},
      {"jetson-like demo", jetson_demo},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << criteria[k].first << ": "
              << o.detail << '\n';
  }
  std::cout << "\nnote: absolute training times, speedups and energy figures measured on real\n"
               "Jetson hardware are not reproducible here; they depend on unpublished device\n"
               "lookup tables and full training runs. Criterion 9 substitutes a synthetic\n"
               "Jetson-like profile.\n";
  return failed == 0 ? 0 : 1;
}
