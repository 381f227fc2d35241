#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kotta/kotta.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

kotta::RunOptions options(const std::vector<std::uint64_t>& seed, const std::vector<double>& max_days,
                          const std::string& out_dir) {
  kotta::RunOptions o;
  if (!seed.empty()) o.seed = seed.front();
  if (!max_days.empty()) o.max_virtual_days = max_days.front();
  o.out_dir = out_dir;
  return o;
}

std::vector<kotta::Location> parse_layout(const std::string& layout) {
  // region:az,az;region:az,...
  std::vector<kotta::Location> zones;
  std::size_t start = 0;
  while (start <= layout.size()) {
    auto end = layout.find(';', start);
    std::string group = layout.substr(start, end == std::string::npos ? std::string::npos : end - start);
    auto colon = group.find(':');
    if (colon == std::string::npos) throw kotta::ConfigError("zone layout groups look like region:az,az");
    std::string region = group.substr(0, colon);
    std::size_t s = colon + 1;
    while (s <= group.size()) {
      auto comma = group.find(',', s);
      std::string az = group.substr(s, comma == std::string::npos ? std::string::npos : comma - s);
      if (az.empty()) throw kotta::ConfigError("empty AZ in zone layout");
      zones.push_back({region, az});
      if (comma == std::string::npos) break;
      s = comma + 1;
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return zones;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware cloud research platform simulator"};
  app.require_subcommand(1);

  std::vector<std::uint64_t> seed;
  std::vector<double> max_days;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one scenario and write its reports");
  std::string scenario_path;
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed")->expected(1);
  run->add_option("--out-dir", out_dir, "Directory for CSV and summary output");
  run->add_option("--max-virtual-days", max_days, "Abort when virtual time exceeds this many days")->expected(1);

  auto* compare = app.add_subcommand("compare", "Run several elastic-scaling scenarios and tabulate them");
  std::vector<std::string> compare_paths;
  compare->add_option("scenarios", compare_paths, "Scenario files; the first is the baseline")->required();
  compare->add_option("--seed", seed, "Override every scenario's seed")->expected(1);
  compare->add_option("--out-dir", out_dir, "Directory for comparison.csv");
  compare->add_option("--max-virtual-days", max_days, "Abort when virtual time exceeds this many days")->expected(1);

  auto* gen = app.add_subcommand("gen-traces", "Write synthetic spot price traces as CSV");
  std::string trace_out;
  std::uint64_t trace_seed = 1;
  kotta::TraceGenParams tp;
  std::string layout;
  double days = 30;
  double step_s = 3600;
  gen->add_option("--out", trace_out, "Output CSV path")->required();
  gen->add_option("--seed", trace_seed, "Generator seed");
  gen->add_option("--instance-type", tp.instance_type, "Instance type label");
  gen->add_option("--on-demand", tp.on_demand_usd_per_hour, "On-demand $/hour the spot prices are relative to");
  gen->add_option("--days", days, "Trace length in days");
  gen->add_option("--step-s", step_s, "Seconds between trace points");
  gen->add_option("--zones", layout, "Zone layout: region:az,az;region:az (default: 10 AZs in 4 regions)");
  gen->add_option("--flat-fraction", tp.flat_fraction, "Emit flat traces at this fraction of on-demand");
  gen->add_option("--spike-probability", tp.spike_probability, "Per-step probability of a price spike");

  auto* validate = app.add_subcommand("validate", "Parse a scenario and its inputs without running it");
  std::string validate_path;
  validate->add_option("scenario", validate_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      auto sc = kotta::load_scenario(scenario_path);
      auto rep = kotta::run_scenario(sc, options(seed, max_days, out_dir));
      std::cout << rep.summary;
    } else if (*compare) {
      std::vector<kotta::ScenarioReport> reports;
      auto opts = options(seed, max_days, "");
      for (const auto& p : compare_paths) reports.push_back(kotta::run_scenario(kotta::load_scenario(p), opts));
      auto cmp = kotta::compare_reports(reports);
      if (cmp.seeds_mismatched) std::cerr << "warning: scenarios use different workload seeds\n";
      std::cout << cmp.table();
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        kotta::write_text_file((std::filesystem::path(out_dir) / "comparison.csv").string(), kotta::to_csv(cmp.csv()));
      }
    } else if (*gen) {
      tp.zones = layout.empty() ? kotta::default_trace_zones() : parse_layout(layout);
      tp.horizon = static_cast<kotta::SimTime>(days * kotta::kDay);
      tp.step = static_cast<kotta::SimTime>(step_s);
      auto traces = kotta::generate_spot_traces(tp, trace_seed);
      kotta::write_text_file(trace_out, kotta::to_csv(kotta::spot_traces_to_csv(traces)));
      std::cout << "wrote " << traces.size() << " traces to " << trace_out << "\n";
    } else if (*validate) {
      auto sc = kotta::load_scenario(validate_path);
      kotta::validate_scenario(sc);
      std::cout << validate_path << ": ok (" << kotta::to_string(sc.kind) << ")\n";
    }
  } catch (const kotta::SimulationGuard& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const kotta::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
