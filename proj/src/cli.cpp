#include "gdev/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>

#include "gdev/affinity.hpp"
#include "gdev/errors.hpp"
#include "gdev/manifest.hpp"
#include "gdev/report.hpp"
#include "gdev/stats.hpp"
#include "gdev/sweep.hpp"

namespace gdev {

namespace fs = std::filesystem;

namespace {

struct Flags {
  double epsilon = analysis::kDefaultSaturationEpsilon;
  double tau = roofline::kDefaultRidgeBand;
  bool continue_on_error = false;
  std::string cores;
  std::string out;
  bool quiet = false;
};

fs::path resolve_output(const Flags& flags, const RunManifest& manifest) {
  if (!flags.out.empty()) return flags.out;
  if (!manifest.output_dir.empty()) return manifest.output_dir;
  if (const char* env = std::getenv("GDEV_OUT"); env != nullptr && *env != '\0') return env;
  return "results";
}

int cmd_plan(const std::string& path, const Flags& flags, std::ostream& out) {
  const auto manifest = load_manifest(path);
  std::optional<std::vector<int>> cores;
  if (!flags.cores.empty()) cores = AffinityMask::parse(flags.cores).core_ids;
  else if (manifest.affinity) cores = manifest.affinity->core_ids;
  const auto plan = plan_sweep(manifest.matrix, cores);
  const auto& m = plan.matrix;

  out << plan.unique_configurations() << " unique configurations, " << plan.configs.size()
      << " executions\n";
  out << "models=" << m.models.size() << " batches=" << m.batch_sizes.size()
      << " threads=" << m.thread_counts.size() << " repetitions=" << m.repetitions
      << " sweeps=" << m.sweep_count << " warmup=" << m.warmup_iterations
      << " measure=" << m.measure_iterations << "\n";
  if (cores) out << "affinity=" << AffinityMask{*cores}.to_string() << "\n";
  if (flags.quiet) return 0;
  out << "index,sweep,model,threads,batch,repetition\n";
  for (std::size_t i = 0; i < plan.configs.size(); ++i) {
    const auto& c = plan.configs[i];
    out << i << ',' << c.sweep_index << ',' << c.model_id << ',' << c.threads << ','
        << c.batch_size << ',' << c.repetition_index << "\n";
  }
  return 0;
}

int cmd_run(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err) {
  auto manifest = load_manifest(path);
  const fs::path dir = resolve_output(flags, manifest);
  manifest.output_dir = dir.string();
  manifest.environment = capture_environment();

  std::optional<AffinityMask> mask = manifest.affinity;
  if (!flags.cores.empty()) mask = AffinityMask::parse(flags.cores);
  std::optional<std::vector<int>> core_list;
  if (mask) {
    try {
      manifest.environment.affinity = set_affinity(*mask).to_string();
      manifest.affinity = mask;
      core_list = mask->core_ids;
    } catch (const UnsupportedPlatform& e) {
      manifest.environment.affinity = std::string("unpinned: ") + e.what();
      err << "gdev: warning: " << e.what() << "; running unpinned\n";
    }
  } else {
    manifest.environment.affinity = "unpinned";
  }

  const auto plan = plan_sweep(manifest.matrix, core_list);
  ExternalOptions ext;
  ext.iteration_timeout = std::chrono::duration<double>(manifest.iteration_timeout_s);
  SpecRuntime runtime(manifest.workloads, ext);

  auto options = ExecutionOptions::from(manifest.matrix);
  options.iteration_timeout = std::chrono::duration<double>(manifest.iteration_timeout_s);
  options.continue_on_error = flags.continue_on_error;

  const auto dataset = execute_sweep(plan, runtime, options,
                                     [&](std::size_t i, std::size_t n, const RunConfig& c) {
                                       if (!flags.quiet) {
                                         err << "[" << (i + 1) << "/" << n << "] "
                                             << describe(c) << "\n";
                                       }
                                     });
  for (const auto& f : dataset.failures) {
    err << "gdev: config #" << f.plan_index << " (" << describe(f.config)
        << ") failed: " << error_name(f.code) << ": " << f.message << "\n";
  }
  if (dataset.records.empty()) throw WorkloadFailure("every configuration failed");

  const auto aggregates = stats::aggregate_all(dataset.records);
  const auto analysis = report::analyze(aggregates, manifest, {flags.epsilon, flags.tau});
  const auto files = report::write_dataset(dataset, aggregates, manifest, analysis, dir);

  out << dataset.records.size() << " executions recorded, " << dataset.failures.size()
      << " failed\n";
  out << "raw: " << files.raw_csv.string() << "\n";
  out << "aggregates: " << files.aggregates_csv.string() << "\n";
  out << "bundle: " << files.bundle_json.string() << "\n";
  return 0;
}

int cmd_analyze(const std::string& dir, const Flags& flags, std::ostream& out) {
  const auto results = report::load_results(dir);
  const auto rep = report::analyze(results.aggregates, results.manifest, {flags.epsilon, flags.tau});
  out << report::format_text(rep);
  report::write_atomic(fs::path(dir) / "analysis.json", report::to_json(rep).dump(2) + '\n');
  return 0;
}

int cmd_report(const std::string& dir, const Flags& flags, std::ostream& out) {
  const auto results = report::load_results(dir);
  const fs::path target = flags.out.empty() ? fs::path(dir) / "plots" : fs::path(flags.out);
  for (const auto& p : report::write_plot_data(results, target, {flags.epsilon, flags.tau})) {
    out << p.string() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CPU inference benchmarking and saturation analysis", "gdev"};
  app.fallthrough();
  Flags flags;
  app.add_option("--epsilon", flags.epsilon, "Saturation threshold (relative gain)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tau", flags.tau, "Ridge band half-width for regime classification")
      ->check(CLI::Range(0.0, 0.999999));
  app.add_flag("--continue-on-error", flags.continue_on_error,
               "Record failed configurations and keep going");
  app.add_option("--cores", flags.cores, "Affinity override, taskset style (e.g. 0-23)");
  app.add_option("--out", flags.out, "Output directory (default: $GDEV_OUT or ./results)");
  app.add_flag("-q,--quiet", flags.quiet, "Suppress progress and plan listings");

  std::string target;
  auto* plan = app.add_subcommand("plan", "Print the sweep plan and its cardinalities");
  plan->add_option("manifest", target, "Manifest JSON")->required();
  auto* run = app.add_subcommand("run", "Execute the sweep and persist results");
  run->add_option("manifest", target, "Manifest JSON")->required();
  auto* analyze = app.add_subcommand("analyze", "Derive scaling and roofline reports");
  analyze->add_option("results-dir", target, "Results directory")->required();
  auto* rep = app.add_subcommand("report", "Emit plot data and heatmaps");
  rep->add_option("results-dir", target, "Results directory")->required();

  if (argc < 2) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gdev: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return 2;
  }

  try {
    if (plan->parsed()) return cmd_plan(target, flags, out);
    if (run->parsed()) return cmd_run(target, flags, out, err);
    if (analyze->parsed()) return cmd_analyze(target, flags, out);
    if (rep->parsed()) return cmd_report(target, flags, out);
  } catch (const Error& e) {
    err << "gdev: " << error_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "gdev: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace gdev
