#include "collapse/config.hpp"
#include "collapse/error.hpp"
#include "collapse/experiment.hpp"
#include "collapse/softmax_check.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace collapse;

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<std::string> out_dir;
  std::vector<std::string> formats;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool with_replicates = true) {
  cmd->add_option("--seed", c.seed, "Master seed");
  if (with_replicates) cmd->add_option("--replicates", c.replicates, "Number of replicates")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "Output directory");
  cmd->add_option("--format", c.formats, "Output formats: csv, json, svg")->delimiter(',');
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

std::vector<OutputFormat> resolve_formats(const std::vector<std::string>& names) {
  std::vector<OutputFormat> out;
  for (const auto& n : names) {
    const auto f = parse_output_format(n);
    if (!f) throw Error(Errc::validation_error, "--format: unknown format '" + n + "'");
    out.push_back(*f);
  }
  return out;
}

ExperimentConfig load(const std::string& path, const Common& c) {
  ExperimentConfig cfg = parse_config(path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.replicates) cfg.replicates = *c.replicates;
  if (c.out_dir) cfg.output.directory = *c.out_dir;
  if (!c.formats.empty()) cfg.output.formats = resolve_formats(c.formats);
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

void report(const WrittenOutputs& w) {
  std::cout << "run " << w.run_id << " (config " << w.config_hash << ")\n";
  for (const auto& f : w.files) std::cout << "  wrote " << f.string() << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Recursive-training collapse simulator"};
  app.require_subcommand(1);

  Common sim_opts;
  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "Run the ensemble described by a config file");
  sim->add_option("config", sim_config, "YAML config")->required();
  add_common(sim, sim_opts);

  Common bounds_opts;
  std::string bounds_config;
  auto* bnd = app.add_subcommand("bounds", "Evaluate the closed forms for a config file");
  bnd->add_option("config", bounds_config, "YAML config")->required();
  add_common(bnd, bounds_opts, false);

  Common fig_opts;
  int figure_id = 0;
  auto* fig = app.add_subcommand("reproduce-fig", "Reproduce figure 1, 2, 3, 5 or 6");
  fig->add_option("id", figure_id, "Figure id")->required();
  add_common(fig, fig_opts);

  std::uint64_t sm_seed = 7;
  std::size_t sm_contexts = 4;
  std::size_t sm_tokens = 5;
  int sm_iters = 200000;
  double sm_lr = 1.0;
  auto* sm = app.add_subcommand("softmax-check", "Check softmax stationarity against empirical frequencies");
  sm->add_option("--seed", sm_seed, "Seed of the random instance");
  sm->add_option("--contexts", sm_contexts, "Number of contexts")->check(CLI::PositiveNumber);
  sm->add_option("--tokens", sm_tokens, "Vocabulary size")->check(CLI::PositiveNumber);
  sm->add_option("--max-iters", sm_iters, "Gradient descent iterations")->check(CLI::NonNegativeNumber);
  sm->add_option("--learning-rate", sm_lr, "Step size")->check(CLI::PositiveNumber);

  std::uint64_t bench_seed = 1;
  int bench_reps = 200;
  std::vector<unsigned> bench_threads;
  auto* bn = app.add_subcommand("bench", "Time a fixed ensemble across thread counts");
  bn->add_option("--seed", bench_seed, "Master seed");
  bn->add_option("--replicates", bench_reps, "Replicates")->check(CLI::PositiveNumber);
  bn->add_option("--threads", bench_threads, "Thread counts to time")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*sim) {
    report(run_experiment(load(sim_config, sim_opts)));
  } else if (*bnd) {
    const ExperimentConfig cfg = load(bounds_config, bounds_opts);
    const WrittenOutputs w = run_bounds(cfg);
    for (const auto& row : w.table.rows) {
      std::cout << row.metric;
      if (row.generation) std::cout << '[' << *row.generation << ']';
      std::cout << " = " << format_value(row.value) << '\n';
    }
    report(w);
  } else if (*fig) {
    FigureOptions o;
    if (fig_opts.seed) o.seed = *fig_opts.seed;
    o.replicates = fig_opts.replicates;
    if (fig_opts.out_dir) o.out_dir = *fig_opts.out_dir;
    if (!fig_opts.formats.empty()) o.formats = resolve_formats(fig_opts.formats);
    if (fig_opts.threads) o.threads = *fig_opts.threads;
    report(reproduce_figure(figure_id, o));
  } else if (*sm) {
    const auto data = softmax::random_positive_dataset(sm_contexts, sm_tokens, 9, sm_seed);
    const auto r = softmax::run_check(data, sm_seed, sm_lr, sm_iters);
    std::cout << "contexts " << r.contexts << ", tokens " << r.tokens << '\n'
              << "iterations " << r.iterations << (r.converged ? " (converged)" : " (iteration cap)") << '\n'
              << "gradient inf-norm " << format_value(r.grad_norm) << '\n'
              << "max row L1 gap " << format_value(r.row_l1_gap) << " (tolerance " << format_value(softmax::kRowGapTolerance) << ")\n"
              << "finite-difference relative error " << format_value(r.fd_relative_error) << " (tolerance "
              << format_value(softmax::kFiniteDifferenceTolerance) << ")\n"
              << (r.pass ? "PASS" : "FAIL") << '\n';
    return r.pass ? 0 : 2;
  } else if (*bn) {
    if (bench_threads.empty()) {
      bench_threads = {1};
      const unsigned hw = std::thread::hardware_concurrency();
      if (hw > 1) bench_threads.push_back(hw);
    }
    bool identical = true;
    for (const auto& r : bench(bench_threads, bench_reps, bench_seed)) {
      std::cout << "threads " << r.threads << ": " << format_value(r.seconds) << " s, "
                << format_value(std::round(r.samples_per_second)) << " samples/s"
                << (r.identical_to_single_thread ? "" : " (summary differs from the first run)") << '\n';
      identical = identical && r.identical_to_single_thread;
    }
    return identical ? 0 : 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const collapse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return collapse::is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
