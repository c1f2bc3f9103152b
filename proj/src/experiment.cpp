#include "collapse/experiment.hpp"

#include "collapse/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <thread>

namespace collapse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<double> optional_se(double se, int replicates) {
  if (replicates < 2 || !std::isfinite(se)) return std::nullopt;
  return se;
}

void add_series(ResultTable& t, const std::string& id, const std::string& metric, const std::vector<double>& mean,
                const std::vector<double>* se) {
  t.add_series(id, metric, mean, se);
}

void add_bound_rows(ResultTable& t, const std::string& id, const analytics::BoundsReport& b) {
  const int first = b.generations.empty() ? 1 : b.generations.front();
  if (!b.s_m_values.empty()) t.add_series(id, "S_m", b.s_m_values, nullptr, first);
  if (!b.rho.empty()) {
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& r : b.rho) {
      lo.push_back(r.lower.value);
      hi.push_back(r.upper.value);
    }
    t.add_series(id, "rho_lower", lo, nullptr, first);
    t.add_series(id, "rho_upper", hi, nullptr, first);
  }
  if (b.t_bounds) {
    t.add(id, std::nullopt, "ET_lower", b.t_bounds->lower);
    t.add(id, std::nullopt, "ET_upper", b.t_bounds->upper);
  }
  if (b.inputs.s >= 2) t.add(id, std::nullopt, "G_n", b.g_n.value);
  if (b.deviation) {
    t.add(id, std::nullopt, "deviation_bound", b.deviation->value);
    t.add(id, std::nullopt, "deviation_bound_raw", b.deviation->raw);
  }
  if (b.max_n) {
    t.add(id, std::nullopt, "max_synthetic_n", b.max_n->non_positive ? kNaN : static_cast<double>(b.max_n->n));
    t.add(id, std::nullopt, "max_synthetic_n_regime_violation", b.max_n->regime_violation ? 1.0 : 0.0);
  }
  if (b.general) {
    t.add(id, std::nullopt, "expected_lambda1", *b.inputs.expected_lambda1);
    t.add(id, std::nullopt, "zeta", b.general->zeta);
    t.add(id, std::nullopt, "general_deviation_bound", b.general->bound.value);
    t.add(id, std::nullopt, "general_deviation_bound_raw", b.general->bound.raw);
  }
}

ExperimentRun prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentRun run;
  run.config = cfg;
  run.config_hash = config_hash(cfg);
  run.run_id = cfg.output.name + "-" + run.config_hash;
  run.p0 = make_initial_distribution(cfg.initial);
  analytics::BoundsInputs inputs = bounds_inputs(cfg, run.p0);
  if (cfg.schedule.kind == ScheduleKind::partially_synthetic && cfg.bounds.lambda_draws > 0) {
    inputs.expected_lambda1 =
        estimate_expected_lambda1(run.p0, cfg.schedule.real_n, cfg.bounds.lambda_draws, mix64(cfg.seed ^ 0x1a3bda))
            .mean;
  }
  run.bounds = analytics::bounds_report(inputs);
  run.table.add(run.run_id, std::nullopt, "S0", sigma(run.p0));
  run.table.add(run.run_id, std::nullopt, "support", static_cast<double>(support_size(run.p0)));
  return run;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Bin edges and heights for a histogram of collapse times.
std::pair<std::vector<double>, std::vector<double>> histogram_bins(const std::map<int, std::int64_t>& hist, int bins) {
  if (hist.empty()) return {};
  const int lo = hist.begin()->first;
  const int hi = hist.rbegin()->first;
  const int width = std::max(1, (hi - lo + bins) / bins);
  std::vector<double> edges;
  std::vector<double> heights;
  for (int start = lo; start <= hi; start += width) {
    edges.push_back(start);
    double h = 0.0;
    for (auto it = hist.lower_bound(start); it != hist.end() && it->first < start + width; ++it) h += static_cast<double>(it->second);
    heights.push_back(h);
  }
  edges.push_back(edges.back() + width);
  return {edges, heights};
}

} // namespace

analytics::BoundsInputs bounds_inputs(const ExperimentConfig& cfg, const ProbVec& p0) {
  analytics::BoundsInputs in;
  in.kind = cfg.schedule.kind;
  in.s0 = sigma(p0);
  in.n = cfg.schedule.n;
  if (cfg.schedule.kind == ScheduleKind::partially_synthetic) in.real_n = cfg.schedule.real_n;
  in.s = static_cast<std::int64_t>(p0.size());
  in.support = static_cast<std::int64_t>(support_size(p0));
  in.first_generation = 1;
  in.last_generation = cfg.max_generations;
  in.eps = cfg.bounds.eps;
  return in;
}

ExperimentRun execute(const ExperimentConfig& cfg) {
  ExperimentRun run = prepare(cfg);
  ChainConfig chain;
  chain.p0 = run.p0;
  chain.schedule = cfg.schedule;
  chain.max_generations = cfg.max_generations;
  chain.seed = cfg.seed;
  chain.record_counts = false;
  EnsembleOptions options;
  options.threads = cfg.threads;
  options.keep_traces = cfg.output.traces;
  run.summary = run_ensemble(chain, cfg.replicates, options);

  const EnsembleSummary& s = run.summary;
  const int r = s.replicates;
  ResultTable& t = run.table;
  const std::string& id = run.run_id;
  const bool with_se = r >= 2;
  add_series(t, id, "sigma", s.sigma_mean, with_se ? &s.sigma_se : nullptr);
  add_series(t, id, "sup_norm", s.sup_mean, with_se ? &s.sup_se : nullptr);
  add_series(t, id, "l1_to_p0", s.l1_gen0_mean, with_se ? &s.l1_gen0_se : nullptr);
  add_series(t, id, "l1_to_p1", s.l1_gen1_mean, with_se ? &s.l1_gen1_se : nullptr);
  for (std::size_t g = 0; g < s.rho.size(); ++g) {
    const double rho = s.rho[g];
    t.add(id, static_cast<int>(g + 1), "rho", rho, optional_se(std::sqrt(rho * (1.0 - rho) / r), r));
  }
  add_bound_rows(t, id, run.bounds);

  t.add(id, std::nullopt, "collapsed", static_cast<double>(s.collapsed));
  t.add(id, std::nullopt, "uncollapsed", static_cast<double>(s.uncollapsed));
  if (s.collapsed > 0) {
    const CollapseStatistics stats = collapse_statistics(s);
    t.add(id, std::nullopt, "collapse_time_mean", stats.mean_time, optional_se(stats.mean_time_se, static_cast<int>(s.collapsed)));
    for (std::size_t i = 0; i < s.absorbed_frequency.size(); ++i) {
      if (run.p0[i] <= kSupportEpsilon) continue;
      const double f = s.absorbed_frequency[i];
      t.add(id, std::nullopt, "absorbed_frequency." + std::to_string(i), f, optional_se(std::sqrt(f * (1.0 - f) / r), r));
    }
  }
  return run;
}

ExperimentRun evaluate_bounds(const ExperimentConfig& cfg) {
  ExperimentRun run = prepare(cfg);
  add_bound_rows(run.table, run.run_id, run.bounds);
  return run;
}

namespace {

svg::Panel sigma_panel(const ExperimentRun& run, const std::string& title) {
  svg::Panel p;
  p.title = title;
  p.x_label = "generation m";
  p.y_label = "sigma_m";
  const auto& s = run.summary;
  const auto x = svg::generations(s.sigma_mean.size());
  for (const auto& tr : s.sigma_traces) p.series.push_back(svg::trace(x, tr));
  p.series.push_back(svg::mean(x, s.sigma_mean));
  if (!run.bounds.s_m_values.empty()) p.series.push_back(svg::formula(x, run.bounds.s_m_values, "S_m formula"));
  return p;
}

svg::Panel l1_panel(const ExperimentRun& run, const std::string& title) {
  svg::Panel p;
  p.title = title;
  p.x_label = "generation m";
  p.y_label = "||p(m) - p(1)||_1";
  const auto& s = run.summary;
  const auto x = svg::generations(s.l1_gen1_mean.size());
  for (const auto& tr : s.l1_gen1_traces) p.series.push_back(svg::trace(x, tr));
  p.series.push_back(svg::mean(x, s.l1_gen1_mean));
  if (run.bounds.deviation && !run.bounds.deviation->vacuous) {
    p.series.push_back(svg::bound({x.front(), x.back()}, {run.bounds.deviation->value, run.bounds.deviation->value},
                                  "deviation bound"));
  }
  return p;
}

svg::Panel rho_panel(const ExperimentRun& run, const std::string& title) {
  svg::Panel p;
  p.title = title;
  p.x_label = "generation m";
  p.y_label = "P(T <= m)";
  const auto x = svg::generations(run.summary.rho.size());
  p.series.push_back(svg::mean(x, run.summary.rho, "empirical"));
  if (!run.bounds.rho.empty()) {
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& r : run.bounds.rho) {
      lo.push_back(r.lower.value);
      hi.push_back(r.upper.value);
    }
    p.series.push_back(svg::bound(x, lo, "lower bound"));
    p.series.push_back(svg::formula(x, hi, "upper bound"));
  }
  return p;
}

svg::Panel histogram_panel(const ExperimentRun& run, const std::string& title) {
  svg::Panel p;
  p.title = title;
  p.x_label = "collapse time T";
  p.y_label = "runs";
  auto [edges, heights] = histogram_bins(run.summary.collapse_histogram, 30);
  if (!edges.empty()) {
    svg::Series h;
    h.x = std::move(edges);
    h.y = std::move(heights);
    h.style = svg::Style::step;
    h.color = svg::color::neutral;
    h.width = 1.2;
    const double top = *std::max_element(h.y.begin(), h.y.end());
    p.series.push_back(std::move(h));
    const double m = run.summary.collapse_time_mean;
    p.series.push_back(svg::mean({m, m}, {0.0, top}, "mean T"));
  }
  return p;
}

svg::Panel initial_panel(const ProbVec& p0, const std::string& title) {
  svg::Panel p;
  p.title = title;
  p.x_label = "token i";
  p.y_label = "p_i";
  p.log_y = true;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    x.push_back(static_cast<double>(i + 1));
    y.push_back(p0[i]);
  }
  svg::Series s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.style = svg::Style::markers;
  s.color = svg::color::formula;
  s.width = 0.8;
  p.series.push_back(std::move(s));
  return p;
}

} // namespace

std::vector<svg::Panel> run_panels(const ExperimentRun& run) {
  std::vector<svg::Panel> panels;
  panels.push_back(sigma_panel(run, "sigma_m"));
  panels.push_back(l1_panel(run, "deviation from p(1)"));
  if (run.config.schedule.kind == ScheduleKind::fully_synthetic) panels.push_back(rho_panel(run, "collapse probability"));
  if (run.summary.collapsed > 0) panels.push_back(histogram_panel(run, "collapse time"));
  return panels;
}

OutputSet::OutputSet(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + directory_.string() + ": " + ec.message());
}

OutputSet::~OutputSet() {
  if (committed_) return;
  for (const auto& f : files_) {
    std::error_code ignored;
    std::filesystem::remove(f, ignored);
  }
}

void OutputSet::write(const std::string& file_name, std::string_view content) {
  const auto path = directory_ / file_name;
  write_file_atomic(path, content);
  if (std::find(files_.begin(), files_.end(), path) == files_.end()) files_.push_back(path);
}

void OutputSet::write_metadata(const std::string& stem, const std::string& config_hash, const std::string& config_text) {
  nlohmann::ordered_json meta;
  meta["config_hash"] = config_hash;
  meta["created_utc"] = timestamp_utc();
  meta["config"] = config_text;
  std::vector<std::string> names;
  for (const auto& f : files_) names.push_back(f.filename().string());
  meta["files"] = names;
  write(stem + ".meta.json", meta.dump(1) + "\n");
}

void write_table(OutputSet& out, const std::string& stem, const std::vector<OutputFormat>& formats,
                 const ResultTable& table, const std::string& config_hash, const std::string& config_text,
                 const svg::Figure* figure) {
  for (OutputFormat f : formats) {
    switch (f) {
      case OutputFormat::csv:
        out.write(stem + ".csv", to_csv(table));
        break;
      case OutputFormat::json:
        out.write(stem + ".json", to_json(table, config_hash, config_text));
        break;
      case OutputFormat::svg:
        if (figure != nullptr) out.write(stem + ".svg", svg::render(*figure));
        break;
    }
  }
}

namespace {

WrittenOutputs write_run(const ExperimentRun& run, const std::string& stem, const std::string& title) {
  const ExperimentConfig& cfg = run.config;
  svg::Figure fig;
  fig.title = title;
  fig.config_hash = run.config_hash;
  fig.panels = run_panels(run);
  fig.columns = static_cast<int>(fig.panels.size());
  OutputSet out(cfg.output.directory);
  write_table(out, stem, cfg.output.formats, run.table, run.config_hash, hashed_config_text(cfg), &fig);
  out.write_metadata(stem, run.config_hash, canonical_config(cfg));
  out.commit();
  return {run.table, run.run_id, run.config_hash, out.files()};
}

} // namespace

WrittenOutputs run_experiment(const ExperimentConfig& cfg) {
  const ExperimentRun run = execute(cfg);
  return write_run(run, cfg.output.name, run.run_id);
}

WrittenOutputs run_bounds(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  // Nothing to plot without an ensemble.
  copy.output.formats.erase(std::remove(copy.output.formats.begin(), copy.output.formats.end(), OutputFormat::svg),
                            copy.output.formats.end());
  const ExperimentRun run = evaluate_bounds(copy);
  OutputSet out(copy.output.directory);
  const std::string stem = copy.output.name + "-bounds";
  write_table(out, stem, copy.output.formats, run.table, run.config_hash, hashed_config_text(copy), nullptr);
  out.write_metadata(stem, run.config_hash, canonical_config(copy));
  out.commit();
  return {run.table, run.run_id, run.config_hash, out.files()};
}

// ---------------------------------------------------------------------------
// Figures

namespace {

constexpr std::int64_t kFigVocabulary = 600;
constexpr std::int64_t kFigSupport = 52;
constexpr double kFigS0 = 0.1;

ExperimentConfig figure_base(const std::string& name, const Schedule& sched, std::int64_t s_tilde, double s0,
                             int generations, int default_replicates, const FigureOptions& o) {
  ExperimentConfig cfg;
  cfg.schedule = sched;
  cfg.initial.kind = InitialSpec::Kind::two_level;
  cfg.initial.s = kFigVocabulary;
  cfg.initial.s_tilde = s_tilde;
  cfg.initial.s0 = s0;
  cfg.max_generations = generations;
  cfg.replicates = o.replicates.value_or(default_replicates);
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.output.name = name;
  cfg.output.directory = o.out_dir;
  cfg.output.formats = o.formats;
  cfg.output.traces = true;
  return cfg;
}

std::string tag(double v) {
  std::string s = format_value(v);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

struct Fig2Profile {
  std::int64_t s_tilde;
  double s0;
};

constexpr Fig2Profile kFig2Profiles[] = {{52, 0.1}, {200, 0.02}, {600, 0.5}};
constexpr std::int64_t kFig2Sizes[] = {10, 50, 100, 150, 200, 250, 300, 350, 400};
constexpr std::int64_t kFig3Sizes[] = {10, 100, 1000};
constexpr double kFig6S0[] = {0.1, 0.5, 0.9};

ResultTable select(const ResultTable& t, const std::set<std::string>& metrics) {
  ResultTable out;
  for (const auto& r : t.rows) {
    if (metrics.count(r.metric) != 0) out.rows.push_back(r);
  }
  return out;
}

void append(ResultTable& to, const ResultTable& from) { to.rows.insert(to.rows.end(), from.rows.begin(), from.rows.end()); }

void add_profile_rows(ResultTable& t, const std::string& id, const ProbVec& p0) {
  for (std::size_t i = 0; i < p0.size(); ++i) {
    if (p0[i] > 0.0) t.add(id, std::nullopt, "p0." + std::to_string(i), p0[i]);
  }
}

std::string joined_text(const std::vector<ExperimentConfig>& configs) {
  std::string text;
  for (const auto& c : configs) text += hashed_config_text(c) + "---\n";
  return text;
}

std::string joined_hash(const std::vector<ExperimentConfig>& configs) { return fnv1a_hex(joined_text(configs)); }

WrittenOutputs finish_figure(int id, const FigureOptions& o, const ResultTable& table, svg::Figure& fig,
                             const std::string& hash, const std::string& text) {
  fig.config_hash = hash;
  const std::string stem = "fig" + std::to_string(id);
  OutputSet out(o.out_dir);
  write_table(out, stem, o.formats, table, hash, text, &fig);
  out.write_metadata(stem, hash, text);
  out.commit();
  return {table, stem + "-" + hash, hash, out.files()};
}

WrittenOutputs figure1(const FigureOptions& o) {
  // Vocabulary 3, context length 4: 81 independent contexts, each with its
  // own random p^(0) and n = 1000 samples per generation.
  constexpr int kContexts = 81;
  constexpr int kGenerations = 1500;
  constexpr int kStride = 10;
  constexpr Count kSamples = 1000;

  std::string text = "figure: 1\ncontexts: " + std::to_string(kContexts) + "\nschedule: fully_synthetic\nn: " +
                     std::to_string(kSamples) + "\ns: 3\ninitial: dirichlet\nmax_generations: " +
                     std::to_string(kGenerations) + "\nrecord_every: " + std::to_string(kStride) +
                     "\nseed: " + std::to_string(o.seed) + "\n";
  const std::string hash = fnv1a_hex(text);

  ResultTable table;
  svg::Panel simplex;
  simplex.title = "p(m) on the simplex";
  simplex.x_label = "p_2 + p_3 / 2";
  simplex.y_label = "(sqrt 3 / 2) p_3";
  simplex.series.push_back([] {
    svg::Series tri;
    tri.x = {0.0, 1.0, 0.5, 0.0};
    tri.y = {0.0, 0.0, std::sqrt(3.0) / 2.0, 0.0};
    tri.color = svg::color::neutral;
    tri.width = 1.0;
    return tri;
  }());
  svg::Panel sig;
  sig.title = "sigma_m per context";
  sig.x_label = "generation m";
  sig.y_label = "sigma_m";

  InitialSpec init;
  init.kind = InitialSpec::Kind::dirichlet;
  init.s = 3;
  ChainConfig chain;
  chain.schedule = Schedule::fully_synthetic(kSamples);
  chain.max_generations = kGenerations;
  chain.seed = o.seed;
  chain.record_l1 = {false, false};
  std::vector<double> all_x = svg::generations(kGenerations);
  for (int j = 0; j < kContexts; ++j) {
    RandomStream prng = derive_stream(mix64(o.seed ^ 0xf161), static_cast<std::uint64_t>(j));
    chain.p0 = make_initial_distribution(init, prng);
    const Trajectory tr = run_chain(chain, static_cast<std::uint64_t>(j));
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "fig1-ctx%02d", j);
    const std::string id = idbuf;
    std::vector<double> px{chain.p0[1] + chain.p0[2] / 2.0};
    std::vector<double> py{std::sqrt(3.0) / 2.0 * chain.p0[2]};
    for (int k = 0; k < 3; ++k) table.add(id, 0, "p." + std::to_string(k + 1), chain.p0[static_cast<std::size_t>(k)]);
    for (int g = 1; g <= kGenerations; ++g) {
      const auto& c = tr.counts[static_cast<std::size_t>(g - 1)];
      const double total = static_cast<double>(c[0] + c[1] + c[2]);
      const double p2 = static_cast<double>(c[1]) / total;
      const double p3 = static_cast<double>(c[2]) / total;
      px.push_back(p2 + p3 / 2.0);
      py.push_back(std::sqrt(3.0) / 2.0 * p3);
      if (g % kStride == 0 || g == 1) {
        for (int k = 0; k < 3; ++k) table.add(id, g, "p." + std::to_string(k + 1), static_cast<double>(c[static_cast<std::size_t>(k)]) / total);
      }
    }
    if (tr.collapse_time) table.add(id, std::nullopt, "collapse_time", *tr.collapse_time);
    simplex.series.push_back(svg::trace(std::move(px), std::move(py)));
    simplex.series.back().opacity = 0.6;
    sig.series.push_back(svg::trace(all_x, tr.sigma));
  }

  svg::Figure fig;
  fig.title = "Fully synthetic, s = 3, 81 contexts, n = 1000";
  fig.columns = 2;
  fig.panel_width = 420;
  fig.panel_height = 380;
  fig.panels = {std::move(simplex), std::move(sig)};
  return finish_figure(1, o, table, fig, hash, text);
}

WrittenOutputs figure2(const FigureOptions& o) {
  const auto configs = figure_configs(2, o);
  ResultTable table;
  svg::Figure fig;
  fig.title = "Fully synthetic: mean collapse time against n";
  fig.columns = static_cast<int>(std::size(kFig2Profiles));
  std::vector<svg::Panel> bottom;
  std::size_t k = 0;
  for (const auto& prof : kFig2Profiles) {
    std::vector<double> ns;
    std::vector<double> means;
    std::vector<double> lower;
    std::optional<ProbVec> p0;
    for (std::size_t i = 0; i < std::size(kFig2Sizes); ++i, ++k) {
      ExperimentConfig cfg = configs[k];
      cfg.output.traces = false;
      const ExperimentRun run = execute(cfg);
      append(table, select(run.table, {"collapse_time_mean", "collapsed", "uncollapsed", "ET_lower", "ET_upper"}));
      ns.push_back(static_cast<double>(cfg.schedule.n));
      means.push_back(run.summary.collapse_time_mean);
      lower.push_back(run.bounds.t_bounds ? run.bounds.t_bounds->lower : kNaN);
      if (!p0) {
        p0 = run.p0;
        add_profile_rows(table, "fig2-s_tilde" + std::to_string(prof.s_tilde) + "-S0_" + tag(prof.s0), run.p0);
      }
    }
    fig.panels.push_back(initial_panel(*p0, "s~ = " + std::to_string(prof.s_tilde) + ", S0 = " + format_value(prof.s0)));
    svg::Panel p;
    p.title = "mean T over runs";
    p.x_label = "n";
    p.y_label = "E[T]";
    svg::Series marks = svg::mean(ns, means, "empirical mean");
    marks.style = svg::Style::markers;
    p.series.push_back(std::move(marks));
    p.series.push_back(svg::bound(ns, lower, "lower bound"));
    bottom.push_back(std::move(p));
  }
  for (auto& p : bottom) fig.panels.push_back(std::move(p));
  return finish_figure(2, o, table, fig, joined_hash(configs), joined_text(configs));
}

WrittenOutputs figure3(const FigureOptions& o) {
  const auto configs = figure_configs(3, o);
  ResultTable table;
  svg::Figure fig;
  fig.title = "Partially synthetic, N = 100";
  fig.columns = static_cast<int>(configs.size());
  std::vector<svg::Panel> bottom;
  for (const auto& cfg : configs) {
    const ExperimentRun run = execute(cfg);
    append(table, run.table);
    const std::string label = "n = " + std::to_string(cfg.schedule.n);
    fig.panels.push_back(sigma_panel(run, label));
    bottom.push_back(l1_panel(run, label));
  }
  for (auto& p : bottom) fig.panels.push_back(std::move(p));
  return finish_figure(3, o, table, fig, joined_hash(configs), joined_text(configs));
}

WrittenOutputs figure5(const FigureOptions& o) {
  const auto configs = figure_configs(5, o);
  ResultTable table;
  svg::Figure fig;
  fig.title = "Most recent models and randomly sampled data, n = 10";
  fig.columns = static_cast<int>(configs.size());
  std::vector<svg::Panel> rows[3];
  for (const auto& cfg : configs) {
    const ExperimentRun run = execute(cfg);
    append(table, run.table);
    const std::string label = cfg.schedule.kind == ScheduleKind::most_recent
                                  ? "window K = " + std::to_string(cfg.schedule.window)
                                  : std::string("randomly sampled");
    rows[0].push_back(sigma_panel(run, label));
    rows[1].push_back(l1_panel(run, label));
    rows[2].push_back(histogram_panel(run, label));
  }
  for (auto& row : rows) {
    for (auto& p : row) fig.panels.push_back(std::move(p));
  }
  return finish_figure(5, o, table, fig, joined_hash(configs), joined_text(configs));
}

WrittenOutputs figure6(const FigureOptions& o) {
  const auto configs = figure_configs(6, o);
  ResultTable table;
  svg::Figure fig;
  fig.title = "Partially synthetic, n = 10, N = 100, varying S0";
  fig.columns = static_cast<int>(configs.size());
  std::vector<svg::Panel> rows[3];
  for (const auto& cfg : configs) {
    const ExperimentRun run = execute(cfg);
    append(table, run.table);
    add_profile_rows(table, run.run_id, run.p0);
    const std::string label = "S0 = " + format_value(cfg.initial.s0);
    rows[0].push_back(initial_panel(run.p0, label));
    rows[1].push_back(sigma_panel(run, label));
    svg::Panel l1 = l1_panel(run, label);
    if (run.bounds.general && !run.bounds.general->bound.vacuous) {
      const auto x = svg::generations(run.summary.l1_gen1_mean.size());
      const double v = run.bounds.general->bound.value;
      l1.series.push_back(svg::bound({x.front(), x.back()}, {v, v}, "general bound"));
    }
    rows[2].push_back(std::move(l1));
  }
  for (auto& row : rows) {
    for (auto& p : row) fig.panels.push_back(std::move(p));
  }
  return finish_figure(6, o, table, fig, joined_hash(configs), joined_text(configs));
}

} // namespace

std::vector<ExperimentConfig> figure_configs(int id, const FigureOptions& o) {
  std::vector<ExperimentConfig> out;
  switch (id) {
    case 2:
      for (const auto& prof : kFig2Profiles) {
        for (std::int64_t n : kFig2Sizes) {
          // 40 n generations: far beyond the observed collapse times, and any
          // run still uncollapsed is reported rather than imputed.
          out.push_back(figure_base("fig2-s_tilde" + std::to_string(prof.s_tilde) + "-S0_" + tag(prof.s0) + "-n" +
                                        std::to_string(n),
                                    Schedule::fully_synthetic(n), prof.s_tilde, prof.s0, static_cast<int>(40 * n), 100, o));
        }
      }
      break;
    case 3:
      for (std::int64_t n : kFig3Sizes) {
        out.push_back(figure_base("fig3-n" + std::to_string(n), Schedule::partially_synthetic(100, n), kFigSupport, kFigS0,
                                  50, 100, o));
      }
      break;
    case 5:
      for (std::int64_t k : {1, 4, 16}) {
        out.push_back(figure_base("fig5-K" + std::to_string(k), Schedule::most_recent(10, k), kFigSupport, kFigS0, 500,
                                  100, o));
      }
      out.push_back(figure_base("fig5-random", Schedule::randomly_sampled(10), kFigSupport, kFigS0, 500, 100, o));
      break;
    case 6:
      for (double s0 : kFig6S0) {
        ExperimentConfig cfg = figure_base("fig6-S0_" + tag(s0), Schedule::partially_synthetic(100, 10), kFigSupport, s0,
                                           50, 100, o);
        cfg.bounds.lambda_draws = 200;
        out.push_back(std::move(cfg));
      }
      break;
    case 1:
      break;
    default:
      throw Error(Errc::unknown_figure, "figure " + std::to_string(id) + " (known: 1, 2, 3, 5, 6)");
  }
  return out;
}

WrittenOutputs reproduce_figure(int id, const FigureOptions& options) {
  switch (id) {
    case 1: return figure1(options);
    case 2: return figure2(options);
    case 3: return figure3(options);
    case 5: return figure5(options);
    case 6: return figure6(options);
    default: throw Error(Errc::unknown_figure, "figure " + std::to_string(id) + " (known: 1, 2, 3, 5, 6)");
  }
}

std::vector<BenchResult> bench(const std::vector<unsigned>& thread_counts, int replicates, std::uint64_t seed) {
  ChainConfig chain;
  chain.p0 = two_level_profile(kFigVocabulary, kFigSupport, kFigS0);
  chain.schedule = Schedule::fully_synthetic(100);
  chain.max_generations = 200;
  chain.seed = seed;
  chain.record_counts = false;

  std::vector<BenchResult> out;
  std::optional<EnsembleSummary> reference;
  for (unsigned threads : thread_counts) {
    EnsembleOptions options;
    options.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    EnsembleSummary s = run_ensemble(chain, replicates, options);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    double samples = 0.0;
    for (std::size_t g = 0; g < s.rho.size(); ++g) samples += (1.0 - (g == 0 ? 0.0 : s.rho[g - 1])) * replicates * 100.0;
    BenchResult r;
    r.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    r.seconds = elapsed.count();
    r.samples_per_second = r.seconds > 0.0 ? samples / r.seconds : 0.0;
    if (!reference) {
      reference = std::move(s);
    } else {
      r.identical_to_single_thread = s.sigma_mean == reference->sigma_mean && s.l1_gen1_mean == reference->l1_gen1_mean &&
                                     s.collapse_histogram == reference->collapse_histogram;
    }
    out.push_back(r);
  }
  return out;
}

} // namespace collapse
