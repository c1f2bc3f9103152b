#include "collapse/config.hpp"
#include "collapse/error.hpp"
#include "collapse/experiment.hpp"
#include "collapse/table.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

using namespace collapse;
namespace fs = std::filesystem;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io_error;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
}

/// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("collapse-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const char* const kFig5 = R"(schedule:
  kind: most_recent
  n: 10
  K: 4
initial:
  s: 600
  s_tilde: 52
  S0: 0.1
run:
  max_generations: 500
  replicates: 100
  seed: 3
)";

const char* const kSmall = R"(schedule:
  kind: partially_synthetic
  N: 20
  n: 5
initial:
  s: 30
  s_tilde: 10
  S0: 0.2
run:
  max_generations: 20
  replicates: 30
  seed: 11
bounds:
  eps: 0.5
  lambda_draws: 20
output:
  name: small
  formats: [csv, json, svg]
  traces: true
)";

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig cfg = parse_config_text(kSmall);
  cfg.output.directory = dir;
  cfg.threads = 1;
  return cfg;
}

bool contains(const std::string& text, std::string_view needle) { return text.find(needle) != std::string::npos; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COLLAPSE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config examples") {
  const ExperimentConfig fig5 = parse_config_text(kFig5);
  CHECK_NOTHROW(fig5.validate());
  CHECK(fig5.schedule.kind == ScheduleKind::most_recent);
  CHECK(fig5.schedule.window == 4);
  CHECK(fig5.max_generations == 500);
  CHECK(fig5.replicates == 100);
  CHECK(fig5.initial.kind == InitialSpec::Kind::two_level);

  std::string no_k = kFig5;
  no_k.replace(no_k.find("  K: 4\n"), 7, "");
  const std::string msg = message_of([&] { parse_config_text(no_k); });
  CHECK(code_of([&] { parse_config_text(no_k); }) == Errc::validation_error);
  CHECK(contains(msg, "K"));

  std::string zero = kFig5;
  zero.replace(zero.find("replicates: 100"), 15, "replicates: 0");
  CHECK(code_of([&] { parse_config_text(zero); }) == Errc::validation_error);
}

TEST_CASE("config errors carry their location") {
  std::string typo = kFig5;
  typo.replace(typo.find("replicates: 100"), 15, "replicate: 100");
  const std::string msg = message_of([&] { parse_config_text(typo, "fig5.yaml"); });
  CHECK(code_of([&] { parse_config_text(typo, "fig5.yaml"); }) == Errc::validation_error);
  CHECK(contains(msg, "fig5.yaml:11:"));
  CHECK(contains(msg, "replicate"));

  const std::string broken = "schedule:\n  kind: fully_synthetic\n  n: [10\nrun:\n";
  CHECK(code_of([&] { parse_config_text(broken, "bad.yaml"); }) == Errc::parse_error);
  CHECK(contains(message_of([&] { parse_config_text(broken, "bad.yaml"); }), "bad.yaml:"));

  std::string wrong_type = kFig5;
  wrong_type.replace(wrong_type.find("n: 10"), 5, "n: ten");
  CHECK(code_of([&] { parse_config_text(wrong_type); }) == Errc::validation_error);

  std::string stray_n = kFig5;
  stray_n.replace(stray_n.find("  K: 4\n"), 7, "  K: 4\n  N: 100\n");
  CHECK(code_of([&] { parse_config_text(stray_n); }) == Errc::validation_error);

  CHECK(code_of([] { parse_config("/nonexistent/run.yaml"); }) == Errc::io_error);
}

TEST_CASE("explicit initial distributions") {
  const std::string text = "schedule: {kind: fully_synthetic, n: 20}\n"
                           "initial: {generator: explicit, probs: [0.5, 0.3, 0.2]}\n"
                           "run: {max_generations: 5}\n";
  const ExperimentConfig cfg = parse_config_text(text);
  const ProbVec p = make_initial_distribution(cfg.initial);
  CHECK(p.size() == 3);
  CHECK(p[1] == 0.3);

  std::string bad = text;
  bad.replace(bad.find("0.2]"), 4, "0.3]");
  CHECK(code_of([&] { parse_config_text(bad); }) == Errc::validation_error);
}

TEST_CASE("canonical config and hash") {
  const ExperimentConfig cfg = parse_config_text(kSmall);
  const ExperimentConfig again = parse_config_text(canonical_config(cfg));
  CHECK(canonical_config(again) == canonical_config(cfg));
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  ExperimentConfig moved = cfg;
  moved.threads = 7;
  moved.output.directory = "elsewhere";
  moved.output.formats = {OutputFormat::json};
  CHECK(config_hash(moved) == config_hash(cfg));

  ExperimentConfig reseeded = cfg;
  reseeded.seed = 12;
  CHECK(config_hash(reseeded) != config_hash(cfg));

  // FNV-1a 64 test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("two_level_profile examples") {
  const ProbVec a = two_level_profile(600, 52, 0.1);
  CHECK(a.size() == 600);
  CHECK(support_size(a) == 52);
  CHECK(std::abs(sigma(a) - 0.1) < 1e-6);

  const ProbVec u = two_level_profile(600, 52, 1.0 / 52.0);
  for (std::size_t i = 0; i < 52; ++i) CHECK(u[i] == doctest::Approx(1.0 / 52.0).epsilon(1e-12));

  const ProbVec d = two_level_profile(2, 2, 0.9999);
  CHECK(sigma(d) == doctest::Approx(0.9999).epsilon(1e-12));
  CHECK(d[0] > 0.9999);
  CHECK(d[1] > 0.0);

  CHECK(code_of([] { two_level_profile(600, 52, 0.01); }) == Errc::infeasible_target);
  CHECK(code_of([] { two_level_profile(10, 52, 0.1); }) == Errc::infeasible_target);
  CHECK(code_of([] { two_level_profile(10, 5, 1.0); }) == Errc::infeasible_target);
}

TEST_CASE("dirichlet initial distributions are seeded") {
  InitialSpec spec;
  spec.kind = InitialSpec::Kind::dirichlet;
  spec.s = 20;
  spec.seed = 5;
  const ProbVec a = make_initial_distribution(spec);
  const ProbVec b = make_initial_distribution(spec);
  CHECK(l1_dist(a, b) == 0.0);
  spec.seed = 6;
  CHECK(l1_dist(a, make_initial_distribution(spec)) > 0.0);
}

TEST_CASE("format_value") {
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(2.0) == "2");
  CHECK(format_value(std::nan("")) == "NA");
  CHECK(format_value(std::numeric_limits<double>::infinity()) == "Inf");
  CHECK(format_value(-std::numeric_limits<double>::infinity()) == "-Inf");
  CHECK(std::isnan(parse_value("NA")));
  CHECK(parse_value("-Inf") == -std::numeric_limits<double>::infinity());
  CHECK(code_of([] { parse_value("1.0x"); }) == Errc::parse_error);
  CHECK(code_of([] { parse_value("nan"); }) == Errc::parse_error);
}

TEST_CASE("csv schema") {
  const ResultTable empty;
  CHECK(to_csv(empty) == std::string(kCsvHeader) + "\n");
  CHECK(parse_csv(to_csv(empty)).rows.empty());

  ResultTable t;
  t.add("r1", std::nullopt, "S0", 0.1);
  t.add("r1", 1, "sigma", std::nan(""), std::nan(""));
  t.add("r1", 2, "sigma", 0.25, 0.01);
  const std::string csv = to_csv(t);
  CHECK(csv == "run_id,generation,metric,value,stderr\n"
               "r1,NA,S0,0.1,NA\n"
               "r1,1,sigma,NA,NA\n"
               "r1,2,sigma,0.25,0.01\n");
  CHECK_FALSE(contains(csv, "nan"));
  CHECK_FALSE(contains(csv, "\r"));

  ResultTable comma;
  comma.add("a,b", 1, "x", 1.0);
  CHECK(code_of([&] { to_csv(comma); }) == Errc::io_error);

  CHECK(code_of([] { parse_csv("run,generation,metric,value,stderr\n"); }) == Errc::parse_error);
  const std::string bad_row = std::string(kCsvHeader) + "\nr,1,m,1\n";
  CHECK(contains(message_of([&] { parse_csv(bad_row); }), "line 2"));
}

TEST_CASE("property: csv round-trip") {
  RandomStream rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    ResultTable t;
    const int rows = static_cast<int>(rng.below(40));
    for (int i = 0; i < rows; ++i) {
      const double u = rng.uniform();
      double v = std::ldexp(u, static_cast<int>(rng.below(200)) - 100) * (rng.below(2) ? 1.0 : -1.0);
      if (rng.below(10) == 0) v = std::nan("");
      if (rng.below(20) == 0) v = std::numeric_limits<double>::infinity();
      const std::optional<int> g = rng.below(3) ? std::optional<int>(static_cast<int>(rng.below(1000))) : std::nullopt;
      const std::optional<double> se = rng.below(2) ? std::optional<double>(rng.uniform()) : std::nullopt;
      t.add("run-" + std::to_string(trial), g, "metric_" + std::to_string(i % 4), v, se);
    }
    const ResultTable back = parse_csv(to_csv(t));
    CHECK(back == t);
    CHECK(to_csv(back) == to_csv(t));
  }
}

TEST_CASE("json output") {
  ResultTable t;
  t.add("r", 1, "sigma", 0.5, std::nan(""));
  t.add("r", std::nullopt, "G_n", std::numeric_limits<double>::infinity());
  const auto j = nlohmann::json::parse(to_json(t, "0123456789abcdef", "seed: 1\n"));
  CHECK(j["config_hash"] == "0123456789abcdef");
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["value"] == 0.5);
  CHECK(j["rows"][0]["stderr"].is_null());
  CHECK(j["rows"][1]["generation"].is_null());
}

TEST_CASE("run_experiment is byte-identical across runs and thread counts") {
  TempDir tmp("repro");
  ExperimentConfig a = small_config(tmp.path / "a");
  ExperimentConfig b = small_config(tmp.path / "b");
  b.threads = 3;
  const WrittenOutputs wa = run_experiment(a);
  const WrittenOutputs wb = run_experiment(b);
  CHECK(wa.config_hash == wb.config_hash);
  CHECK(wa.table == wb.table);
  for (const char* ext : {".csv", ".json", ".svg"}) {
    const std::string x = read_file(tmp.path / "a" / (std::string("small") + ext));
    const std::string y = read_file(tmp.path / "b" / (std::string("small") + ext));
    CHECK(x == y);
    // Provenance: every artifact names the config hash.
    CHECK(contains(x, wa.config_hash));
  }
  CHECK(contains(read_file(tmp.path / "a" / "small.meta.json"), wa.config_hash));
  CHECK(wa.files.size() == 4);
  CHECK(wa.run_id == "small-" + wa.config_hash);
}

TEST_CASE("experiment table contents") {
  TempDir tmp("table");
  const ExperimentRun run = execute(small_config(tmp.path));
  int sigma_rows = 0;
  int s_m_rows = 0;
  bool has_deviation = false;
  bool has_lambda = false;
  for (const auto& row : run.table.rows) {
    if (row.metric == "sigma") {
      ++sigma_rows;
      CHECK(row.stderr_value.has_value());
    }
    if (row.metric == "S_m") ++s_m_rows;
    has_deviation = has_deviation || row.metric == "deviation_bound";
    has_lambda = has_lambda || row.metric == "expected_lambda1";
  }
  CHECK(sigma_rows == 20);
  CHECK(s_m_rows == 20);
  CHECK(has_deviation);
  CHECK(has_lambda);

  ExperimentConfig single = small_config(tmp.path);
  single.replicates = 1;
  const ExperimentRun one = execute(single);
  for (const auto& row : one.table.rows) {
    if (row.metric == "sigma") CHECK_FALSE(row.stderr_value.has_value());
  }
  CHECK(contains(to_csv(one.table), ",sigma,"));
}

TEST_CASE("shipped Fig 3 config") {
  ExperimentConfig cfg = parse_config(fs::path(COLLAPSE_SOURCE_DIR) / "configs" / "fig3_n10.yaml");
  cfg.replicates = 10;
  cfg.bounds.lambda_draws = 10;
  cfg.threads = 1;
  const ExperimentRun run = execute(cfg);
  const std::string csv = to_csv(run.table);
  CHECK(contains(csv, ",1,sigma,"));
  CHECK(contains(csv, ",50,S_m,"));
  CHECK(run.p0.size() == 600);
}

TEST_CASE("bounds-only output") {
  TempDir tmp("bounds");
  ExperimentConfig cfg = small_config(tmp.path);
  const WrittenOutputs w = run_bounds(cfg);
  CHECK(fs::exists(tmp.path / "small-bounds.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "small-bounds.svg"));
  for (const auto& row : w.table.rows) CHECK(row.metric != "sigma");
}

TEST_CASE("svg output is self-contained") {
  TempDir tmp("svg");
  (void)run_experiment(small_config(tmp.path));
  const std::string svg = read_file(tmp.path / "small.svg");
  CHECK(contains(svg, "xmlns=\"http://www.w3.org/2000/svg\""));
  CHECK(contains(svg, "</svg>"));
  CHECK_FALSE(contains(svg, "href"));
  CHECK_FALSE(contains(svg, "<image"));
  CHECK_FALSE(contains(svg, "NaN"));
}

TEST_CASE("uncommitted outputs are removed") {
  TempDir tmp("rollback");
  {
    OutputSet out(tmp.path);
    out.write("partial.csv", "x\n");
    CHECK(fs::exists(tmp.path / "partial.csv"));
  }
  CHECK_FALSE(fs::exists(tmp.path / "partial.csv"));
}

TEST_CASE("figure registry") {
  FigureOptions o;
  o.replicates = 2;
  CHECK(code_of([&] { reproduce_figure(4, o); }) == Errc::unknown_figure);

  const auto fig5 = figure_configs(5, o);
  REQUIRE(fig5.size() == 4);
  CHECK(fig5[0].schedule.kind == ScheduleKind::most_recent);
  CHECK(fig5[0].schedule.window == 1);
  CHECK(fig5[1].schedule.window == 4);
  CHECK(fig5[2].schedule.window == 16);
  CHECK(fig5[3].schedule.kind == ScheduleKind::randomly_sampled);

  const auto fig3 = figure_configs(3, o);
  REQUIRE(fig3.size() == 3);
  for (const auto& c : fig3) CHECK(c.schedule.real_n == 100);
}

TEST_CASE("figure 5 reproduction") {
  TempDir tmp("fig5");
  FigureOptions o;
  o.out_dir = tmp.path;
  o.replicates = 4;
  o.threads = 1;
  const WrittenOutputs w = reproduce_figure(5, o);
  CHECK(fs::exists(tmp.path / "fig5.csv"));
  CHECK(fs::exists(tmp.path / "fig5.svg"));
  CHECK(contains(read_file(tmp.path / "fig5.svg"), w.config_hash));
}

TEST_CASE("cli exit codes") {
  TempDir tmp("cli");
  const fs::path good = tmp.path / "good.yaml";
  const fs::path bad = tmp.path / "bad.yaml";
  write_file_atomic(good, kSmall);
  std::string invalid = kSmall;
  invalid.replace(invalid.find("replicates: 30"), 14, "replicates: 0");
  write_file_atomic(bad, invalid);
  const std::string out = " --out-dir " + (tmp.path / "out").string();

  CHECK(run_cli("simulate " + good.string() + out + " --replicates 3 --format csv,json") == 0);
  CHECK(fs::exists(tmp.path / "out" / "small.json"));
  CHECK_FALSE(fs::exists(tmp.path / "out" / "small.svg"));
  CHECK(run_cli("bounds " + good.string() + out) == 0);
  CHECK(run_cli("simulate " + bad.string() + out) == 1);
  CHECK(run_cli("simulate " + good.string() + out + " --format pdf") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("reproduce-fig 4" + out) == 1);
  CHECK(run_cli("simulate " + (tmp.path / "missing.yaml").string()) == 2);
  CHECK(run_cli("softmax-check") == 0);
  CHECK(run_cli("softmax-check --max-iters 2") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("shipped configs are valid") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(COLLAPSE_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(entry.path()).validate());
    ++seen;
  }
  CHECK(seen >= 4);
}
