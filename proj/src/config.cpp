#include "collapse/config.hpp"

#include "collapse/error.hpp"
#include "collapse/table.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace collapse {

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::svg: return "svg";
  }
  return "unknown";
}

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "svg") return OutputFormat::svg;
  return std::nullopt;
}

namespace {

bool valid_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(Errc code, const YAML::Node& at, const std::string& field, const std::string& msg) const {
    std::string where = source_;
    if (at.IsDefined() && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
    throw Error(code, where + ": " + field + ": " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(Errc::validation_error, node, field, "expected a mapping");
  }

  void check_keys(const YAML::Node& map, const std::string& section,
                  std::initializer_list<std::string_view> allowed) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(Errc::validation_error, kv.first, section.empty() ? key : section + "." + key, "unknown key");
      }
    }
  }

  std::int64_t integer(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(Errc::validation_error, node, field, "expected an integer");
    std::int64_t v = 0;
    if (YAML::convert<std::int64_t>::decode(node, v)) return v;
    // Accept integral values written in exponent form, such as 1e6.
    double d = 0.0;
    if (YAML::convert<double>::decode(node, d) && std::isfinite(d) && d == std::floor(d) &&
        std::abs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
    fail(Errc::validation_error, node, field, "expected an integer, got '" + node.Scalar() + "'");
  }

  double real(const YAML::Node& node, const std::string& field) const {
    double d = 0.0;
    if (!node.IsScalar() || !YAML::convert<double>::decode(node, d) || !std::isfinite(d)) {
      fail(Errc::validation_error, node, field, "expected a finite number");
    }
    return d;
  }

  std::string text(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(Errc::validation_error, node, field, "expected a string");
    return node.Scalar();
  }

  bool boolean(const YAML::Node& node, const std::string& field) const {
    bool b = false;
    if (!node.IsScalar() || !YAML::convert<bool>::decode(node, b)) {
      fail(Errc::validation_error, node, field, "expected true or false");
    }
    return b;
  }

  std::vector<YAML::Node> sequence(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(Errc::validation_error, node, field, "expected a list");
    return {node.begin(), node.end()};
  }

private:
  std::string source_;
};

void parse_schedule(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.require_map(node, "schedule");
  r.check_keys(node, "schedule", {"kind", "n", "N", "K", "real_data_mode"});
  if (!node["kind"]) r.fail(Errc::validation_error, node, "schedule.kind", "missing");
  const auto kind = parse_schedule_kind(r.text(node["kind"], "schedule.kind"));
  if (!kind) {
    r.fail(Errc::validation_error, node["kind"], "schedule.kind",
           "expected fully_synthetic, partially_synthetic, most_recent or randomly_sampled");
  }
  Schedule& s = cfg.schedule;
  s = Schedule{};
  s.kind = *kind;
  if (!node["n"]) r.fail(Errc::validation_error, node, "schedule.n", "missing");
  s.n = r.integer(node["n"], "schedule.n");
  if (s.n < 1) r.fail(Errc::validation_error, node["n"], "schedule.n", "must be >= 1");

  const bool partial = s.kind == ScheduleKind::partially_synthetic;
  const bool recent = s.kind == ScheduleKind::most_recent;
  const bool random = s.kind == ScheduleKind::randomly_sampled;
  if (node["N"]) {
    if (!partial) r.fail(Errc::validation_error, node["N"], "schedule.N", "only valid for partially_synthetic");
    s.real_n = r.integer(node["N"], "schedule.N");
    if (s.real_n < 1) r.fail(Errc::validation_error, node["N"], "schedule.N", "must be >= 1");
  } else if (partial) {
    r.fail(Errc::validation_error, node, "schedule.N", "required for partially_synthetic");
  }
  if (node["K"]) {
    if (!recent) r.fail(Errc::validation_error, node["K"], "schedule.K", "only valid for most_recent");
    s.window = r.integer(node["K"], "schedule.K");
    if (s.window < 1) r.fail(Errc::validation_error, node["K"], "schedule.K", "must be >= 1");
  } else if (recent) {
    r.fail(Errc::validation_error, node, "schedule.K", "required for most_recent");
  }
  if (node["real_data_mode"]) {
    if (!random) {
      r.fail(Errc::validation_error, node["real_data_mode"], "schedule.real_data_mode",
             "only valid for randomly_sampled");
    }
    const auto mode = parse_real_data_mode(r.text(node["real_data_mode"], "schedule.real_data_mode"));
    if (!mode) r.fail(Errc::validation_error, node["real_data_mode"], "schedule.real_data_mode", "expected fresh or fixed_corpus");
    s.real_data_mode = *mode;
  }
}

void parse_initial(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.require_map(node, "initial");
  r.check_keys(node, "initial", {"generator", "probs", "s", "s_tilde", "S0", "seed"});
  InitialSpec& spec = cfg.initial;
  spec = InitialSpec{};

  std::string generator;
  if (node["generator"]) {
    generator = r.text(node["generator"], "initial.generator");
  } else {
    generator = node["probs"] ? "explicit" : "two_level";
  }

  auto forbid = [&](const char* key) {
    if (node[key]) r.fail(Errc::validation_error, node[key], std::string("initial.") + key, "not used by generator " + generator);
  };
  auto need = [&](const char* key) {
    if (!node[key]) r.fail(Errc::validation_error, node, std::string("initial.") + key, "required by generator " + generator);
    return node[key];
  };

  if (generator == "explicit") {
    spec.kind = InitialSpec::Kind::explicit_probs;
    forbid("s_tilde");
    forbid("S0");
    forbid("seed");
    for (const auto& v : r.sequence(need("probs"), "initial.probs")) spec.probs.push_back(r.real(v, "initial.probs"));
    if (node["s"] && r.integer(node["s"], "initial.s") != static_cast<std::int64_t>(spec.probs.size())) {
      r.fail(Errc::validation_error, node["s"], "initial.s", "does not match the length of initial.probs");
    }
    spec.s = static_cast<std::int64_t>(spec.probs.size());
    try {
      (void)ProbVec::from_probs(spec.probs);
    } catch (const Error& e) {
      r.fail(Errc::validation_error, node["probs"], "initial.probs", e.what());
    }
  } else if (generator == "two_level") {
    spec.kind = InitialSpec::Kind::two_level;
    forbid("probs");
    forbid("seed");
    spec.s = r.integer(need("s"), "initial.s");
    spec.s_tilde = node["s_tilde"] ? r.integer(node["s_tilde"], "initial.s_tilde") : spec.s;
    spec.s0 = r.real(need("S0"), "initial.S0");
    try {
      (void)two_level_profile(spec.s, spec.s_tilde, spec.s0);
    } catch (const Error& e) {
      r.fail(Errc::validation_error, node["S0"], "initial.S0", e.what());
    }
  } else if (generator == "dirichlet") {
    spec.kind = InitialSpec::Kind::dirichlet;
    forbid("probs");
    forbid("s_tilde");
    forbid("S0");
    spec.s = r.integer(need("s"), "initial.s");
    if (spec.s < 1) r.fail(Errc::validation_error, node["s"], "initial.s", "must be >= 1");
    if (node["seed"]) spec.seed = static_cast<std::uint64_t>(r.integer(node["seed"], "initial.seed"));
  } else {
    r.fail(Errc::validation_error, node["generator"], "initial.generator", "expected explicit, two_level or dirichlet");
  }
}

void parse_run(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.require_map(node, "run");
  r.check_keys(node, "run", {"max_generations", "replicates", "seed", "threads"});
  if (!node["max_generations"]) r.fail(Errc::validation_error, node, "run.max_generations", "missing");
  const auto gens = r.integer(node["max_generations"], "run.max_generations");
  if (gens < 1 || gens > 10'000'000) r.fail(Errc::validation_error, node["max_generations"], "run.max_generations", "must be in [1, 1e7]");
  cfg.max_generations = static_cast<int>(gens);
  if (node["replicates"]) {
    const auto reps = r.integer(node["replicates"], "run.replicates");
    if (reps < 1 || reps > 100'000'000) r.fail(Errc::validation_error, node["replicates"], "run.replicates", "must be >= 1");
    cfg.replicates = static_cast<int>(reps);
  }
  if (node["seed"]) {
    const auto seed = r.integer(node["seed"], "run.seed");
    if (seed < 0) r.fail(Errc::validation_error, node["seed"], "run.seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (node["threads"]) {
    const auto threads = r.integer(node["threads"], "run.threads");
    if (threads < 0 || threads > 4096) r.fail(Errc::validation_error, node["threads"], "run.threads", "must be in [0, 4096]");
    cfg.threads = static_cast<unsigned>(threads);
  }
}

void parse_bounds(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.require_map(node, "bounds");
  r.check_keys(node, "bounds", {"eps", "lambda_draws"});
  if (node["eps"]) {
    const double eps = r.real(node["eps"], "bounds.eps");
    if (!(eps > 0.0)) r.fail(Errc::validation_error, node["eps"], "bounds.eps", "must be positive");
    cfg.bounds.eps = eps;
  }
  if (node["lambda_draws"]) {
    const auto draws = r.integer(node["lambda_draws"], "bounds.lambda_draws");
    if (draws < 0 || draws > 10'000'000) r.fail(Errc::validation_error, node["lambda_draws"], "bounds.lambda_draws", "must be >= 0");
    cfg.bounds.lambda_draws = static_cast<int>(draws);
  }
}

void parse_output(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  r.require_map(node, "output");
  r.check_keys(node, "output", {"directory", "formats", "name", "traces"});
  if (node["directory"]) cfg.output.directory = r.text(node["directory"], "output.directory");
  if (node["formats"]) {
    cfg.output.formats.clear();
    for (const auto& f : r.sequence(node["formats"], "output.formats")) {
      const auto fmt = parse_output_format(r.text(f, "output.formats"));
      if (!fmt) r.fail(Errc::validation_error, f, "output.formats", "expected csv, json or svg");
      if (std::find(cfg.output.formats.begin(), cfg.output.formats.end(), *fmt) == cfg.output.formats.end()) {
        cfg.output.formats.push_back(*fmt);
      }
    }
  }
  if (node["name"]) {
    cfg.output.name = r.text(node["name"], "output.name");
    if (!valid_name(cfg.output.name)) r.fail(Errc::validation_error, node["name"], "output.name", "use letters, digits, '_', '-' or '.'");
  }
  if (node["traces"]) cfg.output.traces = r.boolean(node["traces"], "output.traces");
}

void emit_number(std::ostringstream& out, const char* key, double v) { out << "  " << key << ": " << format_value(v) << '\n'; }

} // namespace

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& field, const std::string& msg) { throw Error(Errc::validation_error, field + ": " + msg); };
  try {
    schedule.check();
  } catch (const Error& e) {
    bad("schedule", e.what());
  }
  if (max_generations < 1) bad("run.max_generations", "must be >= 1");
  if (replicates < 1) bad("run.replicates", "must be >= 1");
  if (!valid_name(output.name)) bad("output.name", "use letters, digits, '_', '-' or '.'");
  try {
    const ProbVec p0 = make_initial_distribution(initial);
    (void)p0;
  } catch (const Error& e) {
    bad("initial", e.what());
  }
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source) {
  const Reader r{std::string(source)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(Errc::parse_error, std::string(source) + ":" + std::to_string(e.mark.line + 1) + ":" +
                                       std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(Errc::parse_error, std::string(source) + ": expected a mapping at the top level");
  r.check_keys(root, "", {"schedule", "initial", "run", "bounds", "output"});

  ExperimentConfig cfg;
  try {
    for (const char* section : {"schedule", "initial", "run"}) {
      if (!root[section]) r.fail(Errc::validation_error, root, section, "missing section");
    }
    parse_schedule(r, root["schedule"], cfg);
    parse_initial(r, root["initial"], cfg);
    parse_run(r, root["run"], cfg);
    if (root["bounds"]) parse_bounds(r, root["bounds"], cfg);
    if (root["output"]) parse_output(r, root["output"], cfg);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string(source) + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

namespace {

std::string canonical(const ExperimentConfig& cfg, bool with_output) {
  std::ostringstream out;
  const Schedule& s = cfg.schedule;
  out << "schedule:\n  kind: " << to_string(s.kind) << "\n  n: " << s.n << '\n';
  if (s.kind == ScheduleKind::partially_synthetic) out << "  N: " << s.real_n << '\n';
  if (s.kind == ScheduleKind::most_recent) out << "  K: " << s.window << '\n';
  if (s.kind == ScheduleKind::randomly_sampled) out << "  real_data_mode: " << to_string(s.real_data_mode) << '\n';

  const InitialSpec& init = cfg.initial;
  out << "initial:\n";
  switch (init.kind) {
    case InitialSpec::Kind::explicit_probs:
      out << "  generator: explicit\n  probs: [";
      for (std::size_t i = 0; i < init.probs.size(); ++i) out << (i ? ", " : "") << format_value(init.probs[i]);
      out << "]\n";
      break;
    case InitialSpec::Kind::two_level:
      out << "  generator: two_level\n  s: " << init.s << "\n  s_tilde: " << init.s_tilde << '\n';
      emit_number(out, "S0", init.s0);
      break;
    case InitialSpec::Kind::dirichlet:
      out << "  generator: dirichlet\n  s: " << init.s << "\n  seed: " << init.seed << '\n';
      break;
  }

  out << "run:\n  max_generations: " << cfg.max_generations << "\n  replicates: " << cfg.replicates
      << "\n  seed: " << cfg.seed << '\n';
  if (with_output) out << "  threads: " << cfg.threads << '\n';

  if (cfg.bounds.eps || cfg.bounds.lambda_draws > 0) {
    out << "bounds:\n";
    if (cfg.bounds.eps) emit_number(out, "eps", *cfg.bounds.eps);
    if (cfg.bounds.lambda_draws > 0) out << "  lambda_draws: " << cfg.bounds.lambda_draws << '\n';
  }

  out << "output:\n  name: " << cfg.output.name << '\n';
  out << "  traces: " << (cfg.output.traces ? "true" : "false") << '\n';
  if (with_output) {
    out << "  directory: \"" << cfg.output.directory.generic_string() << "\"\n  formats: [";
    for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) out << (i ? ", " : "") << to_string(cfg.output.formats[i]);
    out << "]\n";
  }
  return out.str();
}

} // namespace

std::string canonical_config(const ExperimentConfig& cfg) { return canonical(cfg, true); }

std::string hashed_config_text(const ExperimentConfig& cfg) { return canonical(cfg, false); }

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(hashed_config_text(cfg)); }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

ProbVec two_level_profile(std::int64_t s, std::int64_t s_tilde, double s0) {
  if (s_tilde < 1 || s_tilde > s) {
    throw Error(Errc::infeasible_target, "support size " + std::to_string(s_tilde) + " must lie in [1, " +
                                             std::to_string(s) + "]");
  }
  const auto st = static_cast<double>(s_tilde);
  if (!(s0 >= 1.0 / st) || !(s0 < 1.0)) {
    throw Error(Errc::infeasible_target, "S0 = " + format_value(s0) + " outside [1/" + std::to_string(s_tilde) + ", 1)");
  }
  const double k = st - 1.0;
  const double disc = std::max(0.0, k * ((k + 1.0) * s0 - 1.0));
  const double heavy = (1.0 + std::sqrt(disc)) / (k + 1.0);
  const double light = (1.0 - heavy) / k;
  std::vector<double> probs(static_cast<std::size_t>(s), 0.0);
  probs[0] = heavy;
  for (std::int64_t i = 1; i < s_tilde; ++i) probs[static_cast<std::size_t>(i)] = light;
  return ProbVec::from_probs(std::move(probs));
}

ProbVec make_initial_distribution(const InitialSpec& spec, RandomStream& rng) {
  switch (spec.kind) {
    case InitialSpec::Kind::explicit_probs:
      return ProbVec::from_probs(spec.probs);
    case InitialSpec::Kind::two_level:
      return two_level_profile(spec.s, spec.s_tilde, spec.s0);
    case InitialSpec::Kind::dirichlet: {
      if (spec.s < 1) throw Error(Errc::out_of_range, "Dirichlet generator needs s >= 1");
      std::vector<double> w(static_cast<std::size_t>(spec.s));
      double total = 0.0;
      for (auto& v : w) {
        // Unit-rate exponentials normalized give a flat Dirichlet.
        v = -std::log1p(-rng.uniform());
        total += v;
      }
      for (auto& v : w) v /= total;
      return ProbVec::from_probs(std::move(w));
    }
  }
  throw Error(Errc::validation_error, "unknown initial distribution kind");
}

ProbVec make_initial_distribution(const InitialSpec& spec) {
  RandomStream rng = derive_stream(spec.seed, 0x1d1c);
  return make_initial_distribution(spec, rng);
}

} // namespace collapse
