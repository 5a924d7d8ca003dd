#include "dmcv/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "dmcv/bipartite.hpp"
#include "dmcv/constellation.hpp"
#include "dmcv/convergence.hpp"
#include "dmcv/error.hpp"
#include "dmcv/protocol.hpp"
#include "dmcv/security.hpp"
#include "json.hpp"

namespace dmcv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config access. Every reader names the offending key in its message.

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  return j.at(key);
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<long long>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return as_number(j.at(key), std::string("'") + key + "'");
}

std::optional<int> optional_int(const json& j, const char* key, int min_value) {
  if (!j.contains(key)) return std::nullopt;
  const auto v = as_integer(j.at(key), std::string("'") + key + "'");
  if (v < min_value || v > 100000) {
    throw ConfigError(std::string("'") + key + "' must be >= " + std::to_string(min_value));
  }
  return static_cast<int>(v);
}

double nonneg(const json& j, const char* key, const std::string& where) {
  const double v = as_number(require(j, key, where), std::string("'") + key + "'");
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string("'") + key + "' must be finite and >= 0");
  return v;
}

std::vector<int> orders_of(const json& j, const std::string& where) {
  const auto& arr = require(j, "orders", where);
  if (!arr.is_array() || arr.empty()) throw ConfigError("'orders' must be a non-empty array");
  std::vector<int> orders;
  for (const auto& v : arr) {
    const auto m = as_integer(v, "'orders' entries");
    if (m < 1 || m > 1024) throw ConfigError("'orders' entries must lie in [1, 1024]");
    orders.push_back(static_cast<int>(m));
  }
  return orders;
}

ChannelModel channel_of(double tau, double xi) {
  ChannelModel ch{tau, xi};
  try {
    ch.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return ch;
}

std::optional<std::uint64_t> seed_of(const json& j) {
  if (!j.contains("seed")) return std::nullopt;
  const auto& v = j.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("'seed' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Output.

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct RunMeta {
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  json extra = json::object();

  json to_json() const {
    json j = {{"tool", "dmcv"}, {"version", kVersion}, {"command", command}, {"config_hash", config_hash}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }

  std::string csv_header() const {
    std::ostringstream os;
    os << "# dmcv " << kVersion << " command=" << command << " config_hash=" << config_hash
       << " seed=" << (seed ? std::to_string(*seed) : std::string("none"));
    for (const auto& [k, v] : extra.items()) os << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
    return os.str();
  }
};

void write_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& meta_line) {
    os_ << std::setprecision(17);
    os_ << meta_line << '\n';
  }

  void header(const std::vector<std::string>& cols) { row_strings(cols); }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((os_ << (first ? "" : ",") << values, first = false), ...);
    os_ << '\n';
  }

  void row_values(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << '\n';
  }

  std::string str() const { return os_.str(); }

 private:
  void row_strings(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }

  std::ostringstream os_;
};

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// converge

struct ConvergeConfig {
  std::vector<int> orders;
  double mbar = 0.0;
  SweepOptions sweep;
};

ConvergeConfig parse_converge(const json& j) {
  const std::string where = "converge config";
  reject_unknown_keys(j, {"orders", "mbar", "dim", "branches", "spacing", "seed"}, where);
  ConvergeConfig cfg;
  cfg.orders = orders_of(j, where);
  cfg.mbar = nonneg(j, "mbar", where);
  cfg.sweep.dim = optional_int(j, "dim", 1);
  cfg.sweep.branches = optional_int(j, "branches", 1).value_or(kDefaultBranches);
  cfg.sweep.spacing = optional_number(j, "spacing");
  if (cfg.sweep.spacing && !(*cfg.sweep.spacing > 0.0)) throw ConfigError("'spacing' must be > 0");
  // An order that cannot reach mbar is a configuration error.
  for (int m : cfg.orders) shaped_qam(m, cfg.mbar, cfg.sweep.spacing);
  return cfg;
}

void run_converge(const ConvergeConfig& cfg, const RunMeta& meta, const fs::path& dir) {
  const auto reports = convergence_sweep(cfg.orders, cfg.mbar, cfg.sweep);
  const std::size_t branches = reports.empty() ? 0 : reports.front().eig_gap.size();

  CsvWriter csv(meta.csv_header());
  std::vector<std::string> cols = {"m", "mbar", "dim", "trace_dist", "tail_eps", "bound_6eps", "spectral_dist"};
  for (std::size_t k = 0; k < branches; ++k) cols.push_back("eig_gap_" + std::to_string(k));
  for (std::size_t k = 0; k < branches; ++k) cols.push_back("proj_gap_" + std::to_string(k));
  csv.header(cols);

  json rows = json::array();
  for (const auto& r : reports) {
    std::vector<double> values = {static_cast<double>(r.m), r.mbar, static_cast<double>(r.dim), r.trace_dist,
                                  r.tail_eps, r.bound_6eps, r.spectral_dist};
    values.insert(values.end(), r.eig_gap.begin(), r.eig_gap.end());
    values.insert(values.end(), r.proj_gap.begin(), r.proj_gap.end());
    csv.row_values(values);
    rows.push_back(to_json(r));
  }
  write_atomically(dir / "converge.csv", csv.str());
  write_atomically(dir / "converge.json", json{{"meta", meta.to_json()}, {"rows", rows}}.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// covariance

struct CovarianceConfig {
  std::vector<int> orders;
  double mbar = 0.0;
  ChannelModel channel;
  double w = 0.0;
  std::optional<int> dim;
  std::optional<double> spacing;
};

CovarianceConfig parse_covariance(const json& j) {
  const std::string where = "covariance config";
  reject_unknown_keys(j, {"orders", "mbar", "tau", "xi", "w", "dim", "spacing", "seed"}, where);
  CovarianceConfig cfg;
  cfg.orders = orders_of(j, where);
  cfg.mbar = nonneg(j, "mbar", where);
  cfg.channel = channel_of(as_number(require(j, "tau", where), "'tau'"), nonneg(j, "xi", where));
  if (j.contains("w")) cfg.w = nonneg(j, "w", where);
  cfg.dim = optional_int(j, "dim", 2);
  cfg.spacing = optional_number(j, "spacing");
  if (cfg.spacing && !(*cfg.spacing > 0.0)) throw ConfigError("'spacing' must be > 0");
  for (int m : cfg.orders) shaped_qam(m, cfg.mbar, cfg.spacing);
  return cfg;
}

void run_covariance(const CovarianceConfig& cfg, const RunMeta& meta, const fs::path& dir) {
  std::vector<Constellation> constellations;
  for (int m : cfg.orders) constellations.push_back(shaped_qam(m, cfg.mbar, cfg.spacing));
  const int dim = cfg.dim.value_or(std::max(reference_dim(cfg.mbar, constellations), 2));

  const auto reference = purify(thermal_state(cfg.mbar, dim), "EPR(" + std::to_string(cfg.mbar) + ")");
  const double z_ch = channel_z(cfg.mbar, cfg.channel.tau);

  CsvWriter csv(meta.csv_header());
  csv.header({"m", "mbar", "tau", "xi", "w", "z_ch", "z_star", "cm_distance", "purification_trace_dist"});
  json rows = json::array();
  for (const auto& c : constellations) {
    const auto state = purify(constellation_density(c, dim), c.id());
    const double zs = z_star(state, cfg.channel, cfg.w);
    const double dist = cm_distance(cfg.mbar, zs, cfg.channel);
    const double ptd = bipartite_trace_distance(state, reference);
    csv.row(c.order(), cfg.mbar, cfg.channel.tau, cfg.channel.xi, cfg.w, z_ch, zs, dist, ptd);
    rows.push_back({{"m", c.order()},
                    {"dim", dim},
                    {"z_ch", z_ch},
                    {"z_star", zs},
                    {"cm_distance", dist},
                    {"purification_trace_dist", ptd},
                    {"reference_cm", to_json(covariance_matrix(cfg.mbar, z_ch, cfg.channel))},
                    {"estimated_cm", to_json(covariance_matrix(cfg.mbar, zs, cfg.channel))}});
  }
  write_atomically(dir / "covariance.csv", csv.str());
  write_atomically(dir / "covariance.json", json{{"meta", meta.to_json()}, {"rows", rows}}.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// security

struct SecurityConfig {
  double mbar = 0.0;
  double eps_tilde = 0.0;
  std::optional<int> dim;
  std::optional<double> eps_target;
};

SecurityConfig parse_security(const json& j) {
  const std::string where = "security config";
  reject_unknown_keys(j, {"mbar", "dim", "eps_target", "eps_tilde", "seed"}, where);
  SecurityConfig cfg;
  cfg.mbar = nonneg(j, "mbar", where);
  if (j.contains("eps_tilde")) cfg.eps_tilde = nonneg(j, "eps_tilde", where);
  cfg.dim = optional_int(j, "dim", 1);
  cfg.eps_target = optional_number(j, "eps_target");
  if (cfg.dim.has_value() == cfg.eps_target.has_value()) {
    throw ConfigError("security config needs exactly one of 'dim' or 'eps_target'");
  }
  if (cfg.eps_target && !(*cfg.eps_target > 0.0 && *cfg.eps_target < 1.0)) {
    throw ConfigError("'eps_target' must lie in (0, 1)");
  }
  return cfg;
}

void run_security(const SecurityConfig& cfg, const RunMeta& meta, std::ostream& out) {
  const int d = cfg.dim ? *cfg.dim : min_dim_for_eps(cfg.mbar, *cfg.eps_target);
  auto j = to_json(compose_budget(cfg.eps_tilde, cfg.mbar, d));
  const json m = meta.to_json();
  for (const auto& [k, v] : m.items()) j["meta"][k] = v;
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  ProtocolRun run;
  bool rounds_csv = false;
};

Constellation constellation_of(const json& j) {
  if (!j.is_object()) throw ConfigError("'constellation' must be an object");
  if (j.contains("file")) {
    reject_unknown_keys(j, {"file"}, "constellation");
    std::ifstream in(j.at("file").get<std::string>());
    if (!in) throw ConfigError("cannot open constellation file '" + j.at("file").get<std::string>() + "'");
    return constellation_from_json(json::parse(in));
  }
  if (j.contains("points")) return constellation_from_json(j);

  reject_unknown_keys(j, {"order", "mbar", "spacing", "nu"}, "constellation");
  const auto m = as_integer(require(j, "order", "constellation"), "'order'");
  if (m < 1 || m > 1024) throw ConfigError("'order' must lie in [1, 1024]");
  const auto spacing = optional_number(j, "spacing");
  if (j.contains("mbar") == j.contains("nu")) {
    throw ConfigError("constellation needs exactly one of 'mbar' or 'nu'");
  }
  if (j.contains("mbar")) return shaped_qam(static_cast<int>(m), nonneg(j, "mbar", "constellation"), spacing);
  if (!spacing) throw ConfigError("constellation with 'nu' also needs 'spacing'");
  const auto grid = qam_grid(static_cast<int>(m), *spacing);
  return mb_shaped(grid, nonneg(j, "nu", "constellation"), "qam" + std::to_string(m * m));
}

SimulateConfig parse_simulate(const json& j, std::optional<std::uint64_t> seed_override) {
  const std::string where = "simulate config";
  reject_unknown_keys(j, {"constellation", "channel", "rounds", "test_fraction", "seed", "abort", "rounds_csv"},
                      where);
  const auto& ch = require(j, "channel", where);
  reject_unknown_keys(ch, {"tau", "xi"}, "channel");

  const auto seed = seed_override ? seed_override : seed_of(j);
  if (!seed) throw ConfigError("simulate needs a 'seed' (config key or --seed)");

  // Built separately: a throw inside the aggregate initializer would leak the
  // constellation on some compilers.
  auto constellation = constellation_of(require(j, "constellation", where));
  const auto channel = channel_of(as_number(require(ch, "tau", "channel"), "'tau'"), nonneg(ch, "xi", "channel"));
  SimulateConfig cfg{ProtocolRun{std::move(constellation), channel, 0, 0.1, *seed, std::nullopt}, false};
  const auto rounds = as_integer(require(j, "rounds", where), "'rounds'");
  if (rounds < 100) throw ConfigError("'rounds' must be >= 100");
  cfg.run.rounds = static_cast<std::size_t>(rounds);
  if (j.contains("test_fraction")) cfg.run.test_fraction = as_number(j.at("test_fraction"), "'test_fraction'");
  if (!(cfg.run.test_fraction > 0.0 && cfg.run.test_fraction < 1.0)) {
    throw ConfigError("'test_fraction' must lie in (0, 1)");
  }
  if (j.contains("abort")) {
    const auto& a = j.at("abort");
    reject_unknown_keys(a, {"tau_min", "xi_max"}, "abort");
    cfg.run.abort = AbortThresholds{nonneg(a, "tau_min", "abort"), nonneg(a, "xi_max", "abort")};
  }
  if (j.contains("rounds_csv")) {
    if (!j.at("rounds_csv").is_boolean()) throw ConfigError("'rounds_csv' must be a boolean");
    cfg.rounds_csv = j.at("rounds_csv").get<bool>();
  }
  return cfg;
}

void run_simulate(const SimulateConfig& cfg, const RunMeta& meta, const fs::path& dir) {
  std::vector<RoundRecord> rounds;
  const auto result = run_protocol(cfg.run, cfg.rounds_csv ? &rounds : nullptr);

  json j = {{"meta", meta.to_json()},
            {"result", to_json(result)},
            {"run",
             {{"constellation", to_json(cfg.run.constellation)},
              {"channel", {{"tau", cfg.run.channel.tau}, {"xi", cfg.run.channel.xi}}},
              {"rounds", cfg.run.rounds},
              {"test_fraction", cfg.run.test_fraction}}}};
  write_atomically(dir / "simulate.json", j.dump(2) + "\n");

  if (cfg.rounds_csv) {
    CsvWriter csv(meta.csv_header());
    csv.header({"x_re", "x_im", "y_re", "y_im", "test_flag", "decision_map", "decision_md"});
    for (const auto& r : rounds) {
      const std::string map = r.decision_map ? std::to_string(*r.decision_map) : "";
      const std::string md = r.decision_md ? std::to_string(*r.decision_md) : "";
      csv.row(r.x.real(), r.x.imag(), r.y.real(), r.y.imag(), r.test ? 1 : 0, map, md);
    }
    write_atomically(dir / "rounds.csv", csv.str());
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convergence and security numerics for discrete-modulated CV-QKD", "dmcv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_value = 0;
  std::optional<std::uint64_t> seed;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"converge", "Trace-distance, spectral and eigenprojector sweep against the thermal state"},
      {"covariance", "Purification, Z* and covariance-matrix distance sweep"},
      {"security", "Energy-test security budget (JSON on stdout)"},
      {"simulate", "Monte Carlo of the prepare-and-measure protocol"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed_value, "Override the configuration seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  auto* selected = app.get_subcommands().front();
  const std::string command = selected->get_name();
  if (selected->count("--seed") > 0) seed = seed_value;

  // Phase 1: everything up to dispatch is configuration.
  json config;
  RunMeta meta;
  fs::path dir;
  ConvergeConfig converge;
  CovarianceConfig covariance;
  SecurityConfig security;
  std::optional<SimulateConfig> simulate;
  try {
    config = load_config(config_path);
    if (seed) config["seed"] = *seed;
    meta.command = command;
    meta.config_hash = hex64(fnv1a64(config.dump()));
    meta.seed = seed_of(config);
    if (command == "converge") {
      converge = parse_converge(config);
    } else if (command == "covariance") {
      covariance = parse_covariance(config);
      meta.extra["w"] = covariance.w;
    } else if (command == "security") {
      security = parse_security(config);
    } else {
      simulate = parse_simulate(config, seed);
      meta.extra["channel_model"] = "gaussian-thermal-loss-assumed";
    }
    if (command != "security") dir = prepare_out_dir(out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  // Phase 2: numerical work.
  try {
    if (command == "converge") {
      run_converge(converge, meta, dir);
    } else if (command == "covariance") {
      run_covariance(covariance, meta, dir);
    } else if (command == "security") {
      run_security(security, meta, out);
    } else {
      run_simulate(*simulate, meta, dir);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace dmcv::cli
