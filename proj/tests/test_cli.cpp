#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dmcv/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Workspace {
 public:
  explicit Workspace(const std::string& name) : dir_(fs::temp_directory_path() / ("dmcv_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string write_config(const json& j, const std::string& file = "config.json") const {
    std::ofstream(dir_ / file) << j.dump();
    return (dir_ / file).string();
  }
  fs::path path(const std::string& rel) const { return dir_ / rel; }

 private:
  fs::path dir_;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dmcv::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("converge: single order gives one row") {
  Workspace ws("converge_min");
  const auto cfg = ws.write_config({{"orders", {1}}, {"mbar", 0.0}});
  const auto r = run({"converge", "--config", cfg, "--out", ws.path("out").string()});
  REQUIRE(r.code == 0);
  const auto csv = lines(slurp(ws.path("out/converge.csv")));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0].rfind("# dmcv 0.1.0 command=converge config_hash=", 0) == 0);
  CHECK(csv[0].find("seed=none") != std::string::npos);
  CHECK(csv[1] == "m,mbar,dim,trace_dist,tail_eps,bound_6eps,spectral_dist,eig_gap_0,proj_gap_0");
  CHECK(std::stod(fields(csv[2])[3]) == 0.0);
  CHECK(fs::exists(ws.path("out/converge.json")));
}

TEST_CASE("converge: sweep rows decrease") {
  Workspace ws("converge_sweep");
  const auto cfg = ws.write_config({{"orders", {2, 4, 8, 16}}, {"mbar", 1.0}, {"dim", 48}});
  REQUIRE(run({"converge", "--config", cfg, "--out", ws.path("o").string()}).code == 0);
  const auto csv = lines(slurp(ws.path("o/converge.csv")));
  REQUIRE(csv.size() == 6);
  double prev = 10.0;
  for (std::size_t i = 2; i < csv.size(); ++i) {
    const auto f = fields(csv[i]);
    REQUIRE(f.size() == 7 + 12);
    const double td = std::stod(f[3]);
    CHECK(td < prev);
    prev = td;
  }
  const auto j = json::parse(slurp(ws.path("o/converge.json")));
  CHECK(j.at("rows").size() == 4);
  CHECK(j.at("meta").at("command") == "converge");
}

TEST_CASE("converge: configuration errors exit 2") {
  Workspace ws("converge_bad");
  auto r = run({"converge", "--config", ws.write_config({{"orders", {4}}, {"mbar", -1.0}}), "--out",
                ws.path("o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("mbar") != std::string::npos);

  r = run({"converge", "--config", ws.write_config({{"orders", {4}}, {"mbar", 1.0}, {"colour", 1}})});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  CHECK(run({"converge", "--config", ws.path("missing.json").string()}).code == 2);
  CHECK(run({"converge"}).code == 2);
  CHECK(run({"bogus", "--config", "x"}).code == 2);
  CHECK(run({"converge", "--config", ws.write_config({{"orders", {1}}, {"mbar", 1.0}})}).code == 2);
}

TEST_CASE("covariance: EPR trend and metadata") {
  Workspace ws("covariance");
  const auto cfg =
      ws.write_config({{"orders", {16}}, {"mbar", 1.0}, {"tau", 1.0}, {"xi", 0.0}, {"w", 0.0}, {"dim", 48}});
  REQUIRE(run({"covariance", "--config", cfg, "--out", ws.path("o").string()}).code == 0);
  const auto csv = lines(slurp(ws.path("o/covariance.csv")));
  REQUIRE(csv.size() == 3);
  CHECK(csv[1] == "m,mbar,tau,xi,w,z_ch,z_star,cm_distance,purification_trace_dist");
  const auto f = fields(csv[2]);
  CHECK(std::abs(std::stod(f[6]) - 2.0 * std::sqrt(2.0)) < 1e-3 * 2.0 * std::sqrt(2.0));

  const auto cfg_w =
      ws.write_config({{"orders", {4}}, {"mbar", 1.0}, {"tau", 0.5}, {"xi", 0.01}, {"w", 0.25}}, "w.json");
  REQUIRE(run({"covariance", "--config", cfg_w, "--out", ws.path("w").string()}).code == 0);
  const auto csv_w = lines(slurp(ws.path("w/covariance.csv")));
  CHECK(csv_w[0].find("w=0.25") != std::string::npos);
  const auto j = json::parse(slurp(ws.path("w/covariance.json")));
  CHECK(j.at("meta").at("w") == 0.25);
  CHECK(j.at("rows")[0].at("reference_cm").contains("vb_convention"));
}

TEST_CASE("covariance: undersized cutoff exits 3") {
  Workspace ws("covariance_small");
  const auto cfg = ws.write_config({{"orders", {4}}, {"mbar", 1.0}, {"tau", 1.0}, {"xi", 0.0}, {"dim", 6}});
  const auto r = run({"covariance", "--config", cfg, "--out", ws.path("o").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("TruncationTooSevere") != std::string::npos);
}

TEST_CASE("security: budget on stdout") {
  Workspace ws("security");
  auto r = run({"security", "--config", ws.write_config({{"mbar", 1.0}, {"dim", 20}, {"eps_tilde", 0.0}})});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j.at("eps_total").get<double>() == std::ldexp(1.0, -19));
  CHECK(j.at("meta").at("eps_test_scaling") == "up-to-constant");

  r = run({"security", "--config", ws.write_config({{"mbar", 1.0}, {"eps_target", 1e-10}})});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("dim") == 34);

  CHECK(run({"security", "--config", ws.write_config({{"mbar", 1.0}})}).code == 2);
  CHECK(run({"security", "--config", ws.write_config({{"mbar", 1.0}, {"dim", 4}, {"eps_target", 0.1}})}).code == 2);
}

TEST_CASE("simulate: reproducible and seed-checked") {
  Workspace ws("simulate");
  const json base = {{"constellation", {{"order", 4}, {"mbar", 1.0}}},
                     {"channel", {{"tau", 0.5}, {"xi", 0.05}}},
                     {"rounds", 2000},
                     {"rounds_csv", true}};
  json seeded = base;
  seeded["seed"] = 31;
  const auto cfg = ws.write_config(seeded);
  REQUIRE(run({"simulate", "--config", cfg, "--out", ws.path("a").string()}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--out", ws.path("b").string()}).code == 0);
  CHECK(slurp(ws.path("a/simulate.json")) == slurp(ws.path("b/simulate.json")));
  CHECK(slurp(ws.path("a/rounds.csv")) == slurp(ws.path("b/rounds.csv")));

  const auto rounds = lines(slurp(ws.path("a/rounds.csv")));
  CHECK(rounds.size() == 2002);
  CHECK(rounds[1] == "x_re,x_im,y_re,y_im,test_flag,decision_map,decision_md");
  const auto j = json::parse(slurp(ws.path("a/simulate.json")));
  CHECK(j.at("meta").at("seed") == 31);
  CHECK(j.at("meta").at("channel_model") == "gaussian-thermal-loss-assumed");

  const auto unseeded = ws.write_config(base, "unseeded.json");
  CHECK(run({"simulate", "--config", unseeded, "--out", ws.path("c").string()}).code == 2);
  REQUIRE(run({"simulate", "--config", unseeded, "--out", ws.path("c").string(), "--seed", "31"}).code == 0);
  // The override lands in the effective config, so the hash matches too.
  CHECK(slurp(ws.path("c/simulate.json")) == slurp(ws.path("a/simulate.json")));

  REQUIRE(run({"simulate", "--config", cfg, "--out", ws.path("d").string(), "--seed", "32"}).code == 0);
  CHECK(slurp(ws.path("d/simulate.json")) != slurp(ws.path("a/simulate.json")));
}

TEST_CASE("simulate: inline and file constellations") {
  Workspace ws("simulate_forms");
  const json points = {{"points", {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}}, {"probs", {0.25, 0.25, 0.25, 0.25}}};
  const auto file = ws.write_config(points, "qpsk.json");
  for (const json& c : {json{{"file", file}}, points, json{{"order", 4}, {"nu", 0.2}, {"spacing", 1.0}}}) {
    const json cfg = {{"constellation", c}, {"channel", {{"tau", 0.9}, {"xi", 0.0}}}, {"rounds", 500}, {"seed", 1}};
    CHECK(run({"simulate", "--config", ws.write_config(cfg), "--out", ws.path("o").string()}).code == 0);
  }
  const json bad = {{"constellation", {{"order", 4}}}, {"channel", {{"tau", 0.9}, {"xi", 0.0}}}, {"rounds", 500},
                    {"seed", 1}};
  CHECK(run({"simulate", "--config", ws.write_config(bad), "--out", ws.path("o").string()}).code == 2);
  const json tau = {{"constellation", points}, {"channel", {{"tau", 1.5}, {"xi", 0.0}}}, {"rounds", 500},
                    {"seed", 1}};
  CHECK(run({"simulate", "--config", ws.write_config(tau), "--out", ws.path("o").string()}).code == 2);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(dmcv::cli::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(dmcv::cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
