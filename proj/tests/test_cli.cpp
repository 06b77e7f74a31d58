#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "capa/config.hpp"
#include "capa/plotdata.hpp"
#include "capa/sweep.hpp"

using namespace capa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void put(const std::string& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(const std::string& args) {
  const std::string cmd = std::string(CAPA_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallConfig = R"({
  "system": {"aperture_len_m": 0.2498},
  "numerics": {"t": 200},
  "monte_carlo": {"trials": 20000, "seed": 7},
  "sweeps": [
    {"axis": "gamma_b_db", "values": [0, 10, 20]},
    {"axis": "gamma_e_db", "values": [0, 10], "evaluators": ["closed-form", "asymptotic"],
     "outputs": ["rate", "sop", "slope", "offset", "gain"]},
    {"axis": "aperture_len", "values": [0.1249, 0.2498], "scenarios": ["SE"]},
    {"axis": "k_eves", "values": [1, 2, 4], "scenarios": ["MIE", "MCE"]}
  ]
})";

}  // namespace

TEST_CASE("config defaults follow the table1 preset") {
  const auto c = parse_config(json::object());
  CHECK(c == table1_preset());
  CHECK(c.wavelength_m == 0.1249);
  CHECK(c.aperture_len_m == doctest::Approx(40 * 0.1249));
  CHECK(c.k_eves == 5);
  CHECK(c.r0 == 3.0);
  CHECK(c.t == 1000);
  CHECK(c.q_floor == 160);
}

TEST_CASE("config round trip through JSON") {
  const auto c = parse_config(json::parse(kSmallConfig));
  CHECK(c.sweeps.size() == 4u);
  CHECK(c.sweeps[1].evaluators.size() == 2u);
  CHECK(parse_config(to_json(c)) == c);
  CHECK(parse_config(json::parse(to_json(c).dump())) == c);
}

TEST_CASE("config errors name the field") {
  auto path_of = [](const std::string& text) {
    try {
      parse_config(json::parse(text));
    } catch (const ConfigError& e) {
      return e.path;
    }
    return std::string("<no error>");
  };
  CHECK(path_of(R"({"sweeps":[{"axis":"k_eves","values":[1],"scenarios":[]}]})") == "sweeps[0].scenarios");
  CHECK(path_of(R"({"system":{"gamma_b":3}})") == "system.gamma_b");
  CHECK(path_of(R"({"sweeps":[{"axis":"nope","values":[1]}]})") == "sweeps[0].axis");
  CHECK(path_of(R"({"sweeps":[{"axis":"gamma_b_db","values":[3,1]}]})") == "sweeps[0].values[1]");
  CHECK(path_of(R"({"sweeps":[{"axis":"k_eves","values":[0]}]})") == "sweeps[0].values[0]");
  CHECK(path_of(R"({"numerics":{"precision":"quad"}})") == "numerics.precision");
  CHECK(path_of(R"({"monte_carlo":{"trials":-5}})") == "monte_carlo.trials");
  CHECK(path_of(R"({"sweeps":[{"axis":"gamma_b_db","values":[1],"evaluators":["magic"]}]})") ==
        "sweeps[0].evaluators[0]");
}

TEST_CASE("sweep rows are ordered and formatted") {
  auto c = parse_config(json::parse(kSmallConfig));
  c.sweeps.resize(2);
  SweepOptions opt;
  opt.threads = 2;
  const auto res = run_sweep(c, opt);
  CHECK(res.errors == 0u);
  REQUIRE_FALSE(res.rows.empty());
  CHECK(res.rows.front().axis == "gamma_b_db");
  CHECK(res.rows.back().axis == "gamma_e_db");
  for (const auto& r : res.rows) {
    const auto line = format_row(r);
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    if (r.evaluator == Evaluator::monte_carlo) CHECK(r.seed.has_value());
  }
  opt.threads = 1;
  const auto again = run_sweep(c, opt);
  REQUIRE(again.rows.size() == res.rows.size());
  for (std::size_t i = 0; i < res.rows.size(); ++i) CHECK(format_row(again.rows[i]) == format_row(res.rows[i]));
}

TEST_CASE("cli sweep is deterministic and splits into plot files") {
  TempDir dir("capa_cli_sweep");
  put(dir / "c.json", kSmallConfig);
  REQUIRE(run("sweep --config " + (dir / "c.json") + " --out " + (dir / "a.csv") + " 2>/dev/null") == 0);
  REQUIRE(run("sweep --config " + (dir / "c.json") + " --out " + (dir / "b.csv") + " --threads 1 2>/dev/null") == 0);
  const auto a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a.rfind(kCsvHeader, 0) == 0);

  REQUIRE(run("plotdata " + (dir / "a.csv") + " --outdir " + (dir / "pd") + " 2>/dev/null") == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "pd")) files += e.path().extension() == ".csv";
  // rate and sop for four axes, plus slope/offset/gain on the gamma_e_db axis
  CHECK(files == 11);
  const auto first = slurp(dir / "pd/rate_gamma_b_db.csv");
  REQUIRE(run("plotdata " + (dir / "a.csv") + " --outdir " + (dir / "pd") + " 2>/dev/null") == 0);
  CHECK(slurp(dir / "pd/rate_gamma_b_db.csv") == first);
  CHECK(first.rfind("value,SE:quadrature,SE:monte-carlo,SE:monte-carlo:std_err", 0) == 0);

  REQUIRE(run("sweep --config " + (dir / "c.json") + " --seed 8 --out " + (dir / "s8.csv") + " 2>/dev/null") == 0);
  CHECK(slurp(dir / "s8.csv") != a);
}

TEST_CASE("cli reports bad input with exit code 2") {
  TempDir dir("capa_cli_errors");
  put(dir / "empty.json", R"({"sweeps":[{"axis":"k_eves","values":[1],"scenarios":[]}]})");
  CHECK(run("sweep --config " + (dir / "empty.json") + " 2>" + (dir / "err.txt")) == 2);
  CHECK(slurp(dir / "err.txt").find("sweeps[0].scenarios") != std::string::npos);
  CHECK(run("sweep --config " + (dir / "missing.json") + " 2>/dev/null") == 2);
  put(dir / "bad.csv", "x,y\n1,2\n");
  CHECK(run("plotdata " + (dir / "bad.csv") + " --outdir " + (dir / "o") + " 2>/dev/null") == 2);
  put(dir / "short.csv", std::string(kCsvHeader) + "\ngamma_b_db,1,SE\n");
  CHECK(run("plotdata " + (dir / "short.csv") + " --outdir " + (dir / "o") + " 2>/dev/null") == 2);
  CHECK(run("frobnicate 2>/dev/null") == 2);
  CHECK(run("sweep --config " + (dir / "empty.json") + " --evaluator nope 2>/dev/null") == 2);
}

TEST_CASE("cli marks failed points and exits 1") {
  TempDir dir("capa_cli_fail");
  put(dir / "c.json", R"({"system":{"aperture_len_m":0.2498},"numerics":{"t":200},
    "sweeps":[{"axis":"gamma_b_db","values":[-10,20],"scenarios":["SE"],"evaluators":["closed-form"],"outputs":["rate"]}]})");
  CHECK(run("sweep --config " + (dir / "c.json") + " --out " + (dir / "o.csv") + " 2>/dev/null") == 1);
  const auto out = slurp(dir / "o.csv");
  CHECK(out.find("gamma_b_db,-10,SE,closed-form,rate,error:precision-loss,,,") != std::string::npos);
  CHECK(out.find("gamma_b_db,20,SE,closed-form,rate,") != std::string::npos);
}

TEST_CASE("cli config and spectrum commands") {
  TempDir dir("capa_cli_misc");
  put(dir / "c.json", kSmallConfig);
  REQUIRE(run("config --config " + (dir / "c.json") + " > " + (dir / "norm.json")) == 0);
  CHECK(parse_config(json::parse(slurp(dir / "norm.json"))) == parse_config(json::parse(kSmallConfig)));
  REQUIRE(run("config > " + (dir / "default.json")) == 0);
  CHECK(parse_config(json::parse(slurp(dir / "default.json"))) == table1_preset());

  REQUIRE(run("spectrum --lambda 0.1249 --length 0.2498 --t 200 > " + (dir / "s.csv") + " 2>/dev/null") == 0);
  const auto s = slurp(dir / "s.csv");
  CHECK(s.rfind("index,sigma,epsilon\n1,0.0624464249", 0) == 0);
}

TEST_CASE("spectrum cache directory from the environment") {
  TempDir dir("capa_cli_cache");
  const std::string env = "CAPA_CACHE_DIR=" + dir.path.string() + " ";
  const std::string cmd = env + CAPA_CLI_PATH + " spectrum --lambda 0.1249 --length 0.2498 --t 200 > " + (dir / "a.csv") + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  int cached = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) cached += e.path().extension() != ".csv";
  CHECK(cached == 1);
  const std::string again = env + CAPA_CLI_PATH + " spectrum --lambda 0.1249 --length 0.2498 --t 200 > " + (dir / "b.csv") + " 2>/dev/null";
  REQUIRE(std::system(again.c_str()) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}
