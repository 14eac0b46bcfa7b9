// End-to-end tests of the command-line binary: exit codes, CSV schemas, determinism,
// and the JSON manifest contract. The binary path is injected by the build.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spinmap/config.hpp"
#include "spinmap/csv.hpp"
#include "spinmap/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spinmap_cli_" + std::to_string(std::rand()) + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(SPINMAP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kSmallConfig = R"({
  "delta": 1.0,
  "model": {"type": "ohmic", "alpha": 0.2, "omega_c": 5.0},
  "bath": {"n_modes": 3, "omega_lo": 0.5, "omega_hi": 8.5},
  "fock_cutoff": 3,
  "time": {"dt": 0.005, "steps": 200, "snapshot_stride": 20},
  "extra_states": [{"theta": 1.0, "phi": 0.7}],
  "tcl2": {"t_max": 1.0, "n_samples": 11},
  "bound": {"n_draws": 25}
})";

std::vector<std::string> header_of(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  std::vector<std::string> cols;
  std::istringstream s(line);
  std::string field;
  while (std::getline(s, field, ',')) cols.push_back(field);
  return cols;
}

}  // namespace

TEST_CASE("emit-default-config prints valid JSON that parses back unchanged") {
  TempDir dir;
  const fs::path log = dir.path / "log";
  CHECK(run("--emit-default-config", log) == 0);
  const json j = json::parse(slurp(log));
  CHECK(j.at("delta") == 1.0);
  CHECK(j.at("model").at("type") == "ohmic");

  const auto cfg = spinmap::config::parse_config(slurp(log));
  CHECK(spinmap::config::config_hash(cfg) ==
        spinmap::config::config_hash(spinmap::config::default_config()));
}

TEST_CASE("full pipeline produces documented schemas and coherent analysis outputs") {
  TempDir dir;
  const fs::path cfg = dir.path / "config.json";
  const fs::path out = dir.path / "out";
  const fs::path log = dir.path / "log";
  write_file(cfg, kSmallConfig);
  const std::string common = " --config " + cfg.string() + " --out " + out.string();

  REQUIRE(run("discretize" + common, log) == 0);
  REQUIRE(run("simulate" + common, log) == 0);
  REQUIRE(run("analyze" + common, log) == 0);
  REQUIRE(run("tcl2" + common, log) == 0);
  REQUIRE(run("bound-check" + common, log) == 0);

  SUBCASE("column layouts match the README contract") {
    CHECK(header_of(out / "bath.csv") ==
          std::vector<std::string>{"index", "omega", "coupling"});
    CHECK(header_of(out / "trajectory_up.csv") ==
          std::vector<std::string>{"t", "rho00", "rho01_re", "rho01_im", "rho11", "sx", "sy",
                                   "sz"});
    CHECK(header_of(out / "svd.csv") ==
          std::vector<std::string>{"t", "S1", "S2", "S3", "b1", "b2", "b3"});
    CHECK(header_of(out / "map.csv") ==
          std::vector<std::string>{"t", "m11", "m12", "m13", "m21", "m22", "m23", "m31", "m32",
                                   "m33", "b1", "b2", "b3"});
    CHECK(header_of(out / "bound.csv") ==
          std::vector<std::string>{"t", "delta", "bound_general", "bound_sigma_z"});
    CHECK(header_of(out / "prediction.csv") ==
          std::vector<std::string>{"t", "err_extra_0"});
    CHECK(header_of(out / "tcl2_svd.csv") == header_of(out / "svd.csv"));
    CHECK(header_of(out / "tcl2_map.csv") == header_of(out / "map.csv"));
    CHECK(header_of(out / "tcl2_ode.csv") == header_of(out / "trajectory_up.csv"));
  }

  SUBCASE("trajectory t = 0 rows equal the configured initial states") {
    const auto up = spinmap::io::read_trajectory_csv((out / "trajectory_up.csv").string());
    CHECK(up.t.front() == 0.0);
    CHECK(std::abs(up.rho.front()(0, 0).real() - 1.0) < 1e-14);
    const auto px = spinmap::io::read_trajectory_csv((out / "trajectory_plus_x.csv").string());
    CHECK(std::abs(px.rho.front()(0, 1).real() - 0.5) < 1e-14);
    const auto extra =
        spinmap::io::read_trajectory_csv((out / "trajectory_extra_0.csv").string());
    CHECK(std::abs(extra.rho.front()(0, 0).real() - std::cos(0.5) * std::cos(0.5)) < 1e-14);
  }

  SUBCASE("reconstruction columns start at the identity map") {
    const auto svd = spinmap::io::read_svd_csv((out / "svd.csv").string());
    CHECK(svd.s.front()(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(svd.s.front()(2) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(svd.b.front().norm() < 1e-10);
    const auto tcl2_svd = spinmap::io::read_svd_csv((out / "tcl2_svd.csv").string());
    CHECK(tcl2_svd.s.front()(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tcl2_svd.s.front()(2) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("manifests carry hashes, warnings, and per-command reports") {
    const json sim = json::parse(slurp(out / "manifest_simulate.json"));
    CHECK(sim.at("command") == "simulate");
    CHECK(sim.at("config_hash").get<std::string>().size() == 16);
    CHECK(sim.at("convergence").at("max_norm_drift").get<double>() < 1e-9);
    CHECK(sim.at("convergence").contains("cutoff_converged"));

    const json ana = json::parse(slurp(out / "manifest_analyze.json"));
    CHECK(ana.at("classification").contains("class"));
    CHECK(ana.at("condition_number").get<double>() == doctest::Approx(3.2255).epsilon(1e-3));
    CHECK(ana.at("max_prediction_error").get<double>() < 1e-10);

    const json tcl = json::parse(slurp(out / "manifest_tcl2.json"));
    CHECK(tcl.at("max_closed_vs_ode").get<double>() < 1e-8);
    CHECK(tcl.at("rates").contains("gamma_yz"));

    const json bnd = json::parse(slurp(out / "manifest_bound-check.json"));
    CHECK(bnd.at("bound").at("pair_worst_general_margin").get<double>() >= 0.0);
    CHECK(bnd.at("bound").at("draw_worst_sharp_margin").get<double>() >= -1e-12);
  }
}

TEST_CASE("reruns are byte-identical regardless of worker count") {
  TempDir dir;
  const fs::path cfg = dir.path / "config.json";
  const fs::path log = dir.path / "log";
  write_file(cfg, kSmallConfig);

  for (const char* variant : {"a --workers 1", "b --workers 4", "c --workers 4"}) {
    const std::string name(1, variant[0]);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " +
                    (dir.path / name).string() + std::string(variant + 1), log) == 0);
  }
  for (const char* f :
       {"bath.csv", "trajectory_up.csv", "trajectory_plus_y.csv", "trajectory_extra_0.csv"}) {
    const std::string a = slurp(dir.path / "a" / f);
    CHECK(a == slurp(dir.path / "b" / f));
    CHECK(a == slurp(dir.path / "c" / f));
    CHECK(!a.empty());
  }
}

TEST_CASE("decoupled simulation reproduces bare tunneling oscillations in the CSV") {
  TempDir dir;
  const fs::path cfg = dir.path / "config.json";
  const fs::path out = dir.path / "out";
  const fs::path log = dir.path / "log";
  write_file(cfg, R"({
    "model": {"type": "ohmic", "alpha": 0.0, "omega_c": 5.0},
    "bath": {"n_modes": 1, "omega_lo": 0.5, "omega_hi": 1.5},
    "fock_cutoff": 2,
    "time": {"dt": 0.002, "steps": 500, "snapshot_stride": 10}
  })");
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + out.string(), log) == 0);

  const json manifest = json::parse(slurp(out / "manifest_simulate.json"));
  REQUIRE(manifest.at("warnings").size() > 0);  // decoupled bath is called out

  const auto up = spinmap::io::read_trajectory_csv((out / "trajectory_up.csv").string());
  for (std::size_t k = 0; k < up.t.size(); ++k) {
    const double sz = (up.rho[k](0, 0) - up.rho[k](1, 1)).real();
    CHECK(sz == doctest::Approx(std::cos(2.0 * up.t[k])).epsilon(1e-8));
  }
}

TEST_CASE("failure paths map to the documented exit codes") {
  TempDir dir;
  const fs::path log = dir.path / "log";
  const fs::path out = dir.path / "out";
  auto config_with = [&](const std::string& text) {
    const fs::path p = dir.path / "config.json";
    write_file(p, text);
    return " --config " + p.string() + " --out " + out.string();
  };

  SUBCASE("malformed JSON and schema violations exit 2") {
    CHECK(run("discretize" + config_with("{nope"), log) == 2);
    CHECK(run("discretize" + config_with(R"({"delta": -2})"), log) == 2);
    CHECK(run("discretize" + config_with(R"({"unknown_key": 1})"), log) == 2);
    CHECK(slurp(log).find("unrecognized key") != std::string::npos);
    CHECK(run("discretize" + config_with(R"({"model": {"type": "lorentz"}})"), log) == 2);
    CHECK(run("simulate --config " + (dir.path / "does_not_exist.json").string(), log) == 2);
    CHECK(run("frobnicate", log) == 2);
    CHECK(run("simulate" + config_with(kSmallConfig) + " --workers 0", log) == 2);
  }

  SUBCASE("memory budget violations exit 3") {
    CHECK(run("simulate" + config_with(
                               R"({"fock_cutoff": 64, "bath": {"n_modes": 8},
                                   "memory_budget_mb": 10})"),
              log) == 3);
    CHECK(slurp(log).find("budget") != std::string::npos);
    CHECK(run("simulate" + config_with(
                               R"({"fock_cutoff": 64, "bath": {"n_modes": 12},
                                   "memory_budget_mb": 10})"),
              log) == 3);
    CHECK(slurp(log).find("overflows") != std::string::npos);
  }

  SUBCASE("missing analysis inputs exit 4") {
    CHECK(run("analyze" + config_with(kSmallConfig), log) == 4);
    CHECK(run("bound-check" + config_with(kSmallConfig), log) == 4);
  }

  SUBCASE("overdamped rate sets exit 5") {
    CHECK(run("tcl2" + config_with(R"({"tcl2": {"rates": {"gamma_yz": 2.5}}})"), log) == 5);
    CHECK(slurp(log).find("overdamped") != std::string::npos);
  }

  SUBCASE("help exits cleanly") { CHECK(run("--help", log) == 0); }
}

TEST_CASE("gapped models rescale so the density peaks at twice the splitting") {
  TempDir dir;
  const fs::path cfg = dir.path / "config.json";
  const fs::path out = dir.path / "out";
  const fs::path log = dir.path / "log";
  write_file(cfg, R"({
    "delta": 1.0,
    "model": {"type": "gapped", "alpha": 0.1},
    "bath": {"n_modes": 200}
  })");
  REQUIRE(run("discretize --config " + cfg.string() + " --out " + out.string(), log) == 0);

  const auto bath = spinmap::io::read_bath_csv((out / "bath.csv").string());
  REQUIRE(bath.n_modes() == 200);
  // discrete argmax of c_n^2 / w_n should straddle the rescaled peak at w = 2
  int best = 0;
  for (int n = 0; n < bath.n_modes(); ++n)
    if (bath.coupling[n] * bath.coupling[n] / bath.omega[n] >
        bath.coupling[best] * bath.coupling[best] / bath.omega[best])
      best = n;
  CHECK(std::abs(bath.omega[static_cast<std::size_t>(best)] - 2.0) < 0.05);

  // support boundaries in units of the splitting: [b, b+3c] / lambda around the peak
  const json manifest = json::parse(slurp(out / "manifest_discretize.json"));
  const double lo = manifest.at("window").at("omega_lo").get<double>();
  const double hi = manifest.at("window").at("omega_hi").get<double>();
  const double lambda = (0.541 + 1.280 * std::pow(3.0, -1.0 / 3.0)) / 2.0;
  CHECK(lo == doctest::Approx(0.541 / lambda).epsilon(1e-12));
  CHECK(hi == doctest::Approx((0.541 + 3 * 1.280) / lambda).epsilon(1e-12));
}
