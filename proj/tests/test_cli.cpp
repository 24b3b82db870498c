// pzbeam - privacy-zone aware beamforming for shared-spectrum networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// End-to-end runs of the command line tool: exit codes, CSV schemas and
// byte-identical reproduction from a run manifest.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include <pzbeam/report.hpp>

using namespace pzbeam;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PZBEAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("pzbeam_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json tiny_config() {
    ExperimentConfig cfg;
    cfg.scenario.st_count = 2;
    cfg.scenario.srs_per_st = 2;
    cfg.scenario.antenna_count = 2;
    cfg.scenario.grid_dim = 2;
    cfg.scenario.cell_side_km = 2.0;
    cfg.scenario.rng_seed = 11;
    cfg.array.quantization_count = 180;
    cfg.algorithm.n_re = 2;
    cfg.algorithm.max_outer_iterations = 4;
    cfg.threshold_dbm = -92.0;
    return config_to_json(cfg);
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    std::ofstream out(p, std::ios::binary);
    out << j.dump(2) << '\n';
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

} // namespace

TEST_CASE("privacy subcommand produces the documented outputs") {
    const fs::path dir = fresh_dir("privacy");
    const fs::path cfg_path = dir / "config.json";
    write_json(cfg_path, tiny_config());
    const int code =
        run_cli("privacy --config " + cfg_path.string() + " --out " + (dir / "out").string());
    CHECK(code == 0);
    CHECK(fs::exists(dir / "out" / "summary.csv"));
    CHECK(fs::exists(dir / "out" / "links.csv"));
    CHECK(fs::exists(dir / "out" / "zone.csv"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(first_line(slurp(dir / "out" / "summary.csv")) ==
          "threshold_dbm,scheme,privacy_bits,sum_rate,active_links,certified");
}

TEST_CASE("config errors exit with code 1") {
    const fs::path dir = fresh_dir("badcfg");
    nlohmann::json j = tiny_config();
    j["scenario"]["mystery_knob"] = 3;
    write_json(dir / "config.json", j);
    CHECK(run_cli("privacy --config " + (dir / "config.json").string() + " --out " +
                  (dir / "out").string()) == 1);
}

TEST_CASE("infeasible-everywhere outcomes exit with code 2") {
    const fs::path dir = fresh_dir("infeasible");
    nlohmann::json j = tiny_config();
    j["threshold_dbm"] = -250.0;
    j["algorithm"]["n_re"] = 0;
    write_json(dir / "config.json", j);
    CHECK(run_cli("privacy --config " + (dir / "config.json").string() + " --out " +
                  (dir / "out").string()) == 2);
}

TEST_CASE("sweep emits the fixed schema and reproduces byte-identically from its manifest") {
    const fs::path dir = fresh_dir("sweep");
    nlohmann::json j = tiny_config();
    j["sweep"] = {{"parameter", "threshold_dbm"},
                  {"values", {-96.0, -90.0, -84.0}},
                  {"realizations", 2},
                  {"scheme", "both"}};
    write_json(dir / "config.json", j);
    const int code = run_cli("sweep --config " + (dir / "config.json").string() + " --out " +
                             (dir / "a").string());
    CHECK(code == 0);
    const std::string csv = slurp(dir / "a" / "sweep.csv");
    CHECK(first_line(csv) ==
          "threshold_dbm,scheme,privacy_bits,sum_rate,active_links,cutoff_flag");
    // one row per (value, scheme, realization) plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 2 * 2);
    CHECK(fs::exists(dir / "a" / "sweep_summary.csv"));

    // replay from the manifest alone
    const int code2 = run_cli("sweep --config " + (dir / "a" / "manifest.json").string() +
                              " --out " + (dir / "b").string());
    CHECK(code2 == 0);
    CHECK(slurp(dir / "b" / "sweep.csv") == csv);
    CHECK(slurp(dir / "b" / "sweep_summary.csv") == slurp(dir / "a" / "sweep_summary.csv"));
    CHECK(slurp(dir / "b" / "manifest.json") == slurp(dir / "a" / "manifest.json"));
}

TEST_CASE("baseline subcommand runs both modes") {
    const fs::path dir = fresh_dir("baseline");
    write_json(dir / "config.json", tiny_config());
    CHECK(run_cli("baseline --mode zone --config " + (dir / "config.json").string() + " --out " +
                  (dir / "z").string()) == 0);
    CHECK(run_cli("baseline --mode throughput --config " + (dir / "config.json").string() +
                  " --out " + (dir / "t").string()) == 0);
    CHECK(first_line(slurp(dir / "z" / "summary.csv")) ==
          "threshold_dbm,scheme,privacy_bits,sum_rate,active_links,certified");
}

TEST_CASE("numeric formatting is locale independent with nine significant digits") {
    CHECK(format_g9(0.125) == "0.125");
    CHECK(format_g9(1.0 / 3.0) == "0.333333333");
    CHECK(format_g9(-96.9897) == "-96.9897");
    CHECK(format_g9(1.46846605e-11) == "1.46846605e-11");
    CHECK(format_g9(121.0) == "121");
}

TEST_CASE("sweep runner is deterministic across worker counts") {
    ExperimentConfig cfg = parse_config(tiny_config());
    SweepSpec spec;
    spec.parameter = "threshold_dbm";
    spec.values = {-94.0, -88.0};
    spec.realizations = 2;
    spec.scheme = "both";
    const auto rows1 = run_sweep(cfg, spec, 1);
    const auto rows3 = run_sweep(cfg, spec, 3);
    REQUIRE(rows1.size() == rows3.size());
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].value == rows3[i].value);
        CHECK(rows1[i].scheme == rows3[i].scheme);
        CHECK(rows1[i].privacy_bits == rows3[i].privacy_bits);
        CHECK(rows1[i].sum_rate == rows3[i].sum_rate);
        CHECK(rows1[i].active_links == rows3[i].active_links);
    }
}
