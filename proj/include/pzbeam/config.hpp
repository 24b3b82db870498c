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

#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pzbeam {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration. Powers are given in dBm in the file and converted
// to Watts when the scenario is built. Unknown keys are rejected.
struct ScenarioConfig {
    double region_side_km = 300.0;
    double ez_center_x_km = 150.0;
    double ez_center_y_km = 150.0;
    double ez_radius_km = 20.0;
    int st_count = 12;
    int srs_per_st = 9;
    double coverage_radius_m = 150.0;
    int antenna_count = 8;
    int grid_dim = 11;
    double cell_side_km = 2.0;
    double power_budget_dbm = 50.0;
    double p_min_dbm = 26.0;
    double p_max_dbm = 50.0;
    double min_rate_bps_hz = 0.5;
    std::uint64_t rng_seed = 1;
};

struct RadioConfig {
    double carrier_frequency_hz = 3.5e9;
    double tx_insertion_loss_db = 2.0;
    double rx_insertion_loss_db = 2.0;
    double fdr_db = 1.0;
    double antenna_efficiency = 0.9;
    double noise_power_dbm = -94.0;
    double pathloss_exponent_su = 3.6;
    double su_reference_loss_db = 43.3;
};

struct ArrayConfig {
    int quantization_count = 360;
    double element_spacing = 0.5; // wavelengths
    double r_ratio = 1.0;
};

struct AlgorithmConfig {
    int max_outer_iterations = 20;
    int sca_iterations = 4;
    double tolerance = 1e-3;
    double eta = -1e4;
    double xi = -1e4;
    int n_re = 10;
    double rounding_threshold = 0.5;
    int restoration_retries = 1000;
    bool polish = true;
};

struct SweepConfig {
    std::string parameter;          // threshold_dbm | node_count | ez_radius | r_ratio | n_re | zone_size
    std::vector<double> values;
    int realizations = 10;
    std::string scheme = "both";    // proposed | mrc | both
};

// Present when the config is a run manifest; replaying such a file through
// the CLI reproduces the original run byte for byte.
struct RunConfig {
    std::string subcommand;
    int workers = 1;
    std::string format = "csv";
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    RadioConfig radio;
    ArrayConfig array;
    AlgorithmConfig algorithm;
    double threshold_dbm = -108.0;
    // Optional explicit zone for throughput runs, as (i,j) grid indices.
    // Empty means the full candidate grid.
    std::vector<std::pair<int, int>> zone_cells;
    SweepConfig sweep;
    bool has_sweep = false;
    RunConfig run;
    bool has_run = false;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_if;
    using detail::reject_unknown;
    ExperimentConfig cfg;
    reject_unknown(j, {"scenario", "radio", "array", "algorithm", "threshold_dbm",
                       "zone_cells", "sweep", "run"},
                   "config root");
    if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        reject_unknown(s,
                       {"region_side_km", "ez_center_km", "ez_radius_km", "st_count",
                        "srs_per_st", "coverage_radius_m", "antenna_count", "grid_dim",
                        "cell_side_km", "power_budget_dbm", "p_min_dbm", "p_max_dbm",
                        "min_rate_bps_hz", "rng_seed"},
                       "scenario");
        auto& c = cfg.scenario;
        get_if(s, "region_side_km", c.region_side_km);
        if (s.contains("ez_center_km")) {
            auto v = s.at("ez_center_km").get<std::vector<double>>();
            if (v.size() != 2) throw ConfigError("ez_center_km must be [x, y]");
            c.ez_center_x_km = v[0];
            c.ez_center_y_km = v[1];
        }
        get_if(s, "ez_radius_km", c.ez_radius_km);
        get_if(s, "st_count", c.st_count);
        get_if(s, "srs_per_st", c.srs_per_st);
        get_if(s, "coverage_radius_m", c.coverage_radius_m);
        get_if(s, "antenna_count", c.antenna_count);
        get_if(s, "grid_dim", c.grid_dim);
        get_if(s, "cell_side_km", c.cell_side_km);
        get_if(s, "power_budget_dbm", c.power_budget_dbm);
        get_if(s, "p_min_dbm", c.p_min_dbm);
        get_if(s, "p_max_dbm", c.p_max_dbm);
        get_if(s, "min_rate_bps_hz", c.min_rate_bps_hz);
        get_if(s, "rng_seed", c.rng_seed);
    }
    if (j.contains("radio")) {
        const auto& r = j.at("radio");
        reject_unknown(r,
                       {"carrier_frequency_hz", "tx_insertion_loss_db", "rx_insertion_loss_db",
                        "fdr_db", "antenna_efficiency", "noise_power_dbm",
                        "pathloss_exponent_su", "su_reference_loss_db"},
                       "radio");
        auto& c = cfg.radio;
        get_if(r, "carrier_frequency_hz", c.carrier_frequency_hz);
        get_if(r, "tx_insertion_loss_db", c.tx_insertion_loss_db);
        get_if(r, "rx_insertion_loss_db", c.rx_insertion_loss_db);
        get_if(r, "fdr_db", c.fdr_db);
        get_if(r, "antenna_efficiency", c.antenna_efficiency);
        get_if(r, "noise_power_dbm", c.noise_power_dbm);
        get_if(r, "pathloss_exponent_su", c.pathloss_exponent_su);
        get_if(r, "su_reference_loss_db", c.su_reference_loss_db);
    }
    if (j.contains("array")) {
        const auto& a = j.at("array");
        reject_unknown(a, {"quantization_count", "element_spacing", "r_ratio"}, "array");
        get_if(a, "quantization_count", cfg.array.quantization_count);
        get_if(a, "element_spacing", cfg.array.element_spacing);
        get_if(a, "r_ratio", cfg.array.r_ratio);
    }
    if (j.contains("algorithm")) {
        const auto& a = j.at("algorithm");
        reject_unknown(a,
                       {"max_outer_iterations", "sca_iterations", "tolerance", "eta", "xi",
                        "n_re", "rounding_threshold", "restoration_retries", "polish"},
                       "algorithm");
        auto& c = cfg.algorithm;
        get_if(a, "max_outer_iterations", c.max_outer_iterations);
        get_if(a, "sca_iterations", c.sca_iterations);
        get_if(a, "tolerance", c.tolerance);
        get_if(a, "eta", c.eta);
        get_if(a, "xi", c.xi);
        get_if(a, "n_re", c.n_re);
        get_if(a, "rounding_threshold", c.rounding_threshold);
        get_if(a, "restoration_retries", c.restoration_retries);
        get_if(a, "polish", c.polish);
    }
    get_if(j, "threshold_dbm", cfg.threshold_dbm);
    if (j.contains("zone_cells")) {
        for (const auto& e : j.at("zone_cells")) {
            auto v = e.get<std::vector<int>>();
            if (v.size() != 2) throw ConfigError("zone_cells entries must be [i, j]");
            cfg.zone_cells.emplace_back(v[0], v[1]);
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        reject_unknown(s, {"parameter", "values", "realizations", "scheme"}, "sweep");
        cfg.has_sweep = true;
        get_if(s, "parameter", cfg.sweep.parameter);
        get_if(s, "values", cfg.sweep.values);
        get_if(s, "realizations", cfg.sweep.realizations);
        get_if(s, "scheme", cfg.sweep.scheme);
        static const std::set<std::string> params = {"threshold_dbm", "node_count",
                                                     "ez_radius",     "r_ratio",
                                                     "n_re",          "zone_size"};
        if (!params.count(cfg.sweep.parameter))
            throw ConfigError("unknown sweep parameter '" + cfg.sweep.parameter + "'");
        if (cfg.sweep.values.empty()) throw ConfigError("sweep value list must be nonempty");
        if (cfg.sweep.realizations < 1) throw ConfigError("sweep realizations must be >= 1");
    }
    if (j.contains("run")) {
        const auto& r = j.at("run");
        reject_unknown(r, {"subcommand", "workers", "format"}, "run");
        cfg.has_run = true;
        get_if(r, "subcommand", cfg.run.subcommand);
        get_if(r, "workers", cfg.run.workers);
        get_if(r, "format", cfg.run.format);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// Serializes a config with every field materialized. Feeding the result back
// through parse_config reproduces the same experiment (manifest round trip).
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    const auto& s = cfg.scenario;
    j["scenario"] = {{"region_side_km", s.region_side_km},
                     {"ez_center_km", {s.ez_center_x_km, s.ez_center_y_km}},
                     {"ez_radius_km", s.ez_radius_km},
                     {"st_count", s.st_count},
                     {"srs_per_st", s.srs_per_st},
                     {"coverage_radius_m", s.coverage_radius_m},
                     {"antenna_count", s.antenna_count},
                     {"grid_dim", s.grid_dim},
                     {"cell_side_km", s.cell_side_km},
                     {"power_budget_dbm", s.power_budget_dbm},
                     {"p_min_dbm", s.p_min_dbm},
                     {"p_max_dbm", s.p_max_dbm},
                     {"min_rate_bps_hz", s.min_rate_bps_hz},
                     {"rng_seed", s.rng_seed}};
    const auto& r = cfg.radio;
    j["radio"] = {{"carrier_frequency_hz", r.carrier_frequency_hz},
                  {"tx_insertion_loss_db", r.tx_insertion_loss_db},
                  {"rx_insertion_loss_db", r.rx_insertion_loss_db},
                  {"fdr_db", r.fdr_db},
                  {"antenna_efficiency", r.antenna_efficiency},
                  {"noise_power_dbm", r.noise_power_dbm},
                  {"pathloss_exponent_su", r.pathloss_exponent_su},
                  {"su_reference_loss_db", r.su_reference_loss_db}};
    j["array"] = {{"quantization_count", cfg.array.quantization_count},
                  {"element_spacing", cfg.array.element_spacing},
                  {"r_ratio", cfg.array.r_ratio}};
    const auto& a = cfg.algorithm;
    j["algorithm"] = {{"max_outer_iterations", a.max_outer_iterations},
                      {"sca_iterations", a.sca_iterations},
                      {"tolerance", a.tolerance},
                      {"eta", a.eta},
                      {"xi", a.xi},
                      {"n_re", a.n_re},
                      {"rounding_threshold", a.rounding_threshold},
                      {"restoration_retries", a.restoration_retries},
                      {"polish", a.polish}};
    j["threshold_dbm"] = cfg.threshold_dbm;
    if (!cfg.zone_cells.empty()) {
        nlohmann::json z = nlohmann::json::array();
        for (auto& [i, jj] : cfg.zone_cells) z.push_back({i, jj});
        j["zone_cells"] = z;
    }
    if (cfg.has_sweep) {
        j["sweep"] = {{"parameter", cfg.sweep.parameter},
                      {"values", cfg.sweep.values},
                      {"realizations", cfg.sweep.realizations},
                      {"scheme", cfg.sweep.scheme}};
    }
    return j;
}

} // namespace pzbeam
