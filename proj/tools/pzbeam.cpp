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
// Experiment runner. Subcommands:
//   throughput  rate maximization on a given privacy zone
//   privacy     two-step zone design plus beamforming
//   baseline    MRC reference scheme (zone or throughput mode)
//   sweep       parameter sweep over any of the above
//   validate    oracle and property certification suite
//
// Exit codes: 0 success, 1 configuration error, 2 infeasible-everywhere
// outcome, 3 internal failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <pzbeam/report.hpp>

namespace {

using namespace pzbeam;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (JSON)");
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "override the scenario rng seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--workers", args.workers, "worker threads for sweeps (default: cores)");
    cmd->add_option("--format", args.format, "output format (csv)");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = args.config_path.empty() ? ExperimentConfig{} : load_config(args.config_path);
    if (args.seed_set) cfg.scenario.rng_seed = args.seed;
    if (args.format != "csv") throw ConfigError("unsupported output format '" + args.format + "'");
    return cfg;
}

int effective_workers(const CommonArgs& args) {
    if (args.workers > 0) return args.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

std::filesystem::path prepare_out(const CommonArgs& args) {
    std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct Deployment {
    Scenario scenario;
    InterferenceCoupling coupling;
    ArrayBank arrays;
    Deployment(const ExperimentConfig& cfg)
        : scenario(build_scenario(cfg)),
          coupling(coupling_table(scenario)),
          arrays(scenario, cfg.array) {}
};

std::vector<int> resolve_zone(const ExperimentConfig& cfg, const Scenario& sc) {
    if (cfg.zone_cells.empty()) {
        std::vector<int> all(static_cast<std::size_t>(sc.cell_count()));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    std::vector<int> out;
    for (auto [i, j] : cfg.zone_cells) {
        int found = -1;
        for (int c = 0; c < sc.cell_count(); ++c)
            if (sc.cells[static_cast<std::size_t>(c)].i == i &&
                sc.cells[static_cast<std::size_t>(c)].j == j)
                found = c;
        if (found < 0) throw ConfigError("zone cell (" + std::to_string(i) + "," +
                                         std::to_string(j) + ") is not in the candidate grid");
        out.push_back(found);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_summary(const std::filesystem::path& dir, double threshold_dbm,
                   const std::string& scheme, const DesignOutcome& res) {
    CsvWriter csv((dir / "summary.csv").string());
    csv.header({"threshold_dbm", "scheme", "privacy_bits", "sum_rate", "active_links",
                "certified"});
    csv.row({CsvWriter::num(threshold_dbm), scheme, CsvWriter::num(res.privacy_bits),
             CsvWriter::num(res.sum_rate),
             CsvWriter::num(static_cast<int>(std::count(res.active.begin(), res.active.end(), 1))),
             CsvWriter::num(res.certificate ? 1 : 0)});
}

void write_links(const std::filesystem::path& dir, const Scenario& sc,
                 const ChannelRealization& ch, const DesignOutcome& res) {
    CsvWriter csv((dir / "links.csv").string());
    csv.header({"link", "st", "active", "power_w", "rate_bps_hz"});
    for (int l = 0; l < sc.link_count(); ++l) {
        const bool on = res.active[static_cast<std::size_t>(l)] != 0;
        csv.row({CsvWriter::num(l), CsvWriter::num(sc.st_of_link(l)), CsvWriter::num(on ? 1 : 0),
                 CsvWriter::num(on ? res.power_w(l) : 0.0),
                 CsvWriter::num(on ? rate(sc, ch, res.w, l, &res.active) : 0.0)});
    }
}

void write_zone(const std::filesystem::path& dir, const Scenario& sc,
                const std::vector<int>& member_cells, const std::vector<double>* interference) {
    CsvWriter csv((dir / "zone.csv").string());
    csv.header({"cell_i", "cell_j", "member", "interference_w"});
    std::vector<double> itf(static_cast<std::size_t>(sc.cell_count()), 0.0);
    std::vector<int> member(static_cast<std::size_t>(sc.cell_count()), 0);
    for (std::size_t z = 0; z < member_cells.size(); ++z) {
        member[static_cast<std::size_t>(member_cells[z])] = 1;
        if (interference) itf[static_cast<std::size_t>(member_cells[z])] = (*interference)[z];
    }
    for (int c = 0; c < sc.cell_count(); ++c)
        csv.row({CsvWriter::num(sc.cells[static_cast<std::size_t>(c)].i),
                 CsvWriter::num(sc.cells[static_cast<std::size_t>(c)].j), CsvWriter::num(member[c]),
                 CsvWriter::num(itf[static_cast<std::size_t>(c)])});
}

int run_throughput(const ExperimentConfig& cfg, const CommonArgs& args) {
    auto dir = prepare_out(args);
    Deployment dep(cfg);
    ChannelRealization ch = draw_channels(dep.scenario, 0);
    PrivacyZone zone;
    zone.threshold_dbm = cfg.threshold_dbm;
    zone.cells = resolve_zone(cfg, dep.scenario);
    AOConfig ao = AOConfig::from(cfg.algorithm);
    DesignOutcome res = algorithm1(dep.scenario, ch, dep.coupling, dep.arrays, zone, ao);
    write_summary(dir, cfg.threshold_dbm, "proposed", res);
    write_links(dir, dep.scenario, ch, res);
    write_zone(dir, dep.scenario, res.zone_cells, nullptr);
    write_manifest((dir / "manifest.json").string(),
                   make_manifest(cfg, "throughput", effective_workers(args)));
    return res.all_excluded ? 2 : 0;
}

int run_privacy(const ExperimentConfig& cfg, const CommonArgs& args) {
    auto dir = prepare_out(args);
    Deployment dep(cfg);
    AOConfig ao = AOConfig::from(cfg.algorithm);
    StepOneResult s1 =
        step1_zone_design(dep.scenario, dep.coupling, dep.arrays, cfg.threshold_dbm, ao);
    ChannelRealization ch = draw_channels(dep.scenario, 0);
    DesignOutcome res = step2_beamforming(dep.scenario, ch, dep.coupling, dep.arrays, s1, ao);
    write_summary(dir, cfg.threshold_dbm, "proposed", res);
    write_links(dir, dep.scenario, ch, res);
    write_zone(dir, dep.scenario, s1.zone.cells, &s1.zone.certified_interference_w);
    write_manifest((dir / "manifest.json").string(),
                   make_manifest(cfg, "privacy", effective_workers(args)));
    return s1.zone.empty() ? 2 : 0;
}

int run_baseline(const ExperimentConfig& cfg, const CommonArgs& args, const std::string& mode) {
    auto dir = prepare_out(args);
    Deployment dep(cfg);
    ChannelRealization ch = draw_channels(dep.scenario, 0);
    DesignOutcome res;
    if (mode == "zone") {
        res = mrc_baseline(dep.scenario, ch, dep.coupling, dep.arrays, cfg.threshold_dbm,
                           MrcMode::zone);
    } else if (mode == "throughput") {
        std::vector<int> zone = resolve_zone(cfg, dep.scenario);
        res = mrc_baseline(dep.scenario, ch, dep.coupling, dep.arrays, cfg.threshold_dbm,
                           MrcMode::throughput, &zone);
    } else {
        throw ConfigError("baseline mode must be 'zone' or 'throughput'");
    }
    write_summary(dir, cfg.threshold_dbm, "mrc", res);
    write_links(dir, dep.scenario, ch, res);
    write_zone(dir, dep.scenario, res.zone_cells, nullptr);
    write_manifest((dir / "manifest.json").string(),
                   make_manifest(cfg, "baseline-" + mode, effective_workers(args)));
    const bool infeasible = (mode == "zone" && res.privacy_bits == 0.0) ||
                            (mode == "throughput" && res.all_excluded);
    return infeasible ? 2 : 0;
}

int run_sweep_cmd(const ExperimentConfig& cfg, const CommonArgs& args) {
    if (!cfg.has_sweep) throw ConfigError("sweep subcommand needs a 'sweep' config section");
    auto dir = prepare_out(args);
    SweepSpec spec = SweepSpec::from(cfg.sweep);
    std::vector<SweepRow> rows = run_sweep(cfg, spec, effective_workers(args));
    write_sweep_csv((dir / "sweep.csv").string(), spec.parameter, rows);
    write_sweep_summary_csv((dir / "sweep_summary.csv").string(), spec.parameter, rows);
    write_manifest((dir / "manifest.json").string(),
                   make_manifest(cfg, "sweep", effective_workers(args)));
    bool any_alive = false;
    for (const auto& r : rows)
        if (r.privacy_bits > 0.0 || r.active_links > 0) any_alive = true;
    return any_alive ? 0 : 2;
}

int run_validate(const ExperimentConfig& cfg, const CommonArgs& args) {
    auto dir = prepare_out(args);
    std::vector<CheckRow> rows = run_validation_suite(cfg.scenario.rng_seed);
    CsvWriter csv((dir / "validation_report.csv").string());
    csv.header({"name", "status", "measured", "bound"});
    bool all_pass = true;
    for (const auto& r : rows) {
        csv.row({r.name, r.pass ? "pass" : "fail", CsvWriter::num(r.measured),
                 CsvWriter::num(r.bound)});
        if (!r.pass) {
            all_pass = false;
            std::cerr << "validation check failed: " << r.name << " measured=" << r.measured
                      << " bound=" << r.bound << "\n";
        }
    }
    write_manifest((dir / "manifest.json").string(),
                   make_manifest(cfg, "validate", effective_workers(args)));
    return all_pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-zone aware beamforming experiment runner"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string baseline_mode = "zone";
    auto* c_thr = app.add_subcommand("throughput", "rate maximization on a given privacy zone");
    auto* c_priv = app.add_subcommand("privacy", "two-step privacy-zone design");
    auto* c_base = app.add_subcommand("baseline", "MRC reference scheme");
    auto* c_sweep = app.add_subcommand("sweep", "parameter sweep");
    auto* c_val = app.add_subcommand("validate", "oracle and property suite");
    for (auto* cmd : {c_thr, c_priv, c_base, c_sweep, c_val}) add_common(cmd, args);
    c_base->add_option("--mode", baseline_mode, "zone | throughput");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        ExperimentConfig cfg = load(args);
        if (c_thr->parsed()) return run_throughput(cfg, args);
        if (c_priv->parsed()) return run_privacy(cfg, args);
        if (c_base->parsed()) return run_baseline(cfg, args, baseline_mode);
        if (c_sweep->parsed()) return run_sweep_cmd(cfg, args);
        if (c_val->parsed()) return run_validate(cfg, args);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const pzbeam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
