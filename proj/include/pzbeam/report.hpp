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
// Experiment runner: sweeps, CSV emission and run manifests. CSV uses
// comma-separated fields, a header row, LF endings and locale-independent
// numeric formatting with 9 significant digits, so identical runs produce
// identical bytes.

#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pzbeam/algorithms.hpp"
#include "pzbeam/validation.hpp"

namespace pzbeam {

inline std::string format_g9(double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
    }
    void header(const std::vector<std::string>& cols) { line(cols); }
    void row(const std::vector<std::string>& cells) { line(cells); }
    static std::string num(double v) { return format_g9(v); }
    static std::string num(int v) { return std::to_string(v); }

  private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// sweep engine

struct SweepSpec {
    std::string parameter; // threshold_dbm | node_count | ez_radius | r_ratio | n_re | zone_size
    std::vector<double> values;
    int realizations = 10;
    std::string scheme = "both"; // proposed | mrc | both

    static SweepSpec from(const SweepConfig& c) {
        SweepSpec s;
        s.parameter = c.parameter;
        s.values = c.values;
        s.realizations = c.realizations;
        s.scheme = c.scheme;
        if (s.values.empty()) throw ConfigError("sweep value list must be nonempty");
        if (s.realizations < 1) throw ConfigError("sweep realizations must be >= 1");
        return s;
    }
};

struct SweepRow {
    double value = 0.0;
    std::string scheme;
    int realization = 0;
    double privacy_bits = 0.0;
    double sum_rate = 0.0;
    int active_links = 0;
    int cutoff_flag = 0;
};

namespace detail_sweep {

struct PointContext {
    ExperimentConfig cfg;
    std::shared_ptr<const Scenario> scenario;
    std::shared_ptr<const InterferenceCoupling> coupling;
    std::shared_ptr<const ArrayBank> arrays;
    std::vector<int> zone_cells; // for zone_size / throughput-style sweeps
};

inline ExperimentConfig apply_parameter(ExperimentConfig cfg, const std::string& param,
                                        double value) {
    if (param == "threshold_dbm") {
        cfg.threshold_dbm = value;
    } else if (param == "node_count") {
        const int per_st = std::max(1, static_cast<int>(std::llround(value)) / cfg.scenario.st_count);
        cfg.scenario.srs_per_st = per_st;
    } else if (param == "ez_radius") {
        cfg.scenario.ez_radius_km = value;
    } else if (param == "r_ratio") {
        cfg.array.r_ratio = value;
    } else if (param == "n_re") {
        cfg.algorithm.n_re = static_cast<int>(std::llround(value));
    } else if (param == "zone_size") {
        // zone selected below, once the scenario exists
    } else {
        throw ConfigError("unknown sweep parameter '" + param + "'");
    }
    return cfg;
}

// The `zone_size` sweep uses the cells closest to the EZ center.
inline std::vector<int> central_cells(const Scenario& sc, int count) {
    std::vector<int> order(static_cast<std::size_t>(sc.cell_count()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = distance_km(sc.cells[static_cast<std::size_t>(a)].center, sc.ez_center);
        const double db = distance_km(sc.cells[static_cast<std::size_t>(b)].center, sc.ez_center);
        return da < db;
    });
    order.resize(static_cast<std::size_t>(std::min(count, sc.cell_count())));
    std::sort(order.begin(), order.end());
    return order;
}

inline PointContext make_point(const ExperimentConfig& base, const std::string& param,
                               double value) {
    PointContext p;
    p.cfg = apply_parameter(base, param, value);
    p.scenario = std::make_shared<Scenario>(build_scenario(p.cfg));
    p.coupling = std::make_shared<InterferenceCoupling>(coupling_table(*p.scenario));
    p.arrays = std::make_shared<ArrayBank>(*p.scenario, p.cfg.array);
    if (param == "zone_size")
        p.zone_cells = central_cells(*p.scenario, static_cast<int>(std::llround(value)));
    return p;
}

} // namespace detail_sweep

// Runs a sweep and returns rows sorted by (value index, scheme, realization).
// The per-point proposed scheme is the two-step zone design for privacy-type
// sweeps and the rate-maximization algorithm for zone_size sweeps; the MRC
// baseline runs in the matching mode. Selections certified at one threshold
// stay valid at any looser one, so threshold sweeps reuse the best certified
// selection found so far (evaluated in ascending threshold order).
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const SweepSpec& spec,
                                       int workers = 1) {
    const bool want_proposed = spec.scheme == "proposed" || spec.scheme == "both";
    const bool want_mrc = spec.scheme == "mrc" || spec.scheme == "both";
    const bool zone_sweep = spec.parameter == "zone_size";

    std::vector<detail_sweep::PointContext> points;
    for (double v : spec.values)
        points.push_back(detail_sweep::make_point(base, spec.parameter, v));

    // threshold sweeps: evaluate step-1 selections in ascending-threshold
    // order and keep the best certified zone per point (monotone by
    // construction: a selection feasible at T also certifies at T' >= T).
    std::vector<StepOneResult> step1_results(points.size());
    if (want_proposed && !zone_sweep) {
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        if (spec.parameter == "threshold_dbm")
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return spec.values[a] < spec.values[b];
            });
        StepOneResult carry;
        bool have_carry = false;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const std::size_t i = order[oi];
            const auto& pt = points[i];
            AOConfig ao = AOConfig::from(pt.cfg.algorithm);
            StepOneResult res =
                step1_zone_design(*pt.scenario, *pt.coupling, *pt.arrays, pt.cfg.threshold_dbm, ao);
            if (spec.parameter == "threshold_dbm" && have_carry &&
                carry.u.size() == res.u.size()) {
                // retest the carried selection at this threshold
                const double thr = dbm_to_watts(pt.cfg.threshold_dbm);
                Eigen::VectorXd g_low(pt.scenario->link_count());
                for (int l = 0; l < pt.scenario->link_count(); ++l)
                    g_low(l) = pt.arrays->of_link(*pt.scenario, l).limited_bound();
                PrivacyZone alt;
                alt.threshold_dbm = pt.cfg.threshold_dbm;
                for (int c = 0; c < pt.scenario->cell_count(); ++c) {
                    double acc = 0.0;
                    for (int l = 0; l < pt.scenario->link_count(); ++l)
                        if (carry.u[static_cast<std::size_t>(l)])
                            acc += pt.coupling->loss(*pt.scenario, l, c) * g_low(l) * carry.p(l);
                    if (acc <= thr * (1.0 + 1e-9)) {
                        alt.cells.push_back(c);
                        alt.certified_interference_w.push_back(acc);
                    }
                }
                if (alt.cells.size() > res.zone.cells.size()) {
                    res.zone = std::move(alt);
                    res.u = carry.u;
                    res.p = carry.p;
                }
            }
            if (!res.zone.empty()) {
                carry = res;
                have_carry = true;
            }
            step1_results[i] = std::move(res);
        }
    }

    struct Task {
        std::size_t point;
        int realization;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int r = 0; r < spec.realizations; ++r) tasks.push_back({i, r});

    std::vector<std::vector<SweepRow>> results(tasks.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t ti;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= tasks.size()) return;
                ti = next++;
            }
            const Task& task = tasks[ti];
            const auto& pt = points[task.point];
            const Scenario& sc = *pt.scenario;
            AOConfig ao = AOConfig::from(pt.cfg.algorithm);
            const ChannelRealization ch = draw_channels(sc, static_cast<std::uint64_t>(task.realization));
            std::vector<SweepRow>& out = results[ti];
            const double value = spec.values[task.point];
            if (zone_sweep) {
                PrivacyZone zone;
                zone.threshold_dbm = pt.cfg.threshold_dbm;
                zone.cells = pt.zone_cells;
                if (want_proposed) {
                    DesignOutcome res = algorithm1(sc, ch, *pt.coupling, *pt.arrays, zone, ao);
                    out.push_back({value, "proposed", task.realization, entropy(zone), res.sum_rate,
                                   static_cast<int>(std::count(res.active.begin(), res.active.end(), 1)),
                                   0});
                }
                if (want_mrc) {
                    DesignOutcome res = mrc_baseline(sc, ch, *pt.coupling, *pt.arrays,
                                                     pt.cfg.threshold_dbm, MrcMode::throughput,
                                                     &zone.cells);
                    out.push_back({value, "mrc", task.realization, entropy(zone), res.sum_rate,
                                   static_cast<int>(std::count(res.active.begin(), res.active.end(), 1)),
                                   0});
                }
            } else {
                if (want_proposed) {
                    const StepOneResult& s1 = step1_results[task.point];
                    DesignOutcome res = step2_beamforming(sc, ch, *pt.coupling, *pt.arrays, s1, ao);
                    out.push_back({value, "proposed", task.realization, entropy(s1.zone),
                                   res.sum_rate,
                                   static_cast<int>(std::count(res.active.begin(), res.active.end(), 1)),
                                   0});
                }
                if (want_mrc) {
                    DesignOutcome res = mrc_baseline(sc, ch, *pt.coupling, *pt.arrays,
                                                     pt.cfg.threshold_dbm, MrcMode::zone);
                    out.push_back({value, "mrc", task.realization, res.privacy_bits, res.sum_rate,
                                   static_cast<int>(std::count(res.active.begin(), res.active.end(), 1)),
                                   0});
                }
            }
        }
    };
    const int nthreads = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<SweepRow> rows;
    for (auto& rset : results)
        for (auto& r : rset) rows.push_back(std::move(r));
    std::stable_sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        return a.realization < b.realization;
    });

    // cutoff flag: the smallest swept threshold with nonzero privacy, per scheme
    if (spec.parameter == "threshold_dbm") {
        for (const char* scheme : {"mrc", "proposed"}) {
            double cutoff = std::numeric_limits<double>::infinity();
            for (const auto& r : rows)
                if (r.scheme == scheme && r.privacy_bits > 0.0) cutoff = std::min(cutoff, r.value);
            for (auto& r : rows)
                if (r.scheme == scheme && r.value == cutoff) r.cutoff_flag = 1;
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::string& path, const std::string& parameter,
                            const std::vector<SweepRow>& rows) {
    CsvWriter csv(path);
    csv.header({parameter, "scheme", "privacy_bits", "sum_rate", "active_links", "cutoff_flag"});
    for (const auto& r : rows)
        csv.row({CsvWriter::num(r.value), r.scheme, CsvWriter::num(r.privacy_bits),
                 CsvWriter::num(r.sum_rate), CsvWriter::num(r.active_links),
                 CsvWriter::num(r.cutoff_flag)});
}

inline void write_sweep_summary_csv(const std::string& path, const std::string& parameter,
                                    const std::vector<SweepRow>& rows) {
    struct Agg {
        int n = 0;
        double p_sum = 0, p_min = 1e300, p_max = -1e300;
        double r_sum = 0, r_min = 1e300, r_max = -1e300;
    };
    std::vector<std::pair<std::pair<double, std::string>, Agg>> groups;
    for (const auto& r : rows) {
        auto key = std::make_pair(r.value, r.scheme);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        Agg& a = it->second;
        ++a.n;
        a.p_sum += r.privacy_bits;
        a.p_min = std::min(a.p_min, r.privacy_bits);
        a.p_max = std::max(a.p_max, r.privacy_bits);
        a.r_sum += r.sum_rate;
        a.r_min = std::min(a.r_min, r.sum_rate);
        a.r_max = std::max(a.r_max, r.sum_rate);
    }
    CsvWriter csv(path);
    csv.header({parameter, "scheme", "realizations", "privacy_mean", "privacy_min", "privacy_max",
                "sum_rate_mean", "sum_rate_min", "sum_rate_max"});
    for (const auto& [key, a] : groups)
        csv.row({CsvWriter::num(key.first), key.second, CsvWriter::num(a.n),
                 CsvWriter::num(a.p_sum / a.n), CsvWriter::num(a.p_min), CsvWriter::num(a.p_max),
                 CsvWriter::num(a.r_sum / a.n), CsvWriter::num(a.r_min), CsvWriter::num(a.r_max)});
}

// ---------------------------------------------------------------------------
// manifests

inline nlohmann::json make_manifest(const ExperimentConfig& cfg, const std::string& subcommand,
                                    int workers) {
    nlohmann::json j = config_to_json(cfg);
    j["run"] = {{"subcommand", subcommand}, {"workers", workers}, {"format", "csv"}};
    return j;
}

inline void write_manifest(const std::string& path, const nlohmann::json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << manifest.dump(2) << '\n';
}

} // namespace pzbeam
