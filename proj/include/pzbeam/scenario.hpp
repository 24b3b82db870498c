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

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pzbeam/config.hpp"
#include "pzbeam/units.hpp"

namespace pzbeam {

struct Point2 {
    double x = 0.0; // km
    double y = 0.0; // km
};

inline double distance_km(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Radio constants shared by the whole deployment. Loss terms in dB, noise in
// dBm; the antenna efficiency is a plain ratio in (0, 1].
struct RadioConstants {
    double carrier_frequency_hz = 3.5e9;
    double tx_insertion_loss_db = 2.0;
    double rx_insertion_loss_db = 2.0;
    double fdr_db = 1.0;
    double antenna_efficiency = 0.9;
    double noise_power_dbm = -94.0;
    double pathloss_exponent_su = 3.6;
    double su_reference_loss_db = 43.3;

    double noise_power_w() const { return dbm_to_watts(noise_power_dbm); }
};

struct StRecord {
    Point2 position;      // km
    double axis_angle;    // radians, direction of the ULA axis in the plane
    int antenna_count = 8;
    double power_budget_w = 0.0;
    double p_min_w = 0.0;
    double p_max_w = 0.0;
};

struct SrRecord {
    Point2 position; // km
    int st = 0;      // serving transmitter
    double min_rate = 0.5; // bit/s/Hz
};

struct Cell {
    int i = 0, j = 0;
    Point2 center;   // km
    double side_km = 0.0;
};

// Immutable physical deployment. Links are the (st, sr) serving pairs,
// flattened in st-major order.
struct Scenario {
    double region_side_km = 0.0;
    Point2 ez_center;
    double ez_radius_km = 0.0;
    std::vector<StRecord> sts;
    std::vector<SrRecord> srs;            // global SR list, st-major
    std::vector<Cell> cells;              // candidate privacy-zone grid
    RadioConstants constants;
    std::uint64_t rng_seed = 0;

    int link_count() const { return static_cast<int>(srs.size()); }
    int st_of_link(int link) const { return srs[static_cast<std::size_t>(link)].st; }
    int cell_count() const { return static_cast<int>(cells.size()); }

    std::vector<int> links_of_st(int st) const {
        std::vector<int> out;
        for (int l = 0; l < link_count(); ++l)
            if (st_of_link(l) == st) out.push_back(l);
        return out;
    }
};

// One small-scale fading draw: channel vectors from every ST to every SR
// (the inter-cell interference terms need the cross pairs, not just the
// serving links). h(tx_st, sr) has length sts[tx_st].antenna_count.
struct ChannelRealization {
    int st_count = 0;
    int sr_count = 0;
    std::uint64_t t = 0;
    std::vector<Eigen::VectorXcd> h;     // index tx_st * sr_count + sr
    std::vector<double> beta;            // same indexing, linear power ratio

    const Eigen::VectorXcd& channel(int tx_st, int sr) const {
        return h[static_cast<std::size_t>(tx_st) * sr_count + sr];
    }
    double large_scale(int tx_st, int sr) const {
        return beta[static_cast<std::size_t>(tx_st) * sr_count + sr];
    }
    // Serving-link channel for link index l in a scenario with st-major links.
    const Eigen::VectorXcd& serving(const Scenario& sc, int link) const {
        return channel(sc.st_of_link(link), link);
    }
};

// ST-to-cell propagation: linear coupling loss (Watt received per Watt
// radiated toward the cell) and the departure angle from the array axis.
// Both depend on the transmitter only, so they are stored per (st, cell)
// and exposed per link.
struct InterferenceCoupling {
    int st_count = 0;
    int cell_count = 0;
    std::vector<double> loss_table;   // st * cell_count + cell
    std::vector<double> theta_table;  // radians in [0, pi]

    double loss_st(int st, int cell) const {
        return loss_table[static_cast<std::size_t>(st) * cell_count + cell];
    }
    double theta_st(int st, int cell) const {
        return theta_table[static_cast<std::size_t>(st) * cell_count + cell];
    }
    double loss(const Scenario& sc, int link, int cell) const {
        return loss_st(sc.st_of_link(link), cell);
    }
    double theta(const Scenario& sc, int link, int cell) const {
        return theta_st(sc.st_of_link(link), cell);
    }
};

namespace detail {

// splitmix64, used to derive independent substreams from (seed, key...).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) {
    return mix64(mix64(mix64(seed ^ 0x5bf0363546290fd1ULL) ^ a) ^ mix64(b)) ^ mix64(c);
}

} // namespace detail

// Free-space propagation loss in dB for distance in km and frequency in MHz.
inline double free_space_loss_db(double d_km, double f_mhz) {
    if (!(d_km > 0.0)) throw std::invalid_argument("free_space_loss_db: distance must be > 0");
    return 20.0 * std::log10(d_km) + 20.0 * std::log10(f_mhz) + 32.45;
}

// SU-link pathloss in dB at d meters: reference loss at 1 m plus the
// log-distance term with the configured exponent.
inline double su_pathloss_db(const RadioConstants& rc, double d_m) {
    if (!(d_m > 0.0)) throw std::invalid_argument("su_pathloss_db: distance must be > 0");
    return rc.su_reference_loss_db + 10.0 * rc.pathloss_exponent_su * std::log10(d_m);
}

inline Scenario build_scenario(const ExperimentConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto& rc = cfg.radio;
    if (sc.st_count < 1 || sc.srs_per_st < 1) throw ConfigError("st_count and srs_per_st must be positive");
    if (sc.grid_dim < 1) throw ConfigError("grid_dim must be positive");
    if (sc.antenna_count < 1) throw ConfigError("antenna_count must be positive");
    if (!(rc.antenna_efficiency > 0.0 && rc.antenna_efficiency <= 1.0))
        throw ConfigError("antenna_efficiency must lie in (0, 1]");
    if (sc.p_min_dbm > sc.p_max_dbm) throw ConfigError("p_min_dbm must not exceed p_max_dbm");
    if (sc.ez_radius_km * 2.0 > sc.region_side_km) throw ConfigError("EZ does not fit in the region");

    Scenario out;
    out.region_side_km = sc.region_side_km;
    out.ez_center = {sc.ez_center_x_km, sc.ez_center_y_km};
    out.ez_radius_km = sc.ez_radius_km;
    out.rng_seed = sc.rng_seed;
    out.constants = {rc.carrier_frequency_hz, rc.tx_insertion_loss_db, rc.rx_insertion_loss_db,
                     rc.fdr_db, rc.antenna_efficiency, rc.noise_power_dbm,
                     rc.pathloss_exponent_su, rc.su_reference_loss_db};

    // STs sit just outside the EZ boundary, equally spaced on a ring, with
    // the array axis tangent to the EZ circle (broadside facing the zone).
    const double ring = sc.ez_radius_km * 1.005;
    const double coverage_km = sc.coverage_radius_m / 1000.0;
    if (ring + coverage_km > sc.region_side_km / 2.0)
        throw ConfigError("ST ring does not fit in the region");
    for (int m = 0; m < sc.st_count; ++m) {
        const double ang = 2.0 * M_PI * m / sc.st_count;
        StRecord st;
        st.position = {out.ez_center.x + ring * std::cos(ang),
                       out.ez_center.y + ring * std::sin(ang)};
        st.axis_angle = ang + M_PI / 2.0;
        st.antenna_count = sc.antenna_count;
        st.power_budget_w = dbm_to_watts(sc.power_budget_dbm);
        st.p_min_w = dbm_to_watts(sc.p_min_dbm);
        st.p_max_w = dbm_to_watts(sc.p_max_dbm);
        out.sts.push_back(st);
    }

    // SR placement per (st, index) substream, so adding SRs keeps existing
    // ones in place across node-count sweeps.
    for (int m = 0; m < sc.st_count; ++m) {
        for (int n = 0; n < sc.srs_per_st; ++n) {
            std::mt19937_64 eng(detail::substream(sc.rng_seed, 0x51, m, n));
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            const double r = coverage_km * std::sqrt(uni(eng));
            const double a = 2.0 * M_PI * uni(eng);
            SrRecord sr;
            sr.st = m;
            sr.position = {out.sts[m].position.x + r * std::cos(a),
                           out.sts[m].position.y + r * std::sin(a)};
            sr.min_rate = sc.min_rate_bps_hz;
            out.srs.push_back(sr);
        }
    }

    // Candidate grid centered in the EZ; every cell center must fall
    // strictly inside the EZ disk.
    const double half = (sc.grid_dim - 1) / 2.0;
    for (int i = 0; i < sc.grid_dim; ++i) {
        for (int j = 0; j < sc.grid_dim; ++j) {
            Cell c;
            c.i = i;
            c.j = j;
            c.side_km = sc.cell_side_km;
            c.center = {out.ez_center.x + (i - half) * sc.cell_side_km,
                        out.ez_center.y + (j - half) * sc.cell_side_km};
            if (distance_km(c.center, out.ez_center) >= sc.ez_radius_km)
                throw ConfigError("candidate grid does not fit inside the EZ");
            out.cells.push_back(c);
        }
    }
    for (const auto& st : out.sts)
        if (distance_km(st.position, out.ez_center) <= sc.ez_radius_km)
            throw ConfigError("ST placed inside the EZ");
    return out;
}

// Rayleigh small-scale fading on top of log-distance large-scale loss.
// Deterministic given (scenario seed, t); each (tx, rx) pair has its own
// substream so realizations are stable under node-count changes.
inline ChannelRealization draw_channels(const Scenario& sc, std::uint64_t t) {
    ChannelRealization out;
    out.st_count = static_cast<int>(sc.sts.size());
    out.sr_count = sc.link_count();
    out.t = t;
    out.h.resize(static_cast<std::size_t>(out.st_count) * out.sr_count);
    out.beta.resize(out.h.size());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < out.st_count; ++m) {
        const int k = sc.sts[m].antenna_count;
        for (int r = 0; r < out.sr_count; ++r) {
            const double d_m = distance_km(sc.sts[m].position, sc.srs[r].position) * 1000.0;
            if (!(d_m > 0.0)) throw std::invalid_argument("draw_channels: zero ST-SR distance");
            const double beta = db_to_linear(-su_pathloss_db(sc.constants, d_m));
            std::mt19937_64 eng(detail::substream(sc.rng_seed ^ detail::mix64(t + 1), 0x7c, m, r));
            std::normal_distribution<double> gauss(0.0, 1.0);
            Eigen::VectorXcd v(k);
            const double s = std::sqrt(beta);
            for (int q = 0; q < k; ++q) {
                const double re = gauss(eng);
                const double im = gauss(eng);
                v(q) = std::complex<double>(s * re * inv_sqrt2, s * im * inv_sqrt2);
            }
            out.h[static_cast<std::size_t>(m) * out.sr_count + r] = std::move(v);
            out.beta[static_cast<std::size_t>(m) * out.sr_count + r] = beta;
        }
    }
    return out;
}

// ST-to-cell coupling under the free-space interference budget: propagation
// loss plus insertion losses and frequency dependent rejection, evaluated at
// the cell center. Departure angles are measured from the array axis and
// folded into [0, pi].
inline InterferenceCoupling coupling_table(const Scenario& sc) {
    InterferenceCoupling out;
    out.st_count = static_cast<int>(sc.sts.size());
    out.cell_count = sc.cell_count();
    out.loss_table.resize(static_cast<std::size_t>(out.st_count) * out.cell_count);
    out.theta_table.resize(out.loss_table.size());
    const auto& rc = sc.constants;
    const double f_mhz = rc.carrier_frequency_hz / 1e6;
    const double extra = rc.tx_insertion_loss_db + rc.rx_insertion_loss_db + rc.fdr_db;
    for (int m = 0; m < out.st_count; ++m) {
        const auto& st = sc.sts[m];
        const double ax = std::cos(st.axis_angle);
        const double ay = std::sin(st.axis_angle);
        for (int c = 0; c < out.cell_count; ++c) {
            const auto& cell = sc.cells[static_cast<std::size_t>(c)];
            const double d = distance_km(st.position, cell.center);
            if (!(d > 0.0))
                throw std::invalid_argument("coupling_table: cell center coincides with an ST");
            const double loss_db = free_space_loss_db(d, f_mhz) + extra;
            out.loss_table[static_cast<std::size_t>(m) * out.cell_count + c] =
                db_to_linear(-loss_db);
            const double dx = (cell.center.x - st.position.x) / d;
            const double dy = (cell.center.y - st.position.y) / d;
            const double ct = std::clamp(ax * dx + ay * dy, -1.0, 1.0);
            out.theta_table[static_cast<std::size_t>(m) * out.cell_count + c] = std::acos(ct);
        }
    }
    return out;
}

} // namespace pzbeam
