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
// Top-level procedures: alternating optimization for sum rate under a given
// privacy zone, the two-step privacy-zone maximization, the MRC baseline,
// and binary recovery with exact recertification. Every reported metric is
// recomputed from exact formulas after rounding; the relaxed machinery only
// steers the search.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pzbeam/assemble.hpp"
#include "pzbeam/convex.hpp"
#include "pzbeam/scenario.hpp"
#include "pzbeam/surrogate.hpp"
#include "pzbeam/units.hpp"

namespace pzbeam {

struct AOConfig {
    int max_outer = 20;
    int sca_passes = 4;
    double tolerance = 1e-3; // relative objective delta between outer iterations
    double eta = -1e4;
    double xi = -1e4;
    int n_re = 10;
    double rounding_threshold = 0.5;
    int restoration_retries = 1000;
    bool polish = true;
    SolveTolerances solver;

    AOConfig() {
        // Inner relaxations only steer the search; exactness comes from the
        // final certificates. A looser stationarity target avoids long
        // polishing on the degenerate faces these programs produce.
        solver.stat = 1e-3;
    }

    static AOConfig from(const AlgorithmConfig& c) {
        AOConfig out;
        out.max_outer = c.max_outer_iterations;
        out.sca_passes = c.sca_iterations;
        out.tolerance = c.tolerance;
        out.eta = c.eta;
        out.xi = c.xi;
        out.n_re = c.n_re;
        out.rounding_threshold = c.rounding_threshold;
        out.restoration_retries = c.restoration_retries;
        out.polish = c.polish;
        return out;
    }
};

struct PrivacyZone {
    std::vector<int> cells; // indices into Scenario::cells
    std::vector<double> certified_interference_w;
    double threshold_dbm = 0.0;

    double threshold_w() const { return dbm_to_watts(threshold_dbm); }
    bool empty() const { return cells.empty(); }
};

/// Entropy of the privacy zone in bits: log2 of the member-cell count,
/// zero for an empty zone (the outage convention).
inline double entropy(const PrivacyZone& zone) {
    return zone.cells.empty() ? 0.0 : std::log2(static_cast<double>(zone.cells.size()));
}

struct CertificateReport {
    bool ok = false;
    double worst_cell_interference_w = 0.0;
    double worst_rate_deficit = 0.0;  // max over active links of r - rate
    double worst_power_overrun = 0.0; // max over STs of (used - budget)/budget
    int floor_deficit = 0;
};

struct DesignOutcome {
    BeamformerSet w;
    std::vector<int> active;     // recovered binary u per link
    std::vector<int> zone_cells; // certified v
    Eigen::VectorXd power_w;     // realized |w|^2 for active links, else 0
    double sum_rate = 0.0;
    double privacy_bits = 0.0;
    std::vector<double> objective_trace;
    bool certificate = false;
    CertificateReport cert;
    bool all_excluded = false;
    int outer_iterations = 0;
};

// ---------------------------------------------------------------------------
// exact evaluation helpers

inline Eigen::VectorXd beam_powers(const BeamformerSet& w) {
    Eigen::VectorXd p(static_cast<int>(w.size()));
    for (std::size_t l = 0; l < w.size(); ++l)
        p(static_cast<int>(l)) = w[l].size() ? w[l].squaredNorm() : 0.0;
    return p;
}

inline BeamformerSet mrc_beamformers(const Scenario& sc, const ChannelRealization& ch,
                                     const Eigen::VectorXd& p) {
    BeamformerSet w(static_cast<std::size_t>(sc.link_count()));
    for (int l = 0; l < sc.link_count(); ++l) {
        const Eigen::VectorXcd& h = ch.serving(sc, l);
        w[static_cast<std::size_t>(l)] = std::sqrt(p(l)) * h / h.norm();
    }
    return w;
}

// Per-cell received interference with exact directional gains, for the
// cells listed in `cells`.
inline Eigen::VectorXd exact_cell_interference(const Scenario& sc,
                                               const InterferenceCoupling& coupling,
                                               const ArrayBank& arrays, const BeamformerSet& w,
                                               const std::vector<int>& active,
                                               const std::vector<int>& cells) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<int>(cells.size()));
    for (std::size_t z = 0; z < cells.size(); ++z) {
        double s = 0.0;
        for (int l = 0; l < sc.link_count(); ++l) {
            if (!active[static_cast<std::size_t>(l)] || w[static_cast<std::size_t>(l)].size() == 0)
                continue;
            const auto& wl = w[static_cast<std::size_t>(l)];
            const double pw = wl.squaredNorm();
            if (!(pw > 0.0)) continue;
            const ArrayContext& ctx = arrays.of_link(sc, l);
            const double g = ctx.antenna_gain(wl, coupling.theta(sc, l, cells[z]));
            s += coupling.loss(sc, l, cells[z]) * g * pw;
        }
        out(static_cast<int>(z)) = s;
    }
    return out;
}

// Recomputes every exact constraint from scratch: per-cell interference
// against the threshold, per-active-link rate against its QoS floor,
// per-ST power against the budget, and optionally the exclusion floor.
inline CertificateReport certificate_check(const Scenario& sc, const InterferenceCoupling& coupling,
                                           const ArrayBank& arrays, const ChannelRealization* ch,
                                           const BeamformerSet& w, const std::vector<int>& active,
                                           const std::vector<int>& zone_cells, double threshold_w,
                                           int floor_min_active = -1) {
    constexpr double slack = 1e-9;
    CertificateReport rep;
    const Eigen::VectorXd itf =
        exact_cell_interference(sc, coupling, arrays, w, active, zone_cells);
    rep.worst_cell_interference_w = itf.size() ? itf.maxCoeff() : 0.0;
    bool ok = rep.worst_cell_interference_w <= threshold_w * (1.0 + slack);
    if (ch) {
        for (int l = 0; l < sc.link_count(); ++l) {
            if (!active[static_cast<std::size_t>(l)]) continue;
            const double r = sc.srs[static_cast<std::size_t>(l)].min_rate;
            const double deficit = r - rate(sc, *ch, w, l, &active);
            rep.worst_rate_deficit = std::max(rep.worst_rate_deficit, deficit);
        }
        ok = ok && rep.worst_rate_deficit <= slack;
    }
    for (int m = 0; m < static_cast<int>(sc.sts.size()); ++m) {
        double used = 0.0;
        for (int l : sc.links_of_st(m))
            if (active[static_cast<std::size_t>(l)]) used += w[static_cast<std::size_t>(l)].size()
                                                                ? w[static_cast<std::size_t>(l)].squaredNorm()
                                                                : 0.0;
        const double budget = sc.sts[static_cast<std::size_t>(m)].power_budget_w;
        rep.worst_power_overrun = std::max(rep.worst_power_overrun, (used - budget) / budget);
    }
    ok = ok && rep.worst_power_overrun <= slack;
    if (floor_min_active >= 0) {
        const int n_active = static_cast<int>(
            std::count(active.begin(), active.end(), 1));
        rep.floor_deficit = std::max(0, floor_min_active - n_active);
        ok = ok && rep.floor_deficit == 0;
    }
    rep.ok = ok;
    return rep;
}

namespace detail_ao {

// Common relaxed objective for the rate-maximization AO (the value both
// blocks share at their handoff points, with the exact concave penalty).
inline double common_objective_rate(const Scenario& sc, const ChannelRealization& ch,
                                    const BeamformerSet& w, const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& d, double eta, double xi) {
    double f = 0.0;
    for (int l = 0; l < sc.link_count(); ++l)
        if (u(l) > 1e-12) f += u(l) * rate(sc, ch, w, l);
    f += eta * binary_gap(u);
    for (int i = 0; i < d.size(); ++i) {
        const double h = std::max(0.0, -d(i));
        f += xi * h * h;
    }
    return f;
}

inline double common_objective_zone(const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                                    double eta) {
    const double total = std::max(v.sum(), 1e-12);
    return std::log2(total) + eta * (binary_gap(v) + binary_gap(u));
}

inline std::vector<int> all_ones(int n) { return std::vector<int>(static_cast<std::size_t>(n), 1); }

// Interior-point returns carry O(gap)-level dust off the box bounds; snap
// it so the concave penalty sees true binary values at binary points.
inline Eigen::VectorXd snap_unit(Eigen::VectorXd v, double tol = 1e-5) {
    for (int i = 0; i < v.size(); ++i) {
        if (v(i) < tol)
            v(i) = 0.0;
        else if (v(i) > 1.0 - tol)
            v(i) = 1.0;
    }
    return v;
}

// Deactivates, in place, the active link contributing most at the worst
// violated target; returns false when nothing is active.
inline bool drop_worst_contributor(const Scenario& sc, const InterferenceCoupling& coupling,
                                   const ArrayBank& arrays, const BeamformerSet& w,
                                   std::vector<int>& active, const std::vector<int>& zone_cells,
                                   const Eigen::VectorXd& itf) {
    int worst_cell = -1;
    double worst = -1.0;
    for (int z = 0; z < itf.size(); ++z)
        if (itf(z) > worst) {
            worst = itf(z);
            worst_cell = z;
        }
    if (worst_cell < 0) return false;
    const int cell = zone_cells[static_cast<std::size_t>(worst_cell)];
    int victim = -1;
    double victim_contrib = -1.0;
    for (int l = 0; l < sc.link_count(); ++l) {
        if (!active[static_cast<std::size_t>(l)] || w[static_cast<std::size_t>(l)].size() == 0)
            continue;
        const auto& wl = w[static_cast<std::size_t>(l)];
        const double pw = wl.squaredNorm();
        if (!(pw > 0.0)) continue;
        const double g = arrays.of_link(sc, l).antenna_gain(wl, coupling.theta(sc, l, cell));
        const double contrib = coupling.loss(sc, l, cell) * g * pw;
        if (contrib > victim_contrib) {
            victim_contrib = contrib;
            victim = l;
        }
    }
    if (victim < 0) return false;
    active[static_cast<std::size_t>(victim)] = 0;
    return true;
}

} // namespace detail_ao

// ---------------------------------------------------------------------------
// binary recovery and feasibility restoration

// Rounds the relaxed selections, restores exact feasibility by deactivating
// links in decreasing order of their violation contribution, optionally
// re-solves the beamformers with binaries fixed, and recertifies.
inline DesignOutcome round_and_restore(const Scenario& sc, const ChannelRealization& ch,
                                       const InterferenceCoupling& coupling,
                                       const ArrayBank& arrays, const std::vector<int>& zone_cells,
                                       double threshold_w, const AllocationState& alloc,
                                       const BeamformerSet& w_in, const AOConfig& cfg) {
    DesignOutcome out;
    const int L = sc.link_count();
    out.w = w_in;
    out.active.assign(static_cast<std::size_t>(L), 0);
    for (int l = 0; l < L; ++l)
        out.active[static_cast<std::size_t>(l)] = alloc.u(l) >= cfg.rounding_threshold ? 1 : 0;
    for (int l = 0; l < L; ++l)
        if (!out.active[static_cast<std::size_t>(l)]) out.w[static_cast<std::size_t>(l)].resize(0);

    auto certify = [&]() {
        return certificate_check(sc, coupling, arrays, &ch, out.w, out.active, zone_cells,
                                 threshold_w);
    };
    auto restore = [&]() {
        for (int it = 0; it < cfg.restoration_retries; ++it) {
            CertificateReport rep = certify();
            if (rep.ok) return rep;
            if (rep.worst_cell_interference_w > threshold_w) {
                const Eigen::VectorXd itf =
                    exact_cell_interference(sc, coupling, arrays, out.w, out.active, zone_cells);
                if (!detail_ao::drop_worst_contributor(sc, coupling, arrays, out.w, out.active,
                                                       zone_cells, itf))
                    break;
                continue;
            }
            if (rep.worst_rate_deficit > 1e-9) {
                int victim = -1;
                double worst = -std::numeric_limits<double>::infinity();
                for (int l = 0; l < L; ++l) {
                    if (!out.active[static_cast<std::size_t>(l)]) continue;
                    const double deficit = sc.srs[static_cast<std::size_t>(l)].min_rate -
                                           rate(sc, ch, out.w, l, &out.active);
                    if (deficit > worst) {
                        worst = deficit;
                        victim = l;
                    }
                }
                if (victim < 0) break;
                out.active[static_cast<std::size_t>(victim)] = 0;
                continue;
            }
            // power overrun should not arise (caps are part of every block);
            // drop the weakest link of the offending ST if it ever does
            int victim = -1;
            double worst_rate = std::numeric_limits<double>::infinity();
            for (int l = 0; l < L; ++l) {
                if (!out.active[static_cast<std::size_t>(l)]) continue;
                const double rl = rate(sc, ch, out.w, l, &out.active);
                if (rl < worst_rate) {
                    worst_rate = rl;
                    victim = l;
                }
            }
            if (victim < 0) break;
            out.active[static_cast<std::size_t>(victim)] = 0;
        }
        for (int l = 0; l < L; ++l)
            if (!out.active[static_cast<std::size_t>(l)]) out.w[static_cast<std::size_t>(l)].resize(0);
        return certify();
    };

    for (int l = 0; l < L; ++l)
        if (!out.active[static_cast<std::size_t>(l)]) out.w[static_cast<std::size_t>(l)].resize(0);
    CertificateReport rep = restore();

    // Re-solve the beamformers with the recovered binaries fixed, keep the
    // result only if it stays certified and does not lose rate.
    const int n_active = static_cast<int>(std::count(out.active.begin(), out.active.end(), 1));
    if (cfg.polish && n_active > 0) {
        BeamformerSet w_exp = out.w;
        for (int l = 0; l < L; ++l)
            if (!out.active[static_cast<std::size_t>(l)])
                w_exp[static_cast<std::size_t>(l)].resize(0);
        P12Inputs in;
        in.sc = &sc;
        in.ch = &ch;
        in.coupling = &coupling;
        in.arrays = &arrays;
        in.zone = &zone_cells;
        in.threshold_w = threshold_w;
        in.w_expansion = &w_exp;
        in.u_hat = Eigen::VectorXd::Zero(L);
        in.p_eff = Eigen::VectorXd::Zero(L);
        in.p_cap = Eigen::VectorXd::Ones(L);
        in.d_hat = Eigen::VectorXd::Zero(static_cast<int>(zone_cells.size()));
        in.mask = &out.active;
        for (int l = 0; l < L; ++l) {
            if (!out.active[static_cast<std::size_t>(l)]) continue;
            in.u_hat(l) = 1.0;
            in.p_eff(l) = std::max(alloc.p(l), out.w[static_cast<std::size_t>(l)].squaredNorm());
            in.p_cap(l) = in.p_eff(l);
        }
        try {
            auto [prog, map] = assemble_p12(in);
            Eigen::VectorXd warm = map.pack(out.w);
            SolveReport srep = solve(prog, &warm, cfg.solver);
            if (srep.status != SolveStatus::infeasible) {
                BeamformerSet w_new = map.unpack(srep.x);
                CertificateReport polished = certificate_check(
                    sc, coupling, arrays, &ch, w_new, out.active, zone_cells, threshold_w);
                const double old_rate = sum_rate(sc, ch, out.w, out.active);
                const double new_rate = sum_rate(sc, ch, w_new, out.active);
                if (polished.ok && new_rate >= old_rate) {
                    out.w = std::move(w_new);
                    rep = polished;
                }
            }
        } catch (const std::exception&) {
            // keep the certified pre-polish beamformers
        }
    }

    out.cert = rep;
    out.certificate = rep.ok;
    out.power_w = beam_powers(out.w);
    out.sum_rate = sum_rate(sc, ch, out.w, out.active);
    out.all_excluded =
        std::count(out.active.begin(), out.active.end(), 1) == 0;
    // zone membership recovered from the nonnegative exact slack
    const Eigen::VectorXd itf =
        exact_cell_interference(sc, coupling, arrays, out.w, out.active, zone_cells);
    for (std::size_t z = 0; z < zone_cells.size(); ++z)
        if (itf(static_cast<int>(z)) <= threshold_w * (1.0 + 1e-9))
            out.zone_cells.push_back(zone_cells[z]);
    return out;
}

// ---------------------------------------------------------------------------
// Algorithm 1: sum-rate maximization under a given privacy zone

inline DesignOutcome algorithm1(const Scenario& sc, const ChannelRealization& ch,
                                const InterferenceCoupling& coupling, const ArrayBank& arrays,
                                const PrivacyZone& zone, const AOConfig& cfg) {
    if (zone.empty()) throw std::invalid_argument("algorithm1: zone must be nonempty");
    const int L = sc.link_count();
    const int Z = static_cast<int>(zone.cells.size());
    const double thr = zone.threshold_w();

    AllocationState alloc;
    alloc.p_tilde = Eigen::VectorXd::Zero(L);
    alloc.p.resize(L);
    alloc.u = Eigen::VectorXd::Ones(L);
    for (int l = 0; l < L; ++l) alloc.p(l) = sc.sts[sc.st_of_link(l)].p_min_w;
    BeamformerSet w = mrc_beamformers(sc, ch, alloc.p);

    auto norm_interference = [&](const BeamformerSet& ws, const Eigen::VectorXd& peff) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(Z);
        for (int z = 0; z < Z; ++z) {
            double acc = 0.0;
            for (int l = 0; l < L; ++l) {
                if (!(peff(l) > 0.0)) continue;
                const ArrayContext& ctx = arrays.of_link(sc, l);
                acc += coupling.loss(sc, l, zone.cells[static_cast<std::size_t>(z)]) *
                       ctx.antenna_gain(ws[static_cast<std::size_t>(l)],
                                        coupling.theta(sc, l, zone.cells[static_cast<std::size_t>(z)])) *
                       peff(l);
            }
            s(z) = acc / thr;
        }
        return s;
    };
    auto effective_power = [&](const AllocationState& a) {
        Eigen::VectorXd pe(L);
        for (int l = 0; l < L; ++l)
            pe(l) = a.p_tilde(l) + a.u(l) * sc.sts[sc.st_of_link(l)].p_min_w;
        return pe;
    };
    // initial slack from the actual interference at the start point
    {
        const Eigen::VectorXd s = norm_interference(w, effective_power(alloc));
        alloc.d.resize(Z);
        for (int z = 0; z < Z; ++z) alloc.d(z) = std::clamp(1.0 - s(z), -1.0, 1.0);
    }

    double f_cur = detail_ao::common_objective_rate(sc, ch, w, alloc.u, alloc.d, cfg.eta, cfg.xi);
    DesignOutcome probe;
    std::vector<double> trace{f_cur};
    const double accept_slack = 1e-9;

    int outer = 0;
    for (outer = 1; outer <= cfg.max_outer; ++outer) {
        const double f_outer_start = f_cur;
        // ---- selection/power/slack block --------------------------------
        Eigen::VectorXd rate_hat(L);
        for (int l = 0; l < L; ++l) rate_hat(l) = rate(sc, ch, w, l);
        Eigen::MatrixXd gain_hat(L, Z);
        for (int l = 0; l < L; ++l) {
            const ArrayContext& ctx = arrays.of_link(sc, l);
            for (int z = 0; z < Z; ++z)
                gain_hat(l, z) = ctx.antenna_gain(
                    w[static_cast<std::size_t>(l)],
                    coupling.theta(sc, l, zone.cells[static_cast<std::size_t>(z)]));
        }
        const Eigen::VectorXd wpow = beam_powers(w);
        for (int q = 0; q < cfg.sca_passes; ++q) {
            P11Inputs in;
            in.sc = &sc;
            in.coupling = &coupling;
            in.zone = &zone.cells;
            in.threshold_w = thr;
            in.rate_hat = rate_hat;
            in.gain_hat = gain_hat;
            in.u_expansion = alloc.u;
            in.eta = cfg.eta;
            in.xi = cfg.xi;
            auto [prog, map] = assemble_p11(in);
            // floor p at the current beam power (the shared |w|^2 <= p rows)
            for (int l = 0; l < L; ++l) {
                const double span =
                    std::max(1.0, sc.sts[sc.st_of_link(l)].p_max_w - sc.sts[sc.st_of_link(l)].p_min_w);
                prog.lin_ineq.push_back(LinForm(wpow(l) / span).term(map.var_p[l], -1.0 / span));
            }
            Eigen::VectorXd warm(map.n);
            for (int l = 0; l < L; ++l) {
                warm(map.var_ptilde[l]) = alloc.p_tilde(l);
                warm(map.var_p[l]) = std::max(alloc.p(l), wpow(l));
                warm(map.var_u[l]) = std::clamp(alloc.u(l), 1e-9, 1.0 - 1e-9);
            }
            for (int z = 0; z < Z; ++z) warm(map.var_d[z]) = alloc.d(z);
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            AllocationState cand = alloc;
            for (int l = 0; l < L; ++l) {
                cand.p_tilde(l) = rep.x(map.var_ptilde[l]);
                cand.p(l) = rep.x(map.var_p[l]);
                cand.u(l) = std::clamp(rep.x(map.var_u[l]), 0.0, 1.0);
            }
            for (int z = 0; z < Z; ++z) cand.d(z) = rep.x(map.var_d[z]);
            cand.u = detail_ao::snap_unit(std::move(cand.u));
            const double f_cand =
                detail_ao::common_objective_rate(sc, ch, w, cand.u, cand.d, cfg.eta, cfg.xi);
            if (f_cand < f_cur - accept_slack) break; // solver noise guard
            const double delta = f_cand - f_cur;
            alloc = std::move(cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-4 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);

        // ---- beamformer block --------------------------------------------
        for (int q = 0; q < cfg.sca_passes; ++q) {
            P12Inputs in;
            in.sc = &sc;
            in.ch = &ch;
            in.coupling = &coupling;
            in.arrays = &arrays;
            in.zone = &zone.cells;
            in.threshold_w = thr;
            in.w_expansion = &w;
            in.u_hat = alloc.u;
            in.p_eff = effective_power(alloc);
            in.p_cap = alloc.p.cwiseMax(beam_powers(w));
            in.d_hat = alloc.d;
            in.objective_const =
                cfg.eta * binary_gap(alloc.u) + [&] {
                    double s = 0.0;
                    for (int z = 0; z < Z; ++z) {
                        const double h = std::max(0.0, -alloc.d(z));
                        s += cfg.xi * h * h;
                    }
                    return s;
                }();
            auto [prog, map] = assemble_p12(in);
            Eigen::VectorXd warm = map.pack(w);
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            BeamformerSet cand = map.unpack(rep.x);
            const double f_cand =
                detail_ao::common_objective_rate(sc, ch, cand, alloc.u, alloc.d, cfg.eta, cfg.xi);
            if (f_cand < f_cur - accept_slack) break;
            const double delta = f_cand - f_cur;
            w = std::move(cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-4 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);

        if (std::abs(f_cur - f_outer_start) <= cfg.tolerance * std::max(1.0, std::abs(f_outer_start)))
            break;
    }

    DesignOutcome out =
        round_and_restore(sc, ch, coupling, arrays, zone.cells, thr, alloc, w, cfg);
    out.objective_trace = std::move(trace);
    out.outer_iterations = std::min(outer, cfg.max_outer);
    out.privacy_bits = entropy(zone);
    return out;
}

// ---------------------------------------------------------------------------
// step 1: privacy-zone design from long-term data only (no channels)

struct StepOneResult {
    PrivacyZone zone;
    Eigen::VectorXd p;          // Watts, per link
    std::vector<int> u;         // binary selections
    AllocationState relaxed;    // final relaxed AO state
    std::vector<double> objective_trace;
    int outer_iterations = 0;
};

inline StepOneResult step1_zone_design(const Scenario& sc, const InterferenceCoupling& coupling,
                                       const ArrayBank& arrays, double threshold_dbm,
                                       const AOConfig& cfg) {
    const int L = sc.link_count();
    const int C = sc.cell_count();
    if (C == 0) throw std::invalid_argument("step1_zone_design: empty candidate grid");
    const double thr = dbm_to_watts(threshold_dbm);

    Eigen::VectorXd g_low(L);
    for (int l = 0; l < L; ++l) g_low(l) = arrays.of_link(sc, l).limited_bound();

    AllocationState alloc;
    alloc.p_tilde = Eigen::VectorXd::Zero(L);
    alloc.p.resize(L);
    for (int l = 0; l < L; ++l) alloc.p(l) = sc.sts[sc.st_of_link(l)].p_min_w;
    alloc.u = Eigen::VectorXd::Ones(L);
    alloc.v = Eigen::VectorXd::Ones(C);

    auto bound_interference = [&](const Eigen::VectorXd& p_eff) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(C);
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int l = 0; l < L; ++l) acc += coupling.loss(sc, l, c) * g_low(l) * p_eff(l);
            s(c) = acc;
        }
        return s;
    };
    auto effective_power = [&](const AllocationState& a) {
        Eigen::VectorXd pe(L);
        for (int l = 0; l < L; ++l)
            pe(l) = a.p_tilde(l) + a.u(l) * sc.sts[sc.st_of_link(l)].p_min_w;
        return pe;
    };

    double f_cur = detail_ao::common_objective_zone(alloc.v, alloc.u, cfg.eta);
    std::vector<double> trace{f_cur};
    const double accept_slack = 1e-9;
    int outer = 0;
    for (outer = 1; outer <= cfg.max_outer; ++outer) {
        const double f_start = f_cur;
        // ---- cell-indicator block ---------------------------------------
        const Eigen::VectorXd s_now = bound_interference(effective_power(alloc));
        for (int q = 0; q < cfg.sca_passes; ++q) {
            Step1VInputs in;
            in.cell_count = C;
            in.bound_interference_w = s_now;
            in.threshold_w = thr;
            in.v_expansion = alloc.v;
            in.eta = cfg.eta;
            ConvexProgram prog = assemble_step1_v(in);
            Eigen::VectorXd warm = alloc.v.cwiseMax(1e-9).cwiseMin(1.0 - 1e-9);
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            Eigen::VectorXd v_cand =
                detail_ao::snap_unit(rep.x.cwiseMax(0.0).cwiseMin(1.0));
            const double f_cand = detail_ao::common_objective_zone(v_cand, alloc.u, cfg.eta);
            if (f_cand < f_cur - accept_slack) break;
            const double delta = f_cand - f_cur;
            alloc.v = std::move(v_cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-6 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);
        // ---- selection/power block ----------------------------------------
        for (int q = 0; q < cfg.sca_passes; ++q) {
            Step1UInputs in;
            in.sc = &sc;
            in.coupling = &coupling;
            in.g_low = g_low;
            in.threshold_w = thr;
            in.v_hat = alloc.v;
            in.u_expansion = alloc.u;
            in.eta = cfg.eta;
            in.n_re = cfg.n_re;
            auto [prog, map] = assemble_step1_u(in);
            Eigen::VectorXd warm(map.n);
            for (int l = 0; l < L; ++l) {
                warm(map.var_ptilde[l]) = alloc.p_tilde(l);
                warm(map.var_p[l]) = alloc.p(l);
                warm(map.var_u[l]) = std::clamp(alloc.u(l), 1e-9, 1.0 - 1e-9);
            }
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            AllocationState cand = alloc;
            for (int l = 0; l < L; ++l) {
                cand.p_tilde(l) = rep.x(map.var_ptilde[l]);
                cand.p(l) = rep.x(map.var_p[l]);
                cand.u(l) = std::clamp(rep.x(map.var_u[l]), 0.0, 1.0);
            }
            cand.u = detail_ao::snap_unit(std::move(cand.u));
            const double f_cand = detail_ao::common_objective_zone(alloc.v, cand.u, cfg.eta);
            if (f_cand < f_cur - accept_slack) break;
            const double delta = f_cand - f_cur;
            alloc = std::move(cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-6 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);
        if (std::abs(f_cur - f_start) <= cfg.tolerance * std::max(1.0, std::abs(f_start))) break;
    }

    // ---- rounding: binaries, floor, then the exclusion search -------------
    StepOneResult out;
    out.relaxed = alloc;
    out.objective_trace = std::move(trace);
    out.outer_iterations = std::min(outer, cfg.max_outer);
    out.u.assign(static_cast<std::size_t>(L), 0);
    for (int l = 0; l < L; ++l)
        out.u[static_cast<std::size_t>(l)] = alloc.u(l) >= cfg.rounding_threshold ? 1 : 0;
    const int floor_min = L - cfg.n_re;
    {
        // respect the exclusion floor: reactivate the largest fractions first
        std::vector<int> order(static_cast<std::size_t>(L));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return alloc.u(a) > alloc.u(b); });
        int n_active = static_cast<int>(std::count(out.u.begin(), out.u.end(), 1));
        for (int l : order) {
            if (n_active >= floor_min) break;
            if (!out.u[static_cast<std::size_t>(l)]) {
                out.u[static_cast<std::size_t>(l)] = 1;
                ++n_active;
            }
        }
    }
    out.p.resize(L);
    for (int l = 0; l < L; ++l) {
        const auto& st = sc.sts[sc.st_of_link(l)];
        out.p(l) = std::clamp(alloc.p(l), st.p_min_w, st.p_max_w);
    }

    auto zone_size = [&](const std::vector<int>& u) {
        int count = 0;
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int l = 0; l < L; ++l)
                if (u[static_cast<std::size_t>(l)]) acc += coupling.loss(sc, l, c) * g_low(l) * out.p(l);
            if (acc <= thr * (1.0 + 1e-9)) ++count;
        }
        return count;
    };

    // The relaxed program settles power but rarely flips selections on its
    // own; finish the combinatorial part with a certified exclusion search
    // under the same bound-based test (exhaustive on small instances,
    // greedy otherwise), still honoring the exclusion cap.
    if (L <= 12) {
        std::vector<int> best = out.u;
        int best_size = zone_size(out.u);
        const int masks = 1 << L;
        for (int mask = 0; mask < masks; ++mask) {
            std::vector<int> u(static_cast<std::size_t>(L));
            int n_active = 0;
            for (int l = 0; l < L; ++l) {
                u[static_cast<std::size_t>(l)] = (mask >> l) & 1;
                n_active += u[static_cast<std::size_t>(l)];
            }
            if (n_active < floor_min) continue;
            const int size = zone_size(u);
            if (size > best_size) {
                best_size = size;
                best = u;
            }
        }
        out.u = best;
    } else {
        int n_excluded = L - static_cast<int>(std::count(out.u.begin(), out.u.end(), 1));
        int cur_size = zone_size(out.u);
        for (int it = 0; it < cfg.restoration_retries && n_excluded < cfg.n_re; ++it) {
            int victim = -1;
            int victim_size = cur_size;
            for (int l = 0; l < L; ++l) {
                if (!out.u[static_cast<std::size_t>(l)]) continue;
                out.u[static_cast<std::size_t>(l)] = 0;
                const int size = zone_size(out.u);
                out.u[static_cast<std::size_t>(l)] = 1;
                if (size > victim_size) {
                    victim_size = size;
                    victim = l;
                }
            }
            if (victim < 0) break;
            out.u[static_cast<std::size_t>(victim)] = 0;
            ++n_excluded;
            cur_size = victim_size;
        }
    }

    out.zone.threshold_dbm = threshold_dbm;
    for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int l = 0; l < L; ++l)
            if (out.u[static_cast<std::size_t>(l)]) acc += coupling.loss(sc, l, c) * g_low(l) * out.p(l);
        if (acc <= thr * (1.0 + 1e-9)) {
            out.zone.cells.push_back(c);
            out.zone.certified_interference_w.push_back(acc);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// step 2: beamforming under the limited long-term gain

inline DesignOutcome step2_beamforming(const Scenario& sc, const ChannelRealization& ch,
                                       const InterferenceCoupling& coupling,
                                       const ArrayBank& arrays, const StepOneResult& step1,
                                       const AOConfig& cfg) {
    const int L = sc.link_count();
    DesignOutcome out;
    out.privacy_bits = entropy(step1.zone);
    out.zone_cells = step1.zone.cells;
    out.active.assign(static_cast<std::size_t>(L), 0);
    out.w.assign(static_cast<std::size_t>(L), Eigen::VectorXcd());
    const std::vector<int>& retained = step1.u;
    const int n_retained = static_cast<int>(std::count(retained.begin(), retained.end(), 1));
    if (n_retained == 0 || step1.zone.empty()) {
        out.all_excluded = n_retained == 0;
        out.power_w = Eigen::VectorXd::Zero(L);
        out.certificate = true;
        out.cert.ok = true;
        return out;
    }
    const double thr = step1.zone.threshold_w();

    Eigen::VectorXd g_low(L);
    for (int l = 0; l < L; ++l) g_low(l) = arrays.of_link(sc, l).limited_bound();

    BeamformerSet w = mrc_beamformers(sc, ch, step1.p);
    for (int l = 0; l < L; ++l)
        if (!retained[static_cast<std::size_t>(l)]) w[static_cast<std::size_t>(l)].resize(0);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(L);
    for (int l = 0; l < L; ++l) u(l) = retained[static_cast<std::size_t>(l)] ? 1.0 : 0.0;

    auto masked_rate = [&](const BeamformerSet& ws, int l) {
        return rate(sc, ch, ws, l, &retained);
    };
    auto common_objective = [&](const BeamformerSet& ws, const Eigen::VectorXd& uu) {
        double f = 0.0;
        for (int l = 0; l < L; ++l)
            if (uu(l) > 1e-12) f += uu(l) * masked_rate(ws, l);
        return f + cfg.eta * binary_gap(uu);
    };
    auto f5_value = [&](const BeamformerSet& ws, int l) {
        const ArrayContext& ctx = arrays.of_link(sc, l);
        const auto& wl = ws[static_cast<std::size_t>(l)];
        return ctx.antenna_efficiency() * ctx.antenna_count() * wl.squaredNorm() /
               ctx.average_intensity(wl);
    };

    double f_cur = common_objective(w, u);
    std::vector<double> trace{f_cur};
    const double accept_slack = 1e-9;
    int outer = 0;
    for (outer = 1; outer <= cfg.max_outer; ++outer) {
        const double f_start = f_cur;
        // ---- selection block ----------------------------------------------
        Eigen::VectorXd rate_hat = Eigen::VectorXd::Zero(L);
        Eigen::VectorXd f5_hat = Eigen::VectorXd::Zero(L);
        for (int l = 0; l < L; ++l)
            if (retained[static_cast<std::size_t>(l)]) {
                rate_hat(l) = masked_rate(w, l);
                f5_hat(l) = f5_value(w, l);
            }
        for (int q = 0; q < cfg.sca_passes; ++q) {
            Step2UInputs in;
            in.sc = &sc;
            in.coupling = &coupling;
            in.zone = &step1.zone.cells;
            in.retained = &retained;
            in.threshold_w = thr;
            in.rate_hat = rate_hat;
            in.f5_hat = f5_hat;
            in.p_fixed = step1.p;
            in.g_low = g_low;
            in.u_expansion = u;
            in.eta = cfg.eta;
            auto [prog, map] = assemble_step2_u(in);
            Eigen::VectorXd warm(map.n);
            for (int l = 0; l < L; ++l)
                if (map.var_u[l] >= 0) warm(map.var_u[l]) = std::clamp(u(l), 1e-9, 1.0 - 1e-9);
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            Eigen::VectorXd u_cand = u;
            for (int l = 0; l < L; ++l)
                if (map.var_u[l] >= 0) u_cand(l) = std::clamp(rep.x(map.var_u[l]), 0.0, 1.0);
            u_cand = detail_ao::snap_unit(std::move(u_cand));
            const double f_cand = common_objective(w, u_cand);
            if (f_cand < f_cur - accept_slack) break;
            const double delta = f_cand - f_cur;
            u = std::move(u_cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-6 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);
        // ---- beamformer block ----------------------------------------------
        for (int q = 0; q < cfg.sca_passes; ++q) {
            Step2WInputs in;
            in.sc = &sc;
            in.ch = &ch;
            in.coupling = &coupling;
            in.arrays = &arrays;
            in.zone = &step1.zone.cells;
            in.retained = &retained;
            in.threshold_w = thr;
            in.w_expansion = &w;
            in.u_hat = u;
            in.p_fixed = step1.p;
            in.g_low = g_low;
            in.objective_const = cfg.eta * binary_gap(u);
            auto [prog, map] = assemble_step2_w(in);
            Eigen::VectorXd warm = map.pack(w);
            SolveReport rep = solve(prog, &warm, cfg.solver);
            if (rep.status == SolveStatus::infeasible) break;
            BeamformerSet cand = map.unpack(rep.x);
            const double f_cand = common_objective(cand, u);
            if (f_cand < f_cur - accept_slack) break;
            const double delta = f_cand - f_cur;
            w = std::move(cand);
            f_cur = f_cand;
            if (std::abs(delta) <= 1e-6 * (1.0 + std::abs(f_cur))) break;
        }
        trace.push_back(f_cur);
        if (std::abs(f_cur - f_start) <= cfg.tolerance * std::max(1.0, std::abs(f_start))) break;
    }

    // ---- rounding and exact recertification ------------------------------
    out.objective_trace = std::move(trace);
    out.outer_iterations = std::min(outer, cfg.max_outer);
    for (int l = 0; l < L; ++l)
        out.active[static_cast<std::size_t>(l)] =
            retained[static_cast<std::size_t>(l)] && u(l) >= cfg.rounding_threshold ? 1 : 0;
    out.w = w;
    for (int l = 0; l < L; ++l)
        if (!out.active[static_cast<std::size_t>(l)]) out.w[static_cast<std::size_t>(l)].resize(0);

    const double gain_slack = 1.0 + 1e-6;
    for (int it = 0; it < cfg.restoration_retries; ++it) {
        // realized directional gain toward every zone cell must respect the
        // certified long-term limit
        int victim = -1;
        double worst = 0.0;
        for (int l = 0; l < L; ++l) {
            if (!out.active[static_cast<std::size_t>(l)]) continue;
            const ArrayContext& ctx = arrays.of_link(sc, l);
            for (int cell : step1.zone.cells) {
                const double g = ctx.antenna_gain(out.w[static_cast<std::size_t>(l)],
                                                  coupling.theta(sc, l, cell));
                const double over = g / (g_low(l) * gain_slack);
                if (over > 1.0 && over > worst) {
                    worst = over;
                    victim = l;
                }
            }
        }
        if (victim >= 0) {
            out.active[static_cast<std::size_t>(victim)] = 0;
            out.w[static_cast<std::size_t>(victim)].resize(0);
            continue;
        }
        // QoS
        victim = -1;
        worst = 1e-9;
        for (int l = 0; l < L; ++l) {
            if (!out.active[static_cast<std::size_t>(l)]) continue;
            const double deficit = sc.srs[static_cast<std::size_t>(l)].min_rate -
                                   rate(sc, ch, out.w, l, &out.active);
            if (deficit > worst) {
                worst = deficit;
                victim = l;
            }
        }
        if (victim >= 0) {
            out.active[static_cast<std::size_t>(victim)] = 0;
            out.w[static_cast<std::size_t>(victim)].resize(0);
            continue;
        }
        // exact zone interference
        const Eigen::VectorXd itf =
            exact_cell_interference(sc, coupling, arrays, out.w, out.active, step1.zone.cells);
        if (itf.size() && itf.maxCoeff() > thr * (1.0 + 1e-9)) {
            if (!detail_ao::drop_worst_contributor(sc, coupling, arrays, out.w, out.active,
                                                   step1.zone.cells, itf))
                break;
            continue;
        }
        break;
    }

    out.cert = certificate_check(sc, coupling, arrays, &ch, out.w, out.active, step1.zone.cells,
                                 thr);
    out.certificate = out.cert.ok;
    out.power_w = beam_powers(out.w);
    out.sum_rate = sum_rate(sc, ch, out.w, out.active);
    out.all_excluded = std::count(out.active.begin(), out.active.end(), 1) == 0;
    return out;
}

// ---------------------------------------------------------------------------
// MRC baseline

enum class MrcMode { throughput, zone };

inline DesignOutcome mrc_baseline(const Scenario& sc, const ChannelRealization& ch,
                                  const InterferenceCoupling& coupling, const ArrayBank& arrays,
                                  double threshold_dbm, MrcMode mode,
                                  const std::vector<int>* given_zone = nullptr) {
    const int L = sc.link_count();
    const double thr = dbm_to_watts(threshold_dbm);
    Eigen::VectorXd p(L);
    for (int l = 0; l < L; ++l) {
        const auto& st = sc.sts[sc.st_of_link(l)];
        const double uniform = st.power_budget_w / static_cast<double>(sc.links_of_st(sc.st_of_link(l)).size());
        p(l) = std::clamp(uniform, st.p_min_w, st.p_max_w);
    }
    DesignOutcome out;
    out.w = mrc_beamformers(sc, ch, p);
    out.active = detail_ao::all_ones(L);

    if (mode == MrcMode::zone) {
        std::vector<int> cells(static_cast<std::size_t>(sc.cell_count()));
        std::iota(cells.begin(), cells.end(), 0);
        const Eigen::VectorXd itf =
            exact_cell_interference(sc, coupling, arrays, out.w, out.active, cells);
        for (int c = 0; c < sc.cell_count(); ++c)
            if (itf(c) <= thr * (1.0 + 1e-9)) out.zone_cells.push_back(c);
        PrivacyZone zone;
        zone.cells = out.zone_cells;
        zone.threshold_dbm = threshold_dbm;
        out.privacy_bits = entropy(zone);
        out.cert = certificate_check(sc, coupling, arrays, &ch, out.w, out.active, out.zone_cells,
                                     thr);
        // QoS is not part of the MRC zone baseline; only zone uniformity matters
        out.certificate = out.cert.worst_cell_interference_w <= thr * (1.0 + 1e-9);
    } else {
        if (!given_zone) throw std::invalid_argument("mrc_baseline: throughput mode needs a zone");
        out.zone_cells = *given_zone;
        for (int it = 0; it <= L; ++it) {
            const Eigen::VectorXd itf =
                exact_cell_interference(sc, coupling, arrays, out.w, out.active, out.zone_cells);
            if (!itf.size() || itf.maxCoeff() <= thr * (1.0 + 1e-9)) break;
            if (!detail_ao::drop_worst_contributor(sc, coupling, arrays, out.w, out.active,
                                                   out.zone_cells, itf))
                break;
        }
        PrivacyZone zone;
        zone.cells = out.zone_cells;
        zone.threshold_dbm = threshold_dbm;
        out.privacy_bits = entropy(zone);
        out.cert = certificate_check(sc, coupling, arrays, nullptr, out.w, out.active,
                                     out.zone_cells, thr);
        out.certificate = out.cert.ok;
    }
    for (int l = 0; l < L; ++l)
        if (!out.active[static_cast<std::size_t>(l)]) out.w[static_cast<std::size_t>(l)].resize(0);
    out.power_w = beam_powers(out.w);
    out.sum_rate = sum_rate(sc, ch, out.w, out.active);
    out.all_excluded = std::count(out.active.begin(), out.active.end(), 1) == 0;
    return out;
}

} // namespace pzbeam
