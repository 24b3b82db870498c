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
// Builders that turn the deployment, channels and SCA expansion points into
// canonical convex programs. Interference rows are normalized by the
// threshold (slack variables live in [-1, 1]) and power rows by their
// budgets, which keeps the barrier solver well conditioned.

#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pzbeam/array.hpp"
#include "pzbeam/convex.hpp"
#include "pzbeam/scenario.hpp"
#include "pzbeam/surrogate.hpp"

namespace pzbeam {

// One ArrayContext per distinct antenna count in the deployment.
class ArrayBank {
  public:
    ArrayBank(const Scenario& sc, const ArrayConfig& ac) {
        for (const auto& st : sc.sts) {
            int found = -1;
            for (std::size_t i = 0; i < pool_.size(); ++i)
                if (pool_[i]->antenna_count() == st.antenna_count) found = static_cast<int>(i);
            if (found < 0) {
                pool_.push_back(std::make_shared<ArrayContext>(
                    st.antenna_count, sc.constants.antenna_efficiency, ac.quantization_count,
                    ac.element_spacing, ac.r_ratio));
                found = static_cast<int>(pool_.size()) - 1;
            }
            of_st_.push_back(found);
        }
    }
    const ArrayContext& of_st(int m) const { return *pool_[static_cast<std::size_t>(of_st_[m])]; }
    const ArrayContext& of_link(const Scenario& sc, int l) const {
        return of_st(sc.st_of_link(l));
    }

  private:
    std::vector<std::shared_ptr<const ArrayContext>> pool_;
    std::vector<int> of_st_;
};

// Relaxed decision variables with their box data. The cell slack d is kept
// in threshold units (d = 1 means a full threshold of headroom).
struct AllocationState {
    Eigen::VectorXd p_tilde; // Watts
    Eigen::VectorXd p;       // Watts
    Eigen::VectorXd u;       // [0, 1]
    Eigen::VectorXd d;       // [-1, 1], per zone cell, threshold units
    Eigen::VectorXd v;       // [0, 1], per candidate cell (zone design only)
};

// ---------------------------------------------------------------------------
// complex embedding helpers (w_l occupies 2k consecutive reals at base(l))

namespace embed {

inline LinForm re_row(const Eigen::VectorXcd& c, int base) {
    LinForm f;
    for (int j = 0; j < c.size(); ++j) {
        f.term(base + 2 * j, c(j).real());
        f.term(base + 2 * j + 1, c(j).imag());
    }
    return f;
}

inline LinForm im_row(const Eigen::VectorXcd& c, int base) {
    LinForm f;
    for (int j = 0; j < c.size(); ++j) {
        f.term(base + 2 * j, -c(j).imag());
        f.term(base + 2 * j + 1, c(j).real());
    }
    return f;
}

// 2 Re{c^H w} + c0
inline LinForm real_affine(const Eigen::VectorXcd& c, int base, double c0) {
    LinForm f(c0);
    for (int j = 0; j < c.size(); ++j) {
        f.term(base + 2 * j, 2.0 * c(j).real());
        f.term(base + 2 * j + 1, 2.0 * c(j).imag());
    }
    return f;
}

inline Eigen::VectorXcd unpack(const Eigen::VectorXd& x, int base, int k) {
    Eigen::VectorXcd w(k);
    for (int j = 0; j < k; ++j) w(j) = {x(base + 2 * j), x(base + 2 * j + 1)};
    return w;
}

inline void pack(Eigen::VectorXd& x, int base, const Eigen::VectorXcd& w) {
    for (int j = 0; j < w.size(); ++j) {
        x(base + 2 * j) = w(j).real();
        x(base + 2 * j + 1) = w(j).imag();
    }
}

} // namespace embed

// ---------------------------------------------------------------------------
// (P1.1): selection, power and slack block at fixed beamformers

struct P11Map {
    int n = 0;
    bool fixed_u = false;
    std::vector<int> var_ptilde; // -1 when eliminated
    std::vector<int> var_p;
    std::vector<int> var_u;
    std::vector<int> var_d; // per zone index
};

struct P11Inputs {
    const Scenario* sc = nullptr;
    const InterferenceCoupling* coupling = nullptr;
    const std::vector<int>* zone = nullptr; // cell indices carrying constraints
    double threshold_w = 0.0;
    Eigen::VectorXd rate_hat;             // per link, rate at the expansion beamformers
    Eigen::MatrixXd gain_hat;             // L x |zone| directional gains at expansion
    Eigen::VectorXd u_expansion;          // f3 linearization point
    double eta = -1e4;
    double xi = -1e4;
    const std::vector<int>* fixed_u = nullptr; // when set, binaries are constants
};

inline std::pair<ConvexProgram, P11Map> assemble_p11(const P11Inputs& in) {
    const Scenario& sc = *in.sc;
    const int L = sc.link_count();
    const int Z = static_cast<int>(in.zone->size());
    ConvexProgram prog;
    P11Map map;
    map.fixed_u = in.fixed_u != nullptr;
    map.var_ptilde.assign(L, -1);
    map.var_p.assign(L, -1);
    map.var_u.assign(L, -1);
    map.var_d.assign(Z, -1);

    int n = 0;
    for (int l = 0; l < L; ++l) {
        const bool on = !map.fixed_u || (*in.fixed_u)[static_cast<std::size_t>(l)] != 0;
        if (!map.fixed_u) {
            map.var_ptilde[l] = n++;
            map.var_p[l] = n++;
            map.var_u[l] = n++;
        } else if (on) {
            map.var_p[l] = n++;
        }
    }
    for (int z = 0; z < Z; ++z) map.var_d[z] = n++;
    prog.n = n;
    map.n = n;

    auto u_of = [&](int l) { return map.fixed_u ? double((*in.fixed_u)[l]) : 0.0; };

    // objective: sum u * rate_hat + eta * f3(u; u_expansion) + xi * hinge(d)
    double c0 = 0.0;
    if (!map.fixed_u) {
        const Eigen::VectorXd& ul = in.u_expansion;
        c0 += in.eta * binary_gap(ul);
        for (int l = 0; l < L; ++l) {
            const double slope = in.eta * (1.0 - 2.0 * ul(l));
            prog.obj.lin.term(map.var_u[l], in.rate_hat(l) + slope);
            c0 -= slope * ul(l);
        }
    } else {
        for (int l = 0; l < L; ++l) c0 += u_of(l) * in.rate_hat(l);
    }
    prog.obj.lin.c0 = c0;
    for (int z = 0; z < Z; ++z)
        prog.obj.hinge_neg.push_back({-in.xi, LinForm(0.0).term(map.var_d[z], -1.0)});

    // interference rows (threshold units): sum coef * p_eff + d - 1 <= 0
    for (int z = 0; z < Z; ++z) {
        LinForm row(-1.0);
        row.term(map.var_d[z], 1.0);
        for (int l = 0; l < L; ++l) {
            const double coef =
                in.coupling->loss(sc, l, (*in.zone)[static_cast<std::size_t>(z)]) *
                in.gain_hat(l, z) / in.threshold_w;
            if (map.fixed_u) {
                if (map.var_p[l] >= 0) row.term(map.var_p[l], coef);
            } else {
                const double pmin = sc.sts[sc.st_of_link(l)].p_min_w;
                row.term(map.var_ptilde[l], coef);
                row.term(map.var_u[l], coef * pmin);
            }
        }
        prog.lin_ineq.push_back(std::move(row));
        // |d| <= 1
        prog.lin_ineq.push_back(LinForm(-1.0).term(map.var_d[z], 1.0));
        prog.lin_ineq.push_back(LinForm(-1.0).term(map.var_d[z], -1.0));
    }

    // QoS caps u r <= rate_hat (with a hair of slack so the following
    // beamformer block starts strictly feasible)
    for (int l = 0; l < L; ++l) {
        const double r = sc.srs[static_cast<std::size_t>(l)].min_rate;
        const double cap = in.rate_hat(l) * (1.0 - 1e-9);
        if (!map.fixed_u) {
            if (r > 0.0) prog.lin_ineq.push_back(LinForm(-cap).term(map.var_u[l], r));
        } else if (u_of(l) * r > in.rate_hat(l)) {
            prog.trivially_infeasible = true;
        }
    }

    // per-ST budget and Big-M boxes
    for (int m = 0; m < static_cast<int>(sc.sts.size()); ++m) {
        const auto& st = sc.sts[static_cast<std::size_t>(m)];
        LinForm row(-1.0);
        bool any = false;
        for (int l : sc.links_of_st(m)) {
            if (map.fixed_u) {
                if (map.var_p[l] >= 0) {
                    row.term(map.var_p[l], 1.0 / st.power_budget_w);
                    any = true;
                }
            } else {
                row.term(map.var_ptilde[l], 1.0 / st.power_budget_w);
                row.term(map.var_u[l], st.p_min_w / st.power_budget_w);
                any = true;
            }
        }
        if (any) prog.lin_ineq.push_back(std::move(row));
    }
    BigMBlock block;
    block.p_min.resize(L);
    block.p_max.resize(L);
    for (int l = 0; l < L; ++l) {
        block.p_min(l) = sc.sts[sc.st_of_link(l)].p_min_w;
        block.p_max(l) = sc.sts[sc.st_of_link(l)].p_max_w;
    }
    for (int l = 0; l < L; ++l) {
        const double span = std::max(1.0, block.p_max(l) - block.p_min(l));
        if (!map.fixed_u) {
            for (const auto& r : bigm_constraints(block, l)) {
                LinForm row(r.c / span);
                if (r.a_ptilde != 0.0) row.term(map.var_ptilde[l], r.a_ptilde / span);
                if (r.a_p != 0.0) row.term(map.var_p[l], r.a_p / span);
                if (r.a_u != 0.0) row.term(map.var_u[l], r.a_u / span);
                prog.lin_ineq.push_back(std::move(row));
            }
            prog.lin_ineq.push_back(LinForm(0.0).term(map.var_u[l], -1.0));
            prog.lin_ineq.push_back(LinForm(-1.0).term(map.var_u[l], 1.0));
        }
        if (map.var_p[l] >= 0) {
            prog.lin_ineq.push_back(
                LinForm(block.p_min(l) / span).term(map.var_p[l], -1.0 / span));
            prog.lin_ineq.push_back(
                LinForm(-block.p_max(l) / span).term(map.var_p[l], 1.0 / span));
        }
    }
    return {std::move(prog), std::move(map)};
}

// ---------------------------------------------------------------------------
// (P1.2): beamformer block at fixed selection/power/slack

struct WMap {
    int n = 0;
    std::vector<int> base; // -1 for links carried as zero
    std::vector<int> k;
    BeamformerSet unpack(const Eigen::VectorXd& x) const {
        BeamformerSet w(base.size());
        for (std::size_t l = 0; l < base.size(); ++l)
            if (base[l] >= 0) w[l] = embed::unpack(x, base[l], k[l]);
        return w;
    }
    Eigen::VectorXd pack(const BeamformerSet& w) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (std::size_t l = 0; l < base.size(); ++l)
            if (base[l] >= 0) embed::pack(x, base[l], w[l]);
        return x;
    }
};

struct P12Inputs {
    const Scenario* sc = nullptr;
    const ChannelRealization* ch = nullptr;
    const InterferenceCoupling* coupling = nullptr;
    const ArrayBank* arrays = nullptr;
    const std::vector<int>* zone = nullptr;
    double threshold_w = 0.0;
    const BeamformerSet* w_expansion = nullptr;
    Eigen::VectorXd u_hat;    // fixed relaxed selections
    Eigen::VectorXd p_eff;    // fixed p_tilde + u * p_min (Watts)
    Eigen::VectorXd p_cap;    // fixed power variables bounding |w|^2
    Eigen::VectorXd d_hat;    // fixed slacks, threshold units
    double objective_const = 0.0; // eta f3 + xi hinge at the fixed block
    const std::vector<int>* mask = nullptr; // links carried as zero (optional)
};

struct F2Coeffs {
    double c_l;     // log2(1 + b/a) at expansion
    double kappa;   // (b^2)/(a(a+b)) / ln 2
    double x_l;     // a/b at expansion
};

inline F2Coeffs f2_coefficients(double a_l, double b_l) {
    F2Coeffs out;
    out.c_l = std::log2(1.0 + b_l / a_l);
    out.kappa = (b_l * b_l) / (a_l * (a_l + b_l)) / std::log(2.0);
    out.x_l = a_l / b_l;
    return out;
}

inline std::pair<ConvexProgram, WMap> assemble_p12(const P12Inputs& in) {
    const Scenario& sc = *in.sc;
    const int L = sc.link_count();
    ConvexProgram prog;
    WMap map;
    map.base.assign(L, -1);
    map.k.assign(L, 0);
    int n = 0;
    auto carried = [&](int l) { return !in.mask || (*in.mask)[static_cast<std::size_t>(l)] != 0; };
    for (int l = 0; l < L; ++l) {
        map.k[l] = sc.sts[sc.st_of_link(l)].antenna_count;
        if (carried(l)) {
            map.base[l] = n;
            n += 2 * map.k[l];
        }
    }
    prog.n = n;
    map.n = n;

    const double sigma2 = sc.constants.noise_power_w();
    prog.obj.lin.c0 = in.objective_const;

    // per-link f2 pieces (objective weight u_hat, QoS row against u_hat r)
    for (int l = 0; l < L; ++l) {
        if (!carried(l)) continue;
        const Eigen::VectorXcd& h = in.ch->serving(sc, l);
        const Eigen::VectorXcd& wl = (*in.w_expansion)[static_cast<std::size_t>(l)];
        SinrTerms tl = sinr_terms(sc, *in.ch, *in.w_expansion, l);
        const double b_l = tl.signal;
        if (!(b_l > 0.0)) throw std::domain_error("assemble_p12: zero signal at expansion");
        const F2Coeffs f2 = f2_coefficients(tl.denom(), b_l);
        const std::complex<double> s_l = h.dot(wl);
        // v(w) = 2 Re{(h s_l~)^H w} - |s_l|^2  — affine denominator
        LinForm den = embed::real_affine(h * s_l, map.base[l], -std::norm(s_l));
        // a(W) numerator rows: every other carried link interfering at SR l
        QoaTerm a_over_v;
        a_over_v.den = den;
        a_over_v.num_const = sigma2;
        for (int l2 = 0; l2 < L; ++l2) {
            if (l2 == l || !carried(l2)) continue;
            const Eigen::VectorXcd& h_cross = in.ch->channel(sc.st_of_link(l2), l);
            a_over_v.rows.push_back(embed::re_row(h_cross, map.base[l2]));
            a_over_v.rows.push_back(embed::im_row(h_cross, map.base[l2]));
        }
        const double uhat = in.u_hat(l);
        // objective: uhat * [c_l + kappa x_l - kappa a/v]
        if (uhat > 1e-12) {
            prog.obj.lin.c0 += uhat * (f2.c_l + f2.kappa * f2.x_l);
            QoaTerm t = a_over_v;
            t.coef = uhat * f2.kappa;
            prog.obj.quad_neg.push_back(std::move(t));
        }
        // QoS: kappa a/v <= c_l + kappa x_l - uhat r
        const double rhs = f2.c_l + f2.kappa * f2.x_l - uhat * sc.srs[static_cast<std::size_t>(l)].min_rate;
        SmoothConstraint qos;
        qos.name = "qos_" + std::to_string(l);
        QoaTerm t = a_over_v;
        t.coef = f2.kappa;
        const double scale = std::max(1.0, std::abs(rhs));
        t.coef /= scale;
        qos.terms.push_back(std::move(t));
        qos.aff = LinForm(-rhs / scale);
        prog.smooth_ineq.push_back(std::move(qos));
    }

    // interference rows per zone cell, gains through the quadratic-over-affine
    // surrogate with the shared per-link linearized average intensity
    std::vector<LinForm> denA(static_cast<std::size_t>(L));
    std::vector<double> denA_ok(static_cast<std::size_t>(L), 0.0);
    for (int l = 0; l < L; ++l) {
        if (!carried(l)) continue;
        const ArrayContext& ctx = in.arrays->of_link(sc, l);
        const Eigen::VectorXcd& wl = (*in.w_expansion)[static_cast<std::size_t>(l)];
        const Eigen::VectorXcd Awl = ctx.averaging_matrix() * wl;
        const double off = std::real(wl.dot(Awl));
        denA[static_cast<std::size_t>(l)] = embed::real_affine(Awl, map.base[l], -off);
        denA_ok[static_cast<std::size_t>(l)] = off;
    }
    for (std::size_t z = 0; z < in.zone->size(); ++z) {
        const int cell = (*in.zone)[z];
        SmoothConstraint row;
        row.name = "itf_cell_" + std::to_string(cell);
        double aff = -(1.0 - in.d_hat(static_cast<int>(z)));
        for (int l = 0; l < L; ++l) {
            if (!carried(l) || !(in.p_eff(l) > 0.0)) continue;
            const ArrayContext& ctx = in.arrays->of_link(sc, l);
            const double coef = in.coupling->loss(sc, l, cell) * ctx.antenna_efficiency() *
                                in.p_eff(l) / in.threshold_w;
            if (coef <= 0.0) continue;
            const Eigen::VectorXcd v = ctx.steering_vector(in.coupling->theta(sc, l, cell));
            QoaTerm t;
            t.coef = coef;
            t.rows.push_back(embed::re_row(v, map.base[l]));
            t.rows.push_back(embed::im_row(v, map.base[l]));
            t.den = denA[static_cast<std::size_t>(l)];
            row.terms.push_back(std::move(t));
        }
        row.aff = LinForm(aff);
        prog.smooth_ineq.push_back(std::move(row));
    }

    // power caps |w_l|^2 <= p_cap_l
    for (int l = 0; l < L; ++l) {
        if (!carried(l)) continue;
        SmoothConstraint cap;
        cap.name = "pow_" + std::to_string(l);
        QoaTerm t;
        t.coef = 1.0 / in.p_cap(l);
        for (int j = 0; j < 2 * map.k[l]; ++j) t.rows.push_back(LinForm{}.term(map.base[l] + j, 1.0));
        cap.terms.push_back(std::move(t));
        cap.aff = LinForm(-1.0);
        prog.smooth_ineq.push_back(std::move(cap));
    }
    return {std::move(prog), std::move(map)};
}

// ---------------------------------------------------------------------------
// zone-design step 1, block over the relaxed cell indicators

struct Step1VInputs {
    int cell_count = 0;
    Eigen::VectorXd bound_interference_w; // per cell, at the fixed (p, u)
    double threshold_w = 0.0;
    Eigen::VectorXd v_expansion;
    double eta = -1e4;
};

inline ConvexProgram assemble_step1_v(const Step1VInputs& in) {
    ConvexProgram prog;
    const int C = in.cell_count;
    prog.n = C;
    LinForm total(0.0);
    for (int c = 0; c < C; ++c) total.term(c, 1.0);
    prog.obj.logs.push_back({1.0 / std::log(2.0), total});
    prog.obj.lin.c0 = in.eta * binary_gap(in.v_expansion);
    for (int c = 0; c < C; ++c) {
        const double slope = in.eta * (1.0 - 2.0 * in.v_expansion(c));
        prog.obj.lin.term(c, slope);
        prog.obj.lin.c0 -= slope * in.v_expansion(c);
        double cap = 1.0;
        if (in.bound_interference_w(c) > in.threshold_w)
            cap = (in.threshold_w / in.bound_interference_w(c)) * (1.0 - 1e-7);
        prog.lin_ineq.push_back(LinForm(0.0).term(c, -1.0));
        prog.lin_ineq.push_back(LinForm(-cap).term(c, 1.0));
    }
    return prog;
}

// zone-design step 1, block over (p_tilde, p, u) with v fixed

struct Step1UInputs {
    const Scenario* sc = nullptr;
    const InterferenceCoupling* coupling = nullptr;
    Eigen::VectorXd g_low;    // per-link enforced long-term gain limit
    double threshold_w = 0.0;
    Eigen::VectorXd v_hat;    // fixed relaxed cell indicators
    Eigen::VectorXd u_expansion;
    double eta = -1e4;
    int n_re = 0;
};

inline std::pair<ConvexProgram, P11Map> assemble_step1_u(const Step1UInputs& in) {
    const Scenario& sc = *in.sc;
    const int L = sc.link_count();
    const int C = sc.cell_count();
    ConvexProgram prog;
    P11Map map;
    map.var_ptilde.assign(L, -1);
    map.var_p.assign(L, -1);
    map.var_u.assign(L, -1);
    int n = 0;
    for (int l = 0; l < L; ++l) {
        map.var_ptilde[l] = n++;
        map.var_p[l] = n++;
        map.var_u[l] = n++;
    }
    prog.n = n;
    map.n = n;

    const Eigen::VectorXd& ul = in.u_expansion;
    prog.obj.lin.c0 = in.eta * binary_gap(ul);
    for (int l = 0; l < L; ++l) {
        const double slope = in.eta * (1.0 - 2.0 * ul(l));
        prog.obj.lin.term(map.var_u[l], slope);
        prog.obj.lin.c0 -= slope * ul(l);
    }

    // v_hat-weighted interference rows under the long-term gain bound
    for (int c = 0; c < C; ++c) {
        const double vh = in.v_hat(c);
        if (vh <= 1e-9) continue;
        LinForm row(-1.0 / vh);
        for (int l = 0; l < L; ++l) {
            const double coef = in.coupling->loss(sc, l, c) * in.g_low(l) / in.threshold_w;
            const double pmin = sc.sts[sc.st_of_link(l)].p_min_w;
            row.term(map.var_ptilde[l], coef);
            row.term(map.var_u[l], coef * pmin);
        }
        prog.lin_ineq.push_back(std::move(row));
    }

    // exclusion floor: sum u >= L - n_re
    {
        LinForm row(static_cast<double>(L - in.n_re));
        for (int l = 0; l < L; ++l) row.term(map.var_u[l], -1.0);
        prog.lin_ineq.push_back(std::move(row));
    }

    // budget, Big-M and boxes (shared with P1.1 form)
    for (int m = 0; m < static_cast<int>(sc.sts.size()); ++m) {
        const auto& st = sc.sts[static_cast<std::size_t>(m)];
        LinForm row(-1.0);
        for (int l : sc.links_of_st(m)) {
            row.term(map.var_ptilde[l], 1.0 / st.power_budget_w);
            row.term(map.var_u[l], st.p_min_w / st.power_budget_w);
        }
        prog.lin_ineq.push_back(std::move(row));
    }
    BigMBlock block;
    block.p_min.resize(L);
    block.p_max.resize(L);
    for (int l = 0; l < L; ++l) {
        block.p_min(l) = sc.sts[sc.st_of_link(l)].p_min_w;
        block.p_max(l) = sc.sts[sc.st_of_link(l)].p_max_w;
    }
    for (int l = 0; l < L; ++l) {
        const double span = std::max(1.0, block.p_max(l) - block.p_min(l));
        for (const auto& r : bigm_constraints(block, l)) {
            LinForm row(r.c / span);
            if (r.a_ptilde != 0.0) row.term(map.var_ptilde[l], r.a_ptilde / span);
            if (r.a_p != 0.0) row.term(map.var_p[l], r.a_p / span);
            if (r.a_u != 0.0) row.term(map.var_u[l], r.a_u / span);
            prog.lin_ineq.push_back(std::move(row));
        }
        prog.lin_ineq.push_back(LinForm(0.0).term(map.var_u[l], -1.0));
        prog.lin_ineq.push_back(LinForm(-1.0).term(map.var_u[l], 1.0));
        prog.lin_ineq.push_back(LinForm(block.p_min(l) / span).term(map.var_p[l], -1.0 / span));
        prog.lin_ineq.push_back(LinForm(-block.p_max(l) / span).term(map.var_p[l], 1.0 / span));
    }
    return {std::move(prog), std::move(map)};
}

// ---------------------------------------------------------------------------
// step 2: selection block at fixed beamformers (affine program)

struct Step2UInputs {
    const Scenario* sc = nullptr;
    const InterferenceCoupling* coupling = nullptr;
    const std::vector<int>* zone = nullptr;
    const std::vector<int>* retained = nullptr; // step-1 survivors
    double threshold_w = 0.0;
    Eigen::VectorXd rate_hat;   // f2 at the fixed beamformers
    Eigen::VectorXd f5_hat;     // lemma-3 bound value at the fixed beamformers
    Eigen::VectorXd p_fixed;    // step-1 powers (Watts)
    Eigen::VectorXd g_low;      // per-link
    Eigen::VectorXd u_expansion;
    double eta = -1e4;
};

struct Step2UMap {
    int n = 0;
    std::vector<int> var_u; // -1 for links not retained
};

inline std::pair<ConvexProgram, Step2UMap> assemble_step2_u(const Step2UInputs& in) {
    const Scenario& sc = *in.sc;
    const int L = sc.link_count();
    ConvexProgram prog;
    Step2UMap map;
    map.var_u.assign(L, -1);
    int n = 0;
    for (int l = 0; l < L; ++l)
        if ((*in.retained)[static_cast<std::size_t>(l)]) map.var_u[l] = n++;
    prog.n = n;
    map.n = n;

    prog.obj.lin.c0 = in.eta * binary_gap(in.u_expansion);
    for (int l = 0; l < L; ++l) {
        if (map.var_u[l] < 0) continue;
        const double slope = in.eta * (1.0 - 2.0 * in.u_expansion(l));
        prog.obj.lin.term(map.var_u[l], in.rate_hat(l) + slope);
        prog.obj.lin.c0 -= slope * in.u_expansion(l);
        // QoS cap and box
        const double r = sc.srs[static_cast<std::size_t>(l)].min_rate;
        if (r > 0.0)
            prog.lin_ineq.push_back(LinForm(-in.rate_hat(l) * (1.0 - 1e-9)).term(map.var_u[l], r));
        prog.lin_ineq.push_back(LinForm(0.0).term(map.var_u[l], -1.0));
        prog.lin_ineq.push_back(LinForm(-1.0).term(map.var_u[l], 1.0));
    }
    // per-cell gain-limit coupling: sum g~ (f5_hat - g_low) u <= 0
    for (int cell : *in.zone) {
        LinForm row(0.0);
        bool any = false;
        for (int l = 0; l < L; ++l) {
            if (map.var_u[l] < 0) continue;
            const double gt = in.coupling->loss(sc, l, cell) * in.p_fixed(l) / in.threshold_w;
            const double c = gt * (in.f5_hat(l) - in.g_low(l));
            if (c != 0.0) {
                row.term(map.var_u[l], c);
                any = true;
            }
        }
        if (any) prog.lin_ineq.push_back(std::move(row));
    }
    return {std::move(prog), std::move(map)};
}

// step 2: beamformer block at fixed selection

struct Step2WInputs {
    const Scenario* sc = nullptr;
    const ChannelRealization* ch = nullptr;
    const InterferenceCoupling* coupling = nullptr;
    const ArrayBank* arrays = nullptr;
    const std::vector<int>* zone = nullptr;
    const std::vector<int>* retained = nullptr;
    double threshold_w = 0.0;
    const BeamformerSet* w_expansion = nullptr;
    Eigen::VectorXd u_hat;
    Eigen::VectorXd p_fixed; // caps |w|^2 and scales the coupling rows
    Eigen::VectorXd g_low;   // per-link
    double objective_const = 0.0;
};

inline std::pair<ConvexProgram, WMap> assemble_step2_w(const Step2WInputs& in) {
    const Scenario& sc = *in.sc;
    const int L = sc.link_count();
    ConvexProgram prog;
    WMap map;
    map.base.assign(L, -1);
    map.k.assign(L, 0);
    int n = 0;
    for (int l = 0; l < L; ++l) {
        map.k[l] = sc.sts[sc.st_of_link(l)].antenna_count;
        if ((*in.retained)[static_cast<std::size_t>(l)]) {
            map.base[l] = n;
            n += 2 * map.k[l];
        }
    }
    prog.n = n;
    map.n = n;
    const double sigma2 = sc.constants.noise_power_w();
    prog.obj.lin.c0 = in.objective_const;

    std::vector<LinForm> denA(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        if (map.base[l] < 0) continue;
        const ArrayContext& ctx = in.arrays->of_link(sc, l);
        const Eigen::VectorXcd& wl = (*in.w_expansion)[static_cast<std::size_t>(l)];
        const Eigen::VectorXcd Awl = ctx.averaging_matrix() * wl;
        denA[static_cast<std::size_t>(l)] = embed::real_affine(Awl, map.base[l], -std::real(wl.dot(Awl)));
    }

    for (int l = 0; l < L; ++l) {
        if (map.base[l] < 0) continue;
        const Eigen::VectorXcd& h = in.ch->serving(sc, l);
        const Eigen::VectorXcd& wl = (*in.w_expansion)[static_cast<std::size_t>(l)];
        SinrTerms tl = sinr_terms(sc, *in.ch, *in.w_expansion, l, in.retained);
        const double b_l = tl.signal;
        if (!(b_l > 0.0)) throw std::domain_error("assemble_step2_w: zero signal at expansion");
        const F2Coeffs f2 = f2_coefficients(tl.denom(), b_l);
        const std::complex<double> s_l = h.dot(wl);
        LinForm den = embed::real_affine(h * s_l, map.base[l], -std::norm(s_l));
        QoaTerm a_over_v;
        a_over_v.den = den;
        a_over_v.num_const = sigma2;
        for (int l2 = 0; l2 < L; ++l2) {
            if (l2 == l || map.base[l2] < 0) continue;
            const Eigen::VectorXcd& h_cross = in.ch->channel(sc.st_of_link(l2), l);
            a_over_v.rows.push_back(embed::re_row(h_cross, map.base[l2]));
            a_over_v.rows.push_back(embed::im_row(h_cross, map.base[l2]));
        }
        const double uhat = in.u_hat(l);
        if (uhat > 1e-12) {
            prog.obj.lin.c0 += uhat * (f2.c_l + f2.kappa * f2.x_l);
            QoaTerm t = a_over_v;
            t.coef = uhat * f2.kappa;
            prog.obj.quad_neg.push_back(std::move(t));
        }
        const double rhs = f2.c_l + f2.kappa * f2.x_l - uhat * sc.srs[static_cast<std::size_t>(l)].min_rate;
        SmoothConstraint qos;
        qos.name = "qos_" + std::to_string(l);
        QoaTerm t = a_over_v;
        const double scale = std::max(1.0, std::abs(rhs));
        t.coef = f2.kappa / scale;
        qos.terms.push_back(std::move(t));
        qos.aff = LinForm(-rhs / scale);
        prog.smooth_ineq.push_back(std::move(qos));

        // power cap
        SmoothConstraint cap;
        cap.name = "pow_" + std::to_string(l);
        QoaTerm tc;
        tc.coef = 1.0 / in.p_fixed(l);
        for (int j = 0; j < 2 * map.k[l]; ++j) tc.rows.push_back(LinForm{}.term(map.base[l] + j, 1.0));
        cap.terms.push_back(std::move(tc));
        cap.aff = LinForm(-1.0);
        prog.smooth_ineq.push_back(std::move(cap));
    }

    // per-cell coupling: sum g~ u (f5(w) - g_low) <= 0, f5 quadratic-over-affine
    for (int cell : *in.zone) {
        SmoothConstraint row;
        row.name = "gain_cell_" + std::to_string(cell);
        double aff = 0.0;
        bool any = false;
        for (int l = 0; l < L; ++l) {
            if (map.base[l] < 0) continue;
            const double uhat = in.u_hat(l);
            if (uhat <= 1e-12) continue;
            const ArrayContext& ctx = in.arrays->of_link(sc, l);
            const double gt = in.coupling->loss(sc, l, cell) * in.p_fixed(l) * uhat / in.threshold_w;
            if (gt <= 0.0) continue;
            QoaTerm t;
            t.coef = gt * ctx.antenna_efficiency() * ctx.antenna_count();
            for (int j = 0; j < 2 * map.k[l]; ++j)
                t.rows.push_back(LinForm{}.term(map.base[l] + j, 1.0));
            t.den = denA[static_cast<std::size_t>(l)];
            row.terms.push_back(std::move(t));
            aff -= gt * in.g_low(l);
            any = true;
        }
        if (!any) continue;
        row.aff = LinForm(aff);
        prog.smooth_ineq.push_back(std::move(row));
    }
    return {std::move(prog), std::move(map)};
}

} // namespace pzbeam
