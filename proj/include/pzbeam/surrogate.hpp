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
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pzbeam/array.hpp"
#include "pzbeam/scenario.hpp"

namespace pzbeam {

using BeamformerSet = std::vector<Eigen::VectorXcd>;

// SCA expansion point: beamformers plus the relaxed binaries the affine
// surrogates are linearized at.
struct ExpansionPoint {
    BeamformerSet w;             // per link
    Eigen::VectorXd u;           // relaxed link selections in [0, 1]
    Eigen::VectorXd v;           // relaxed cell indicators in [0, 1]
};

// Box data for the exact linearization of u * (p - p_min). Powers in Watts;
// the cell slack d is capped at d_max.
struct BigMBlock {
    Eigen::VectorXd p_min;
    Eigen::VectorXd p_max;
    double d_max = 0.0;
};

struct SinrTerms {
    double signal = 0.0;       // b = |h^H w|^2
    double interference = 0.0; // intra + inter
    double noise = 0.0;        // sigma^2
    double denom() const { return interference + noise; }
};

// Desired-signal and interference powers for one link under the full
// beamformer set. Links carried with w of size zero (or excluded by the
// active mask) transmit nothing.
inline SinrTerms sinr_terms(const Scenario& sc, const ChannelRealization& ch,
                            const BeamformerSet& w, int link,
                            const std::vector<int>* active = nullptr) {
    const int L = sc.link_count();
    if (static_cast<int>(w.size()) != L)
        throw std::invalid_argument("sinr_terms: beamformer set size mismatch");
    SinrTerms out;
    out.noise = sc.constants.noise_power_w();
    const Eigen::VectorXcd& h_own = ch.serving(sc, link);
    auto on = [&](int l) {
        if (w[static_cast<std::size_t>(l)].size() == 0) return false;
        return !active || (*active)[static_cast<std::size_t>(l)] != 0;
    };
    if (on(link)) out.signal = std::norm(h_own.dot(w[static_cast<std::size_t>(link)]));
    for (int l = 0; l < L; ++l) {
        if (l == link || !on(l)) continue;
        const Eigen::VectorXcd& h_cross = ch.channel(sc.st_of_link(l), link);
        out.interference += std::norm(h_cross.dot(w[static_cast<std::size_t>(l)]));
    }
    return out;
}

/// Achievable spectral efficiency log2(1 + SINR) for one link, in bit/s/Hz.
inline double rate(const Scenario& sc, const ChannelRealization& ch, const BeamformerSet& w,
                   int link, const std::vector<int>* active = nullptr) {
    const SinrTerms t = sinr_terms(sc, ch, w, link, active);
    return std::log2(1.0 + t.signal / t.denom());
}

inline double sum_rate(const Scenario& sc, const ChannelRealization& ch, const BeamformerSet& w,
                       const std::vector<int>& active) {
    double s = 0.0;
    for (int l = 0; l < sc.link_count(); ++l)
        if (active[static_cast<std::size_t>(l)]) s += rate(sc, ch, w, l, &active);
    return s;
}

// v(w^l, w) = 2 Re{(w^l)^H h h^H w} - |h^H w^l|^2, the affine minorant of
// the signal power b(w) at the expansion point.
inline double signal_minorant(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w_l,
                              const Eigen::VectorXcd& w) {
    const std::complex<double> s_l = h.dot(w_l);
    const std::complex<double> s = h.dot(w);
    return 2.0 * std::real(std::conj(s_l) * s) - std::norm(s_l);
}

// Concave lower bound on the link rate, tight at W = W^l: the first-order
// expansion of log2(1 + 1/x) at x^l = a^l/b^l, with a(W)/b(w) relaxed to
// a(W)/v(w^l, w) on the region v > 0.
inline double f2_surrogate(const Scenario& sc, const ChannelRealization& ch,
                           const BeamformerSet& w_expansion, const BeamformerSet& w, int link) {
    const SinrTerms tl = sinr_terms(sc, ch, w_expansion, link);
    const double a_l = tl.denom();
    const double b_l = tl.signal;
    if (!(b_l > 0.0)) throw std::domain_error("f2_surrogate: zero signal at expansion point");
    const Eigen::VectorXcd& h = ch.serving(sc, link);
    const double v = signal_minorant(h, w_expansion[static_cast<std::size_t>(link)],
                                     w[static_cast<std::size_t>(link)]);
    if (!(v > 0.0)) throw std::domain_error("f2_surrogate: nonpositive signal minorant");
    const SinrTerms t = sinr_terms(sc, ch, w, link);
    const double a = t.denom();
    const double kappa = (b_l * b_l) / (a_l * (a_l + b_l)) / std::log(2.0);
    return std::log2(1.0 + b_l / a_l) - kappa * (a / v - a_l / b_l);
}

// f(x) = sum x_i - sum x_i^2, zero exactly at binary points.
inline double binary_gap(const Eigen::VectorXd& u) {
    return u.sum() - u.squaredNorm();
}

// Affine global upper bound of binary_gap, tangent at u_l.
inline double f3_penalty(const Eigen::VectorXd& u_l, const Eigen::VectorXd& u) {
    if (u_l.size() != u.size()) throw std::invalid_argument("f3_penalty: size mismatch");
    for (int i = 0; i < u.size(); ++i) {
        if (u(i) < -1e-12 || u(i) > 1.0 + 1e-12 || u_l(i) < -1e-12 || u_l(i) > 1.0 + 1e-12)
            throw std::invalid_argument("f3_penalty: arguments must lie in [0, 1]");
    }
    double out = binary_gap(u_l);
    for (int i = 0; i < u.size(); ++i) out += (1.0 - 2.0 * u_l(i)) * (u(i) - u_l(i));
    return out;
}

// Affine-in-w minorant of the average radiation intensity w^H A w at w^l.
inline double average_intensity_minorant(const ArrayContext& ctx, const Eigen::VectorXcd& w_l,
                                         const Eigen::VectorXcd& w) {
    const Eigen::VectorXcd Awl = ctx.averaging_matrix() * w_l;
    return 2.0 * std::real(Awl.dot(w)) - std::real(w_l.dot(Awl));
}

// Quadratic-over-affine upper bound of the directional gain, tight at w^l.
inline double gain_surrogate_lemma1(const ArrayContext& ctx, const Eigen::VectorXcd& w_l,
                                    const Eigen::VectorXcd& w, double theta) {
    const double den = average_intensity_minorant(ctx, w_l, w);
    if (!(den > 0.0)) throw std::domain_error("gain_surrogate_lemma1: nonpositive denominator");
    return ctx.antenna_efficiency() * ctx.radiation_intensity(w, theta) / den;
}

// Direction-independent gain bound eps_a k |w|^2 over the linearized average
// intensity; dominates the directional gain for every angle.
inline double gain_surrogate_lemma3(const ArrayContext& ctx, const Eigen::VectorXcd& w_l,
                                    const Eigen::VectorXcd& w) {
    const double den = average_intensity_minorant(ctx, w_l, w);
    if (!(den > 0.0)) throw std::domain_error("gain_surrogate_lemma3: nonpositive denominator");
    return ctx.antenna_efficiency() * ctx.antenna_count() * w.squaredNorm() / den;
}

// One affine row a'x + c <= 0 over the ordered variables (p_tilde, p, u).
struct BigMRow {
    double a_ptilde = 0.0;
    double a_p = 0.0;
    double a_u = 0.0;
    double c = 0.0;
    double eval(double p_tilde, double p, double u) const {
        return a_ptilde * p_tilde + a_p * p + a_u * u + c;
    }
};

// Exact linearization of p_tilde = u * (p - p_min) over u in {0, 1},
// p in [p_min, p_max]:
//   p_tilde >= 0
//   p_tilde <= u (p_max - p_min)
//   p_tilde <= p - p_min
//   p_tilde >= (p - p_min) - (1 - u)(p_max - p_min)
inline std::vector<BigMRow> bigm_constraints(const BigMBlock& block, int link) {
    const double pmin = block.p_min(link);
    const double pmax = block.p_max(link);
    if (!(pmin < pmax)) throw std::invalid_argument("bigm_constraints: requires p_min < p_max");
    const double span = pmax - pmin;
    std::vector<BigMRow> rows;
    rows.push_back({-1.0, 0.0, 0.0, 0.0});          // -p_tilde <= 0
    rows.push_back({1.0, 0.0, -span, 0.0});         // p_tilde - u span <= 0
    rows.push_back({1.0, -1.0, 0.0, pmin});         // p_tilde - (p - pmin) <= 0
    rows.push_back({-1.0, 1.0, span, -pmin - span}); // (p - pmin) - span + u span - p_tilde <= 0
    return rows;
}

// Aggregate received interference per cell, in Watts: sum over active links
// of coupling loss * gain toward the cell * effective transmit power.
inline std::vector<double> aggregate_interference(const Scenario& sc,
                                                  const InterferenceCoupling& coupling,
                                                  const Eigen::MatrixXd& gains,
                                                  const Eigen::VectorXd& p_effective,
                                                  const std::vector<int>& active) {
    const int L = sc.link_count();
    const int C = sc.cell_count();
    if (gains.rows() != L || gains.cols() != C)
        throw std::invalid_argument("aggregate_interference: gain table shape mismatch");
    if (p_effective.size() != L)
        throw std::invalid_argument("aggregate_interference: power vector size mismatch");
    std::vector<double> out(static_cast<std::size_t>(C), 0.0);
    for (int c = 0; c < C; ++c) {
        double s = 0.0;
        for (int l = 0; l < L; ++l) {
            if (!active[static_cast<std::size_t>(l)]) continue;
            s += coupling.loss(sc, l, c) * gains(l, c) * p_effective(l);
        }
        out[static_cast<std::size_t>(c)] = s;
    }
    return out;
}

} // namespace pzbeam
