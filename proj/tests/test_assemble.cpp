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

#include <catch2/catch_amalgamated.hpp>

#include <pzbeam/algorithms.hpp>
#include <pzbeam/validation.hpp>

using namespace pzbeam;

namespace {
struct Tiny {
    TinyInstance t = make_tiny_instance(5);
    ArrayBank arrays{t.scenario, t.cfg.array};
    std::vector<int> zone;
    Tiny() {
        for (int c = 0; c < t.scenario.cell_count(); ++c) zone.push_back(c);
    }
};
} // namespace

TEST_CASE("p11 with binaries fixed reduces to the hand-solved program") {
    Tiny f;
    // drop the QoS floor so every fixed selection is admissible
    ExperimentConfig cfg = f.t.cfg;
    cfg.scenario.min_rate_bps_hz = 0.0;
    f.t.scenario = build_scenario(cfg);
    f.t.channels = draw_channels(f.t.scenario, 0);
    f.t.coupling = coupling_table(f.t.scenario);
    const Scenario& sc = f.t.scenario;
    const int L = sc.link_count();
    Eigen::VectorXd p0(L);
    for (int l = 0; l < L; ++l) p0(l) = sc.sts[sc.st_of_link(l)].p_min_w;
    BeamformerSet w = mrc_beamformers(sc, f.t.channels, p0);

    // single cell, all links active; pick a threshold below the minimum
    // achievable interference so the hinge must be active
    std::vector<int> one_cell{0};
    Eigen::VectorXd rate_hat(L);
    for (int l = 0; l < L; ++l) rate_hat(l) = rate(sc, f.t.channels, w, l);
    Eigen::MatrixXd gain_hat(L, 1);
    for (int l = 0; l < L; ++l)
        gain_hat(l, 0) = f.arrays.of_link(sc, l).antenna_gain(w[static_cast<std::size_t>(l)],
                                                              f.t.coupling.theta(sc, l, 0));
    double s_min = 0.0;
    for (int l = 0; l < L; ++l)
        s_min += f.t.coupling.loss(sc, l, 0) * gain_hat(l, 0) * p0(l);
    const double thr = s_min / 2.0; // even minimum power violates by 2x

    std::vector<int> fixed_u(static_cast<std::size_t>(L), 1);
    P11Inputs in;
    in.sc = &sc;
    in.coupling = &f.t.coupling;
    in.zone = &one_cell;
    in.threshold_w = thr;
    in.rate_hat = rate_hat;
    in.gain_hat = gain_hat;
    in.u_expansion = Eigen::VectorXd::Ones(L);
    in.fixed_u = &fixed_u;
    auto [prog, map] = assemble_p11(in);
    REQUIRE(map.fixed_u);
    SolveReport rep = solve(prog, nullptr);
    REQUIRE(rep.status != SolveStatus::infeasible);

    // hand KKT: the hinge pushes every power to its floor,
    // d* = 1 - s_min / thr, objective = sum(rates) + xi d*^2
    const double d_star = 1.0 - s_min / thr;
    const double expect = rate_hat.sum() + (-1e4) * d_star * d_star;
    CHECK(rep.objective == Catch::Approx(expect).epsilon(1e-5));
    for (int l = 0; l < L; ++l)
        CHECK(rep.x(map.var_p[l]) == Catch::Approx(p0(l)).epsilon(1e-4));
    CHECK(rep.x(map.var_d[0]) == Catch::Approx(d_star).epsilon(1e-5));
}

TEST_CASE("p11 detects a fixed selection violating its QoS floor") {
    Tiny f;
    const Scenario& sc = f.t.scenario;
    const int L = sc.link_count();
    std::vector<int> fixed_u(static_cast<std::size_t>(L), 1);
    P11Inputs in;
    in.sc = &sc;
    in.coupling = &f.t.coupling;
    in.zone = &f.zone;
    in.threshold_w = 1.0;
    in.rate_hat = Eigen::VectorXd::Zero(L); // no rate can satisfy r > 0
    in.gain_hat = Eigen::MatrixXd::Ones(L, static_cast<int>(f.zone.size()));
    in.u_expansion = Eigen::VectorXd::Ones(L);
    in.fixed_u = &fixed_u;
    auto [prog, map] = assemble_p11(in);
    CHECK(solve(prog, nullptr).status == SolveStatus::infeasible);
}

TEST_CASE("p12 with one link and inactive interference recovers MRT at the cap") {
    ExperimentConfig cfg;
    cfg.scenario.st_count = 1;
    cfg.scenario.srs_per_st = 1;
    cfg.scenario.grid_dim = 1;
    cfg.scenario.antenna_count = 4;
    cfg.array.quantization_count = 180;
    Scenario sc = build_scenario(cfg);
    ChannelRealization ch = draw_channels(sc, 0);
    InterferenceCoupling cp = coupling_table(sc);
    ArrayBank arrays(sc, cfg.array);
    std::vector<int> zone{0};

    const double p_cap = 2.0;
    Eigen::VectorXd p0(1);
    p0 << 0.5;
    BeamformerSet w0 = mrc_beamformers(sc, ch, p0);

    P12Inputs in;
    in.sc = &sc;
    in.ch = &ch;
    in.coupling = &cp;
    in.arrays = &arrays;
    in.zone = &zone;
    in.threshold_w = 1.0; // far above anything achievable
    in.w_expansion = &w0;
    in.u_hat = Eigen::VectorXd::Ones(1);
    in.p_eff = Eigen::VectorXd::Constant(1, p_cap);
    in.p_cap = Eigen::VectorXd::Constant(1, p_cap);
    in.d_hat = Eigen::VectorXd::Zero(1);
    auto [prog, map] = assemble_p12(in);
    Eigen::VectorXd warm = map.pack(w0);
    SolveReport rep = solve(prog, &warm);
    REQUIRE(rep.status != SolveStatus::infeasible);
    BeamformerSet w = map.unpack(rep.x);

    const Eigen::VectorXcd& h = ch.serving(sc, 0);
    const double align = std::norm(h.normalized().dot(w[0].normalized()));
    CHECK(align == Catch::Approx(1.0).margin(1e-6));
    CHECK(w[0].squaredNorm() == Catch::Approx(p_cap).epsilon(1e-4));
    const double mrt_rate = std::log2(1.0 + p_cap * h.squaredNorm() / sc.constants.noise_power_w());
    CHECK(rate(sc, ch, w, 0) == Catch::Approx(mrt_rate).epsilon(1e-3));
}

TEST_CASE("assembly soundness: rows at the expansion point equal the exact constraints") {
    Tiny f;
    const Scenario& sc = f.t.scenario;
    const int L = sc.link_count();
    Eigen::VectorXd p0(L);
    for (int l = 0; l < L; ++l) p0(l) = sc.sts[sc.st_of_link(l)].p_min_w;
    BeamformerSet w0 = mrc_beamformers(sc, f.t.channels, p0);
    const double thr = 1e-12;

    P12Inputs in;
    in.sc = &sc;
    in.ch = &f.t.channels;
    in.coupling = &f.t.coupling;
    in.arrays = &f.arrays;
    in.zone = &f.zone;
    in.threshold_w = thr;
    in.w_expansion = &w0;
    in.u_hat = Eigen::VectorXd::Ones(L);
    in.p_eff = p0;
    in.p_cap = 2.0 * p0;
    in.d_hat = Eigen::VectorXd::Zero(static_cast<int>(f.zone.size()));
    auto [prog, map] = assemble_p12(in);
    const Eigen::VectorXd x = map.pack(w0);

    // the interference rows, evaluated at the expansion, equal the exact
    // aggregate with true directional gains (tightness transfers)
    const std::vector<int> all(static_cast<std::size_t>(L), 1);
    Eigen::VectorXd exact =
        exact_cell_interference(sc, f.t.coupling, f.arrays, w0, all, f.zone);
    // note: exact uses |w|^2 while the rows carry p_eff = p0 = |w0|^2 here
    std::size_t row_index = 0;
    for (const auto& con : prog.smooth_ineq) {
        if (con.name.rfind("itf_cell_", 0) != 0) continue;
        const double row_val = con.eval(x);                 // sum - (1 - d_hat)
        const double sum_normalized = row_val + 1.0;        // d_hat = 0
        CHECK(sum_normalized ==
              Catch::Approx(exact(static_cast<int>(row_index)) / thr).epsilon(1e-9));
        ++row_index;
    }
    CHECK(row_index == f.zone.size());

    // QoS rows at the expansion evaluate to rate - u r (scaled)
    for (int l = 0; l < L; ++l) {
        const auto& con = prog.smooth_ineq[static_cast<std::size_t>(l)];
        REQUIRE(con.name == "qos_" + std::to_string(l));
        const double exact_rate = rate(sc, f.t.channels, w0, l);
        const double r = sc.srs[static_cast<std::size_t>(l)].min_rate;
        const F2Coeffs f2 = [&] {
            SinrTerms tl = sinr_terms(sc, f.t.channels, w0, l);
            return f2_coefficients(tl.denom(), tl.signal);
        }();
        const double scale = std::max(1.0, std::abs(f2.c_l + f2.kappa * f2.x_l - r));
        CHECK(con.eval(x) * scale == Catch::Approx(-(exact_rate - r)).margin(1e-9));
    }
}

TEST_CASE("step-1 cell block saturates when the threshold is unreachable from above") {
    Step1VInputs in;
    in.cell_count = 9;
    in.bound_interference_w = Eigen::VectorXd::Constant(9, 1e-9);
    in.threshold_w = 1.0; // effectively +inf
    in.v_expansion = Eigen::VectorXd::Ones(9);
    ConvexProgram prog = assemble_step1_v(in);
    Eigen::VectorXd warm = Eigen::VectorXd::Constant(9, 0.5);
    SolveReport rep = solve(prog, &warm);
    REQUIRE(rep.status == SolveStatus::optimal);
    for (int c = 0; c < 9; ++c) CHECK(rep.x(c) > 1.0 - 1e-4);
    CHECK(rep.objective >= std::log2(9.0) - 1e-3);
}

TEST_CASE("step-1 selection block honors the exclusion floor") {
    Tiny f;
    const Scenario& sc = f.t.scenario;
    const int L = sc.link_count();
    Step1UInputs in;
    in.sc = &sc;
    in.coupling = &f.t.coupling;
    in.g_low.resize(L);
    for (int l = 0; l < L; ++l) in.g_low(l) = f.arrays.of_link(sc, l).limited_bound();
    in.threshold_w = 1e-16; // very tight: pressure to exclude everything
    in.v_hat = Eigen::VectorXd::Ones(sc.cell_count());
    in.u_expansion = Eigen::VectorXd::Ones(L);
    in.n_re = 1; // but only one exclusion allowed
    auto [prog, map] = assemble_step1_u(in);
    SolveReport rep = solve(prog, nullptr);
    // the floor makes the tight rows unsatisfiable: must come back infeasible
    CHECK(rep.status == SolveStatus::infeasible);

    in.threshold_w = 1e-9; // loose: everything fits
    auto [prog2, map2] = assemble_step1_u(in);
    SolveReport rep2 = solve(prog2, nullptr);
    REQUIRE(rep2.status != SolveStatus::infeasible);
    double total_u = 0.0;
    for (int l = 0; l < L; ++l) total_u += rep2.x(map2.var_u[l]);
    CHECK(total_u >= L - in.n_re - 1e-6);
}
