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

#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include <pzbeam/convex.hpp>

using namespace pzbeam;

TEST_CASE("hand-solved programs") {
    SECTION("maximize -x^2 subject to x >= 1") {
        ConvexProgram p;
        p.n = 1;
        QoaTerm q;
        q.rows.push_back(LinForm{}.term(0, 1.0));
        p.obj.quad_neg.push_back(q);
        p.lin_ineq.push_back(LinForm(1.0).term(0, -1.0));
        Eigen::VectorXd w0(1);
        w0 << 4.0;
        SolveReport rep = solve(p, &w0);
        REQUIRE(rep.status == SolveStatus::optimal);
        CHECK(rep.x(0) == Catch::Approx(1.0).margin(1e-6));
        CHECK(rep.objective == Catch::Approx(-1.0).margin(1e-6));
    }
    SECTION("maximize c.x over the unit ball") {
        ConvexProgram p;
        p.n = 3;
        Eigen::Vector3d c(0.3, -1.2, 2.0);
        for (int i = 0; i < 3; ++i) p.obj.lin.term(i, c(i));
        SmoothConstraint ball;
        QoaTerm q;
        for (int i = 0; i < 3; ++i) q.rows.push_back(LinForm{}.term(i, 1.0));
        ball.terms.push_back(q);
        ball.aff = LinForm(-1.0);
        p.smooth_ineq.push_back(ball);
        SolveReport rep = solve(p);
        REQUIRE(rep.status == SolveStatus::optimal);
        CHECK((rep.x - c / c.norm()).norm() < 1e-6);
        CHECK(rep.objective == Catch::Approx(c.norm()).epsilon(1e-6));
    }
    SECTION("infeasible box is detected") {
        ConvexProgram p;
        p.n = 1;
        p.lin_ineq.push_back(LinForm(2.0).term(0, -1.0));  // x >= 2
        p.lin_ineq.push_back(LinForm(-1.0).term(0, 1.0));  // x <= 1
        CHECK(solve(p).status == SolveStatus::infeasible);
    }
    SECTION("equality constraints via elimination") {
        // max x + y  s.t.  x + y + z = 1, z >= 0.25, vars in [0, 1]
        ConvexProgram p;
        p.n = 3;
        p.obj.lin.term(0, 1.0).term(1, 1.0);
        p.lin_eq.push_back(LinForm(-1.0).term(0, 1.0).term(1, 1.0).term(2, 1.0));
        for (int i = 0; i < 3; ++i) {
            p.lin_ineq.push_back(LinForm(0.0).term(i, -1.0));
            p.lin_ineq.push_back(LinForm(-1.0).term(i, 1.0));
        }
        p.lin_ineq.push_back(LinForm(0.25).term(2, -1.0));
        SolveReport rep = solve(p);
        REQUIRE(rep.status == SolveStatus::optimal);
        CHECK(rep.objective == Catch::Approx(0.75).margin(1e-6));
        CHECK(rep.x(0) + rep.x(1) + rep.x(2) == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("random small programs match a dense grid search") {
    std::mt19937_64 eng(21);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + trial % 2;
        ConvexProgram p;
        p.n = n;
        // concave quadratic objective: c.x - |x - x0|^2 over the box [-1, 1]^n
        Eigen::VectorXd c(n), x0(n);
        for (int i = 0; i < n; ++i) {
            c(i) = uni(eng);
            x0(i) = 0.5 * uni(eng);
        }
        for (int i = 0; i < n; ++i) {
            p.obj.lin.term(i, c(i));
            QoaTerm q;
            q.rows.push_back(LinForm(-x0(i)).term(i, 1.0));
            p.obj.quad_neg.push_back(q);
            p.lin_ineq.push_back(LinForm(-1.0).term(i, 1.0));
            p.lin_ineq.push_back(LinForm(-1.0).term(i, -1.0));
        }
        // one random affine constraint a.x <= b through the interior
        LinForm aff(-0.3 - 0.3 * std::abs(uni(eng)));
        for (int i = 0; i < n; ++i) aff.term(i, uni(eng));
        p.lin_ineq.push_back(aff);

        SolveReport rep = solve(p);
        REQUIRE(rep.status == SolveStatus::optimal);

        // dense grid oracle over the feasible box
        const int g = n == 2 ? 401 : 101;
        double best = -1e300;
        Eigen::VectorXd x(n);
        std::function<void(int)> scan = [&](int dim) {
            if (dim == n) {
                if (aff.eval(x) > 0.0) return;
                double v = 0.0;
                for (int i = 0; i < n; ++i)
                    v += c(i) * x(i) - (x(i) - x0(i)) * (x(i) - x0(i));
                best = std::max(best, v);
                return;
            }
            for (int gi = 0; gi < g; ++gi) {
                x(dim) = -1.0 + 2.0 * gi / (g - 1);
                scan(dim + 1);
            }
        };
        scan(0);
        CHECK(rep.objective >= best - 1e-9);
        CHECK(rep.objective <= best + 1e-4 + 3.0 * n / (g - 1.0)); // grid resolution slack
    }
}

TEST_CASE("solver determinism") {
    ConvexProgram p;
    p.n = 4;
    std::mt19937_64 eng(22);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 4; ++i) {
        p.obj.lin.term(i, uni(eng));
        QoaTerm q;
        q.rows.push_back(LinForm(0.1 * uni(eng)).term(i, 1.0));
        q.den = LinForm(2.0).term((i + 1) % 4, 0.3);
        p.obj.quad_neg.push_back(q);
        p.lin_ineq.push_back(LinForm(-1.0).term(i, 1.0));
        p.lin_ineq.push_back(LinForm(-1.0).term(i, -1.0));
    }
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(4);
    SolveReport a = solve(p, &w0);
    SolveReport b = solve(p, &w0);
    REQUIRE(a.status == b.status);
    CHECK(a.objective == b.objective); // bitwise identical on the same build
    CHECK((a.x - b.x).norm() == 0.0);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("KKT audit: reported residuals recompute from the solution") {
    ConvexProgram p;
    p.n = 2;
    p.obj.lin.term(0, 1.0).term(1, 0.5);
    SmoothConstraint ball;
    QoaTerm q;
    q.rows.push_back(LinForm{}.term(0, 1.0));
    q.rows.push_back(LinForm{}.term(1, 1.0));
    ball.terms.push_back(q);
    ball.aff = LinForm(-1.0);
    p.smooth_ineq.push_back(ball);
    p.lin_ineq.push_back(LinForm(-0.9).term(0, 1.0));
    SolveReport rep = solve(p);
    REQUIRE(rep.status == SolveStatus::optimal);
    REQUIRE(rep.ineq_duals.size() == 2);

    // independent recomputation: grad of the Lagrangian with the reported duals
    const Eigen::VectorXd& x = rep.x;
    Eigen::VectorXd grad_obj(2);
    grad_obj << -1.0, -0.5; // gradient of the minimized objective
    Eigen::VectorXd grad_lin(2);
    grad_lin << 1.0, 0.0;
    Eigen::VectorXd grad_ball = 2.0 * x;
    const Eigen::VectorXd lagr =
        grad_obj + rep.ineq_duals[0] * grad_lin + rep.ineq_duals[1] * grad_ball;
    const double feas = std::max({0.0, x(0) - 0.9, x.squaredNorm() - 1.0});
    CHECK(std::abs(feas - rep.feasibility_residual) <= 1e-9);
    const double denom = std::max(1.0, grad_obj.cwiseAbs().maxCoeff());
    CHECK(lagr.cwiseAbs().maxCoeff() / denom <= rep.stationarity_residual + 1e-9);
}

TEST_CASE("central path objectives are monotone non-decreasing") {
    ConvexProgram p;
    p.n = 2;
    p.obj.lin.term(0, 2.0).term(1, 1.0);
    for (int i = 0; i < 2; ++i) {
        p.lin_ineq.push_back(LinForm(-1.0).term(i, 1.0));
        p.lin_ineq.push_back(LinForm(0.0).term(i, -1.0));
    }
    SolveReport rep = solve(p);
    REQUIRE(rep.status == SolveStatus::optimal);
    for (std::size_t i = 1; i < rep.central_objectives.size(); ++i)
        CHECK(rep.central_objectives[i] >= rep.central_objectives[i - 1] - 1e-9);
}

TEST_CASE("program dump lists variables and rows") {
    ConvexProgram p;
    p.n = 2;
    p.var_names = {"alpha", "beta"};
    p.obj.lin.term(0, 1.0);
    p.obj.logs.push_back({1.0, LinForm(0.5).term(1, 1.0)});
    SmoothConstraint sc;
    QoaTerm q;
    q.rows.push_back(LinForm{}.term(0, 1.0));
    q.den = LinForm(1.0).term(1, 0.5);
    sc.terms.push_back(q);
    sc.aff = LinForm(-2.0);
    sc.name = "cap";
    p.smooth_ineq.push_back(sc);
    p.lin_ineq.push_back(LinForm(-1.0).term(0, 1.0).term(1, 1.0));
    std::ostringstream os;
    p.dump(os);
    const std::string text = os.str();
    CHECK(text.find("2 variables") != std::string::npos);
    CHECK(text.find("alpha") != std::string::npos);
    CHECK(text.find("cap") != std::string::npos);
    CHECK(text.find("ln(") != std::string::npos);
}

TEST_CASE("domain violations at the start point are rejected") {
    ConvexProgram p;
    p.n = 1;
    QoaTerm q;
    q.rows.push_back(LinForm{}.term(0, 1.0));
    q.den = LinForm(-1.0).term(0, 1.0); // requires x > 1
    p.obj.quad_neg.push_back(q);
    Eigen::VectorXd bad(1);
    bad << 0.0;
    CHECK_THROWS_AS(solve(p, &bad), std::invalid_argument);
}
