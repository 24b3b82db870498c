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

#include <catch2/catch_amalgamated.hpp>

#include <pzbeam/array.hpp>
#include <pzbeam/validation.hpp>

using namespace pzbeam;

namespace {
Eigen::VectorXcd random_beam(std::mt19937_64& eng, int k) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd w(k);
    for (int j = 0; j < k; ++j) w(j) = {gauss(eng), gauss(eng)};
    return w;
}
} // namespace

TEST_CASE("steering vector basics") {
    ArrayContext ctx(4, 0.9);
    SECTION("broadside gives the all-ones vector") {
        const Eigen::VectorXcd v = ctx.steering_vector(M_PI / 2.0);
        for (int q = 0; q < 4; ++q) CHECK(std::abs(v(q) - std::complex<double>(1.0, 0.0)) < 1e-12);
    }
    SECTION("uniform modulus: |v(theta)|^2 = k") {
        std::mt19937_64 eng(11);
        std::uniform_real_distribution<double> uni(0.0, M_PI);
        for (int i = 0; i < 100; ++i)
            CHECK(ctx.steering_vector(uni(eng)).squaredNorm() == Catch::Approx(4.0).epsilon(1e-12));
    }
    SECTION("endfire with two half-wavelength elements") {
        ArrayContext two(2, 0.9);
        const Eigen::VectorXcd v = two.steering_vector(0.0);
        CHECK(std::abs(v(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(v(1) - std::complex<double>(-1.0, 0.0)) < 1e-9);
    }
    SECTION("out-of-range angles throw") {
        CHECK_THROWS_AS(ctx.steering_vector(-0.1), std::invalid_argument);
        CHECK_THROWS_AS(ctx.steering_vector(M_PI + 0.1), std::invalid_argument);
    }
}

TEST_CASE("radiation intensity") {
    ArrayContext ctx(4, 0.9);
    std::mt19937_64 eng(12);
    const double theta = 1.1;
    const Eigen::VectorXcd v = ctx.steering_vector(theta);
    SECTION("matched beam reaches k") {
        CHECK(ctx.radiation_intensity(v / v.norm(), theta) == Catch::Approx(4.0).epsilon(1e-12));
    }
    SECTION("orthogonal beam radiates nothing toward theta") {
        Eigen::VectorXcd w = random_beam(eng, 4);
        w -= v * (v.dot(w) / v.squaredNorm());
        CHECK(ctx.radiation_intensity(w, theta) < 1e-18 * w.squaredNorm() * 16);
    }
    SECTION("Cauchy-Schwarz cap") {
        for (int i = 0; i < 50; ++i) {
            const Eigen::VectorXcd w = random_beam(eng, 4);
            CHECK(ctx.radiation_intensity(w, theta) <= 4.0 * w.squaredNorm() * (1.0 + 1e-12));
        }
    }
    SECTION("dimension mismatch throws") {
        CHECK_THROWS_AS(ctx.radiation_intensity(Eigen::VectorXcd::Ones(3), theta),
                        std::invalid_argument);
    }
}

TEST_CASE("averaging matrix construction") {
    SECTION("isotropic element: A = 1 in the fine-quantization limit") {
        ArrayContext ctx(1, 1.0, 3600);
        CHECK(std::abs(std::real(ctx.averaging_matrix()(0, 0)) - 1.0) < 1e-6);
    }
    SECTION("exactly Hermitian as constructed") {
        ArrayContext ctx(6, 0.9, 360);
        const Eigen::MatrixXcd& A = ctx.averaging_matrix();
        CHECK((A - A.adjoint()).norm() == 0.0);
    }
    SECTION("quantization refinement converges toward the quadrature value") {
        std::mt19937_64 eng(13);
        const Eigen::VectorXcd w = random_beam(eng, 4);
        ArrayContext fine(4, 0.9, 100000);
        const double ref = fine.average_intensity(w);
        double prev_err = std::numeric_limits<double>::infinity();
        for (int K : {90, 180, 360, 720}) {
            ArrayContext ctx(4, 0.9, K);
            const double err = std::abs(ctx.average_intensity(w) - ref);
            CHECK(err < prev_err);
            prev_err = err;
        }
    }
    SECTION("square-root factor reconstructs A") {
        ArrayContext ctx(8, 0.9, 360);
        const Eigen::MatrixXcd& vt = ctx.sqrt_factor();
        const double rel = (vt * vt.adjoint() - ctx.averaging_matrix()).norm() /
                           ctx.averaging_matrix().norm();
        CHECK(rel < 1e-9);
    }
}

TEST_CASE("directional gain and the deterministic bounds") {
    std::mt19937_64 eng(14);
    SECTION("single element is isotropic with gain eps_a") {
        ArrayContext ctx(1, 0.7, 3600);
        for (int i = 0; i < 10; ++i) {
            const Eigen::VectorXcd w = random_beam(eng, 1);
            CHECK(ctx.antenna_gain(w, 0.3 * (i + 1)) == Catch::Approx(0.7).epsilon(1e-5));
        }
        CHECK(ctx.gain_upper_bound() == Catch::Approx(0.7).epsilon(1e-5));
    }
    SECTION("scale invariance") {
        ArrayContext ctx(8, 0.9, 360);
        const Eigen::VectorXcd w = random_beam(eng, 8);
        const double g = ctx.antenna_gain(w, 0.9);
        for (double c : {1e-3, 0.1, 10.0, 1e3}) {
            CHECK(std::abs(ctx.antenna_gain(c * w, 0.9) - g) <= 1e-10 * g);
        }
    }
    SECTION("bound dominance over random beams and all quantized angles") {
        for (int k : {1, 2, 4, 8}) {
            ArrayContext ctx(k, 0.9, 360);
            const double bound = ctx.gain_upper_bound();
            for (int i = 0; i < 200; ++i) {
                Eigen::VectorXcd w = random_beam(eng, k);
                w /= w.norm();
                for (int q = 1; q <= ctx.quantization_count(); q += 7)
                    CHECK(ctx.antenna_gain(w, ctx.quantized_angle(q)) <= bound * (1.0 + 1e-9));
            }
        }
    }
    SECTION("numerator eigen-fact: peak intensity of a matched beam is k") {
        ArrayContext ctx(8, 0.9, 360);
        for (int q = 1; q <= ctx.quantization_count(); q += 13) {
            const double th = ctx.quantized_angle(q);
            const Eigen::VectorXcd v = ctx.steering_vector(th);
            CHECK(ctx.radiation_intensity(v / v.norm(), th) == Catch::Approx(8.0).epsilon(1e-12));
        }
    }
    SECTION("limited bound scales the full bound") {
        ArrayContext ctx(8, 0.9, 360);
        CHECK(ctx.limited_bound(1.0) == ctx.gain_upper_bound());
        CHECK(ctx.limited_bound(0.4) == Catch::Approx(0.4 * ctx.gain_upper_bound()));
        CHECK(ctx.limited_bound(0.4) <= ctx.gain_upper_bound());
    }
    SECTION("bound exceeds the sampled maximum but is not vacuous") {
        ArrayContext ctx(8, 0.9, 360);
        const double mx = bound_sampler(ctx, 3000, 99);
        CHECK(mx <= ctx.gain_upper_bound() * (1.0 + 1e-9));
        CHECK(mx >= 0.5 * ctx.gain_upper_bound());
        CHECK(bound_sampler(ctx, 6000, 99) >= mx);
    }
}

TEST_CASE("trapezoid average matches adaptive quadrature at the default K") {
    std::mt19937_64 eng(15);
    ArrayContext ctx(8, 0.9, 360);
    for (int i = 0; i < 30; ++i) {
        const Eigen::VectorXcd w = random_beam(eng, 8);
        const double oracle = quadrature_oracle(ctx, w);
        CHECK(std::abs(ctx.average_intensity(w) - oracle) <= 1e-3 * oracle);
    }
}

TEST_CASE("quadrature oracle sanity") {
    ArrayContext ctx(1, 1.0, 360);
    Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1);
    CHECK(quadrature_oracle(ctx, one) == Catch::Approx(1.0).epsilon(1e-9));
    std::mt19937_64 eng(16);
    ArrayContext ctx4(4, 1.0, 360);
    const Eigen::VectorXcd w = random_beam(eng, 4);
    CHECK(quadrature_oracle(ctx4, 2.0 * w) ==
          Catch::Approx(4.0 * quadrature_oracle(ctx4, w)).epsilon(1e-9));
}
