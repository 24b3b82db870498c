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

#include <pzbeam/units.hpp>

using namespace pzbeam;

TEST_CASE("dbm to watts definition") {
    CHECK(dbm_to_watts(0.0) == Catch::Approx(1e-3).epsilon(1e-14));
    CHECK(dbm_to_watts(-104.0) == Catch::Approx(std::pow(10.0, -13.4)).epsilon(1e-14));
    CHECK(dbm_to_watts(30.0) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conversion pair is an exact inverse over the working range") {
    for (int i = 0; i <= 600; ++i) {
        const double dbm = -200.0 + 0.5 * i;
        const double back = watts_to_dbm(dbm_to_watts(dbm));
        CHECK(std::abs(back - dbm) <= 1e-12 * std::max(1.0, std::abs(dbm)));
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(watts_to_dbm(0.0), std::domain_error);
    CHECK_THROWS_AS(watts_to_dbm(-1.0), std::domain_error);
    CHECK_THROWS_AS(dbm_to_watts(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(dbm_to_watts(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}
