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
#include <stdexcept>

namespace pzbeam {

/// dBm -> Watt. Exact inverse of watts_to_dbm.
inline double dbm_to_watts(double dbm) {
    if (!std::isfinite(dbm)) throw std::domain_error("dbm_to_watts: non-finite input");
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

/// Watt -> dBm. Requires a strictly positive power.
inline double watts_to_dbm(double watts) {
    if (!(watts > 0.0) || !std::isfinite(watts))
        throw std::domain_error("watts_to_dbm: power must be positive and finite");
    return 10.0 * std::log10(watts) + 30.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace pzbeam
