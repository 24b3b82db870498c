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
// Dumps the directional gain pattern of a steered ULA beam as CSV on
// stdout, together with the deterministic gain bound.
//
//   gain_pattern [antenna_count] [steer_angle_deg]

#include <cstdlib>
#include <iostream>

#include <pzbeam/array.hpp>

int main(int argc, char** argv) {
    const int k = argc > 1 ? std::atoi(argv[1]) : 8;
    const double steer_deg = argc > 2 ? std::atof(argv[2]) : 60.0;
    pzbeam::ArrayContext ctx(k, 0.9, 720);
    const Eigen::VectorXcd w = ctx.steering_vector(steer_deg * M_PI / 180.0) / std::sqrt(double(k));

    std::cout << "theta_deg,gain,bound\n";
    const double bound = ctx.gain_upper_bound();
    for (int q = 1; q <= ctx.quantization_count(); ++q) {
        const double th = ctx.quantized_angle(q);
        std::cout << th * 180.0 / M_PI << "," << ctx.antenna_gain(w, th) << "," << bound << "\n";
    }
    return 0;
}
