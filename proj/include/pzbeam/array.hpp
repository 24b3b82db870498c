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

namespace pzbeam {

// ULA steering machinery for one antenna count: quantized angles, the
// trapezoid averaging matrix A with its eigendecomposition, and the
// deterministic gain bounds derived from it.
//
// w^H A w approximates the sphere-averaged radiation intensity
// (1/4pi) * iint U(theta) sin(theta) dtheta dphi; the azimuthal symmetry of
// the ULA reduces the double integral to (1/2) int_0^pi U sin(theta), and
// that 1/2 is folded into A so a single isotropic element (k = 1) averages
// to exactly |w|^2.
class ArrayContext {
  public:
    ArrayContext(int antenna_count, double antenna_efficiency, int quantization_count = 360,
                 double element_spacing = 0.5, double r_ratio = 1.0)
        : k_(antenna_count),
          eps_a_(antenna_efficiency),
          quant_(quantization_count),
          spacing_(element_spacing),
          r_ratio_(r_ratio) {
        if (k_ < 1) throw std::invalid_argument("ArrayContext: antenna_count must be >= 1");
        if (quant_ < 2) throw std::invalid_argument("ArrayContext: quantization_count must be >= 2");
        if (!(eps_a_ > 0.0 && eps_a_ <= 1.0))
            throw std::invalid_argument("ArrayContext: antenna_efficiency must lie in (0, 1]");
        if (!(r_ratio_ > 0.0 && r_ratio_ <= 1.0))
            throw std::invalid_argument("ArrayContext: r_ratio must lie in (0, 1]");
        step_ = M_PI / quant_;
        build();
    }

    int antenna_count() const { return k_; }
    int quantization_count() const { return quant_; }
    double quantization_step() const { return step_; }
    double element_spacing() const { return spacing_; }
    double antenna_efficiency() const { return eps_a_; }
    double r_ratio() const { return r_ratio_; }

    // Quantized angle theta_q = q * pi / K for q = 1..K.
    double quantized_angle(int q) const { return step_ * q; }

    const Eigen::MatrixXcd& averaging_matrix() const { return A_; }
    const Eigen::MatrixXcd& eigenvectors() const { return Q_; }
    const Eigen::VectorXd& eigenvalues() const { return lambda_; }
    // Square-root factor v~ with A = v~ v~^H (rank-deficient columns dropped).
    const Eigen::MatrixXcd& sqrt_factor() const { return vtilde_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_(0); }

    // Steering vector entry q = exp(i 2 pi spacing q cos(theta)), q = 0..k-1.
    Eigen::VectorXcd steering_vector(double theta) const {
        if (theta < 0.0 || theta > M_PI)
            throw std::invalid_argument("steering_vector: theta outside [0, pi]");
        Eigen::VectorXcd v(k_);
        const double phase = 2.0 * M_PI * spacing_ * std::cos(theta);
        for (int q = 0; q < k_; ++q)
            v(q) = std::polar(1.0, phase * q);
        return v;
    }

    // Radiation intensity U(theta) = |w^H v(theta)|^2.
    double radiation_intensity(const Eigen::VectorXcd& w, double theta) const {
        check_dim(w);
        return std::norm(steering_vector(theta).dot(w));
    }

    // Average radiation intensity w^H A w (nonnegative up to roundoff).
    double average_intensity(const Eigen::VectorXcd& w) const {
        check_dim(w);
        return std::real(w.dot(A_ * w));
    }

    // Directional antenna gain eps_a * U(theta) / (w^H A w).
    double antenna_gain(const Eigen::VectorXcd& w, double theta) const {
        check_dim(w);
        if (w.squaredNorm() == 0.0) throw std::invalid_argument("antenna_gain: w must be nonzero");
        const double denom = average_intensity(w);
        if (!(denom > 0.0))
            throw std::domain_error("antenna_gain: w lies in the null space of A");
        return eps_a_ * radiation_intensity(w, theta) / denom;
    }

    // Diagnostic peak gain over the quantized angle set.
    double peak_gain(const Eigen::VectorXcd& w) const {
        double best = 0.0;
        for (int q = 1; q <= quant_; ++q)
            best = std::max(best, radiation_intensity(w, quantized_angle(q)));
        const double denom = average_intensity(w);
        if (!(denom > 0.0)) throw std::domain_error("peak_gain: w lies in the null space of A");
        return eps_a_ * best / denom;
    }

    // Deterministic beamformer-independent bound eps_a * k / lambda_min(A).
    double gain_upper_bound() const {
        if (!(lambda_min_ > 0.0)) throw std::domain_error("gain_upper_bound: singular A");
        return eps_a_ * k_ / lambda_min_;
    }

    // The enforced long-term limit: r * gain bound, r in (0, 1].
    double limited_bound(double r) const {
        if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("limited_bound: r outside (0, 1]");
        return r * gain_upper_bound();
    }
    double limited_bound() const { return limited_bound(r_ratio_); }

  private:
    void check_dim(const Eigen::VectorXcd& w) const {
        if (w.size() != k_) throw std::invalid_argument("beamformer dimension mismatch");
    }

    // Composite trapezoid over theta_q = q pi/K, q = 1..K, halved endpoint
    // weights at q = 1 and q = K, scaled by the 1/2 sphere normalization.
    void build() {
        A_ = Eigen::MatrixXcd::Zero(k_, k_);
        for (int q = 1; q <= quant_; ++q) {
            const double th = quantized_angle(q);
            const double wq = (q == 1 || q == quant_) ? 0.5 : 1.0;
            const Eigen::VectorXcd v = steering_vector(th);
            A_.noalias() += (0.5 * step_ * wq * std::sin(th)) * (v * v.adjoint());
        }
        // Hermitize exactly; the sum of rank-1 terms is Hermitian up to
        // floating point noise.
        A_ = ((A_ + A_.adjoint()) * 0.5).eval();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A_);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("ArrayContext: eigendecomposition failed");
        // SelfAdjointEigenSolver sorts ascending; store descending.
        Eigen::VectorXd ev = es.eigenvalues().reverse();
        Eigen::MatrixXcd Q(k_, k_);
        for (int c = 0; c < k_; ++c) Q.col(c) = es.eigenvectors().col(k_ - 1 - c);
        const double clamp_floor = 1e-10 * std::max(ev(0), 0.0);
        int rank = 0;
        for (int c = 0; c < k_; ++c) {
            if (ev(c) < clamp_floor) ev(c) = 0.0;
            if (ev(c) > 0.0) ++rank;
        }
        lambda_ = ev;
        Q_ = Q;
        lambda_min_ = ev(k_ - 1);
        vtilde_.resize(k_, rank);
        for (int c = 0; c < rank; ++c) vtilde_.col(c) = Q.col(c) * std::sqrt(ev(c));
    }

    int k_;
    double eps_a_;
    int quant_;
    double spacing_;
    double r_ratio_;
    double step_ = 0.0;
    Eigen::MatrixXcd A_;
    Eigen::MatrixXcd Q_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXcd vtilde_;
    double lambda_min_ = 0.0;
};

} // namespace pzbeam
