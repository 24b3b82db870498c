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
// Canonical convex subproblem representation and a log-barrier interior
// point solver. Decision vectors are real; complex beamformers enter as
// interleaved real/imaginary parts. The objective is a maximized concave
// function built from affine terms, negated quadratic-over-affine terms,
// negated squared hinges and concave log-of-affine terms; constraints are
// affine rows, affine equalities, and sums of quadratic-over-affine terms
// below an affine form (which covers norm-squared-below-affine when the
// denominator is constant). Quadratic forms appear only as sums of squared
// affine rows, so they are positive semidefinite by construction; every
// non-constant denominator carries an implicit strict-positivity domain.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pzbeam {

// Sparse affine functional a'x + c0.
struct LinForm {
    std::vector<int> idx;
    std::vector<double> coef;
    double c0 = 0.0;

    LinForm() = default;
    explicit LinForm(double c) : c0(c) {}

    LinForm& term(int i, double c) {
        idx.push_back(i);
        coef.push_back(c);
        return *this;
    }
    bool constant() const { return idx.empty(); }
    double eval(const Eigen::VectorXd& x) const {
        double s = c0;
        for (std::size_t k = 0; k < idx.size(); ++k) s += coef[k] * x(idx[k]);
        return s;
    }
    void axpy(Eigen::VectorXd& g, double s) const {
        for (std::size_t k = 0; k < idx.size(); ++k) g(idx[k]) += s * coef[k];
    }
};

// coef * (sum_i row_i(x)^2 + num_const) / den(x); coef, num_const >= 0 and
// den(x) > 0 on the domain. A constant denominator (den.idx empty) means a
// plain convex quadratic over den.c0.
struct QoaTerm {
    double coef = 1.0;
    std::vector<LinForm> rows;
    double num_const = 0.0;
    LinForm den{1.0};

    double numerator(const Eigen::VectorXd& x) const {
        double s = num_const;
        for (const auto& r : rows) {
            const double v = r.eval(x);
            s += v * v;
        }
        return s;
    }
    double eval(const Eigen::VectorXd& x) const { return coef * numerator(x) / den.eval(x); }
};

struct HingeTerm { // weight * max(0, arg)^2, weight >= 0
    double weight = 1.0;
    LinForm arg;
};

struct LogTerm { // coef * ln(arg), coef > 0, arg > 0 on the domain
    double coef = 1.0;
    LinForm arg;
};

struct Objective {
    LinForm lin;
    std::vector<QoaTerm> quad_neg;   // subtracted
    std::vector<HingeTerm> hinge_neg; // subtracted
    std::vector<LogTerm> logs;       // added

    double eval(const Eigen::VectorXd& x) const {
        double v = lin.eval(x);
        for (const auto& q : quad_neg) v -= q.eval(x);
        for (const auto& h : hinge_neg) {
            const double a = h.arg.eval(x);
            if (a > 0.0) v -= h.weight * a * a;
        }
        for (const auto& lg : logs) v += lg.coef * std::log(lg.arg.eval(x));
        return v;
    }
};

// sum of qoa terms + affine <= 0.
struct SmoothConstraint {
    std::vector<QoaTerm> terms;
    LinForm aff;
    std::string name;

    double eval(const Eigen::VectorXd& x) const {
        double v = aff.eval(x);
        for (const auto& t : terms) v += t.eval(x);
        return v;
    }
};

struct ConvexProgram {
    int n = 0;
    Objective obj;
    std::vector<LinForm> lin_ineq;            // a'x + c <= 0
    std::vector<SmoothConstraint> smooth_ineq;
    std::vector<LinForm> lin_eq;              // a'x + c = 0
    std::vector<std::string> var_names;
    bool trivially_infeasible = false;

    void dump(std::ostream& os) const;
};

enum class SolveStatus { optimal, max_iterations, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iterations: return "max-iterations";
        case SolveStatus::infeasible: return "infeasible-detected";
    }
    return "?";
}

struct SolveTolerances {
    double rel_gap = 1e-7;
    double feas = 1e-6;
    double stat = 1e-6;
    int max_newton = 4000;
};

struct SolveReport {
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double feasibility_residual = std::numeric_limits<double>::infinity();
    double stationarity_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    SolveStatus status = SolveStatus::max_iterations;
    std::vector<double> ineq_duals;        // lin_ineq first, then smooth_ineq
    std::vector<double> central_objectives; // objective after each centering stage
    std::string message;
};

namespace detail {

inline void dump_linform(std::ostream& os, const LinForm& f,
                         const std::vector<std::string>& names) {
    bool first = true;
    for (std::size_t k = 0; k < f.idx.size(); ++k) {
        const int i = f.idx[k];
        os << (first ? "" : " + ") << f.coef[k] << "*"
           << (i < static_cast<int>(names.size()) && !names[i].empty()
                   ? names[i]
                   : "x" + std::to_string(i));
        first = false;
    }
    if (first || f.c0 != 0.0) os << (first ? "" : " + ") << f.c0;
}

// Merged sparse vector workspace for rank-1 scatter updates. Duplicate
// indices are allowed; iterating all entry pairs reproduces the outer
// product of the merged vector.
struct SparseVec {
    std::vector<int> idx;
    std::vector<double> val;
    void clear() {
        idx.clear();
        val.clear();
    }
    void add(const LinForm& f, double s) {
        for (std::size_t k = 0; k < f.idx.size(); ++k) {
            idx.push_back(f.idx[k]);
            val.push_back(s * f.coef[k]);
        }
    }
};

inline bool solver_trace_enabled() {
    static const bool on = std::getenv("PZBEAM_SOLVER_TRACE") != nullptr;
    return on;
}

class BarrierSolver {
  public:
    BarrierSolver(const ConvexProgram& p, SolveTolerances tol) : P_(p), tol_(tol), n_(p.n) {
        collect_domains();
        m_bar_ = static_cast<int>(P_.lin_ineq.size() + P_.smooth_ineq.size() + domains_.size());
    }

    SolveReport run(const Eigen::VectorXd* warm) {
        SolveReport rep;
        if (P_.trivially_infeasible) {
            rep.status = SolveStatus::infeasible;
            rep.message = "constant constraint row violated at assembly";
            return rep;
        }
        for (const auto& f : P_.lin_ineq)
            if (f.constant() && f.c0 > 0.0) {
                rep.status = SolveStatus::infeasible;
                rep.message = "constant inequality violated";
                return rep;
            }
        Eigen::VectorXd x = warm ? *warm : Eigen::VectorXd::Zero(n_);
        if (x.size() != n_) throw std::invalid_argument("solve: warm start dimension mismatch");
        if (!domain_ok(x))
            throw std::invalid_argument("solve: start point outside the problem domain");

        if (max_constraint(x) >= 0.0) {
            if (!phase1(x, rep)) {
                rep.status = SolveStatus::infeasible;
                rep.message = "phase-I could not find a strictly feasible point";
                return rep;
            }
        }
        phase2(x, rep);
        return rep;
    }

  private:
    // ---- program wiring -------------------------------------------------

    void collect_domains() {
        auto key = [](const LinForm& f) {
            std::vector<std::pair<int, double>> v;
            for (std::size_t k = 0; k < f.idx.size(); ++k) v.emplace_back(f.idx[k], f.coef[k]);
            std::sort(v.begin(), v.end());
            return std::make_pair(v, f.c0);
        };
        std::map<std::pair<std::vector<std::pair<int, double>>, double>, bool> seen;
        auto consider = [&](const LinForm& den) {
            if (den.constant()) {
                if (!(den.c0 > 0.0))
                    throw std::invalid_argument("qoa term with nonpositive constant denominator");
                return;
            }
            auto k = key(den);
            if (!seen.count(k)) {
                seen[k] = true;
                domains_.push_back(den);
            }
        };
        for (const auto& q : P_.obj.quad_neg) consider(q.den);
        for (const auto& c : P_.smooth_ineq)
            for (const auto& q : c.terms) consider(q.den);
    }

    bool domain_ok(const Eigen::VectorXd& x) const {
        for (const auto& d : domains_)
            if (!(d.eval(x) > 0.0)) return false;
        for (const auto& lg : P_.obj.logs)
            if (!(lg.arg.eval(x) > 0.0)) return false;
        return true;
    }

    double max_constraint(const Eigen::VectorXd& x) const {
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& f : P_.lin_ineq) mx = std::max(mx, f.eval(x));
        for (const auto& c : P_.smooth_ineq) mx = std::max(mx, c.eval(x));
        return mx;
    }

    int n_con() const { return static_cast<int>(P_.lin_ineq.size() + P_.smooth_ineq.size()); }

    double con_value(int i, const Eigen::VectorXd& x) const {
        const int nl = static_cast<int>(P_.lin_ineq.size());
        return i < nl ? P_.lin_ineq[static_cast<std::size_t>(i)].eval(x)
                      : P_.smooth_ineq[static_cast<std::size_t>(i - nl)].eval(x);
    }

    // ---- Hessian accumulation helpers -----------------------------------

    void scatter_rank1(Eigen::MatrixXd& H, const SparseVec& v, double alpha) const {
        const std::size_t m = v.idx.size();
        for (std::size_t a = 0; a < m; ++a) {
            const int ia = v.idx[a];
            const double va = alpha * v.val[a];
            for (std::size_t b = 0; b < m; ++b) {
                const int ib = v.idx[b];
                if (ia >= ib) H(ia, ib) += va * v.val[b];
            }
        }
    }

    // Adds the gradient and PSD Hessian pieces of one qoa term, scaled by s.
    // grad and H have ny rows (ny = n_ or n_+1 in phase 1; the extra slack
    // coordinate never appears in program forms).
    void qoa_grad_hess(const QoaTerm& q, const Eigen::VectorXd& x, double s, Eigen::VectorXd* grad,
                       Eigen::MatrixXd* H) const {
        const double den = q.den.eval(x);
        const double inv = 1.0 / den;
        double num = q.num_const;
        row_vals_.clear();
        for (const auto& r : q.rows) {
            const double v = r.eval(x);
            row_vals_.push_back(v);
            num += v * v;
        }
        if (grad) {
            for (std::size_t k = 0; k < q.rows.size(); ++k)
                q.rows[k].axpy(*grad, s * q.coef * 2.0 * row_vals_[k] * inv);
            q.den.axpy(*grad, -s * q.coef * num * inv * inv);
        }
        if (H) {
            const double alpha = 2.0 * s * q.coef * inv;
            for (std::size_t k = 0; k < q.rows.size(); ++k) {
                ws_.clear();
                ws_.add(q.rows[k], 1.0);
                if (!q.den.constant()) ws_.add(q.den, -row_vals_[k] * inv);
                scatter_rank1(*H, ws_, alpha);
            }
            if (q.num_const > 0.0 && !q.den.constant()) {
                ws_.clear();
                ws_.add(q.den, inv);
                scatter_rank1(*H, ws_, alpha * q.num_const);
            }
        }
    }

    // Gradient of one qoa term into a dense vector (no Hessian).
    void qoa_grad(const QoaTerm& q, const Eigen::VectorXd& x, double s,
                  Eigen::VectorXd& grad) const {
        qoa_grad_hess(q, x, s, &grad, nullptr);
    }

    // ---- barrier evaluation ---------------------------------------------

    // phi = t * obj_min(x) + barriers. In phase 1 the objective is the slack
    // s = y(n_) and constraints are f_i(x) - s <= 0. Returns false when y is
    // outside the barrier domain.
    bool phi_value(const Eigen::VectorXd& y, double t, bool phase1_mode, double* out) const {
        const Eigen::VectorXd& x = y; // program forms only touch the first n_ coords
        if (!domain_ok(x)) return false;
        double phi;
        if (phase1_mode) {
            phi = t * y(n_);
        } else {
            phi = -t * P_.obj.lin.eval(x);
            for (const auto& q : P_.obj.quad_neg) phi += t * q.eval(x);
            for (const auto& h : P_.obj.hinge_neg) {
                const double a = h.arg.eval(x);
                if (a > 0.0) phi += t * h.weight * a * a;
            }
            for (const auto& lg : P_.obj.logs) phi -= t * lg.coef * std::log(lg.arg.eval(x));
        }
        const double s = phase1_mode ? y(n_) : 0.0;
        for (int i = 0; i < n_con(); ++i) {
            const double e = s - con_value(i, x);
            if (!(e > 0.0)) return false;
            phi -= std::log(e);
        }
        for (const auto& d : domains_) phi -= std::log(d.eval(x));
        if (!std::isfinite(phi)) return false;
        *out = phi;
        return true;
    }

    void phi_grad_hess(const Eigen::VectorXd& y, double t, bool phase1_mode, Eigen::VectorXd& g,
                       Eigen::MatrixXd& H) const {
        const int ny = static_cast<int>(y.size());
        const Eigen::VectorXd& x = y;
        g.setZero(ny);
        H.setZero(ny, ny);
        dense_cols_.resize(ny, static_cast<int>(P_.smooth_ineq.size()));
        int n_dense = 0;
        dual_scale_ = 0.0; // max_i lambda_i * |grad f_i|_inf, for the scaled KKT residual

        if (phase1_mode) {
            g(n_) += t;
        } else {
            P_.obj.lin.axpy(g, -t);
            for (const auto& q : P_.obj.quad_neg) qoa_grad_hess(q, x, t, &g, &H);
            for (const auto& h : P_.obj.hinge_neg) {
                const double a = h.arg.eval(x);
                if (a > 0.0) {
                    h.arg.axpy(g, t * h.weight * 2.0 * a);
                    ws_.clear();
                    ws_.add(h.arg, 1.0);
                    scatter_rank1(H, ws_, 2.0 * t * h.weight);
                }
            }
            for (const auto& lg : P_.obj.logs) {
                const double a = lg.arg.eval(x);
                lg.arg.axpy(g, -t * lg.coef / a);
                ws_.clear();
                ws_.add(lg.arg, 1.0);
                scatter_rank1(H, ws_, t * lg.coef / (a * a));
            }
        }

        const double s = phase1_mode ? y(n_) : 0.0;
        // affine inequality barriers
        for (const auto& f : P_.lin_ineq) {
            const double e = s - f.eval(x);
            const double inv = 1.0 / e;
            f.axpy(g, inv);
            if (phase1_mode) g(n_) -= inv;
            ws_.clear();
            ws_.add(f, 1.0);
            if (phase1_mode) {
                ws_.idx.push_back(n_);
                ws_.val.push_back(-1.0);
            }
            scatter_rank1(H, ws_, inv * inv);
            double amax = 0.0;
            for (double c : f.coef) amax = std::max(amax, std::abs(c));
            dual_scale_ = std::max(dual_scale_, amax * inv / t);
        }
        // smooth constraint barriers
        for (const auto& c : P_.smooth_ineq) {
            const double e = s - c.eval(x);
            const double inv = 1.0 / e;
            grad_ws_.setZero(ny);
            c.aff.axpy(grad_ws_, 1.0);
            for (const auto& q : c.terms) {
                qoa_grad_hess(q, x, inv, nullptr, &H); // curvature term (1/e) * hess f
                qoa_grad(q, x, 1.0, grad_ws_);
            }
            g += inv * grad_ws_;
            if (phase1_mode) g(n_) -= inv;
            dual_scale_ = std::max(dual_scale_, grad_ws_.cwiseAbs().maxCoeff() * inv / t);
            auto col = dense_cols_.col(n_dense++);
            col = inv * grad_ws_;
            if (phase1_mode) col(n_) = -inv;
        }
        // domain barriers
        for (const auto& d : domains_) {
            const double a = d.eval(x);
            const double inv = 1.0 / a;
            d.axpy(g, -inv);
            ws_.clear();
            ws_.add(d, 1.0);
            scatter_rank1(H, ws_, inv * inv);
        }
        if (n_dense > 0)
            H.selfadjointView<Eigen::Lower>().rankUpdate(dense_cols_.leftCols(n_dense), 1.0);
    }

    // ---- Newton stages ----------------------------------------------------

    // Gradient of the maximized objective (no barrier terms).
    void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad_obj) const {
        grad_obj.setZero(n_);
        P_.obj.lin.axpy(grad_obj, -1.0);
        for (const auto& q : P_.obj.quad_neg) qoa_grad(q, x, 1.0, grad_obj);
        for (const auto& h : P_.obj.hinge_neg) {
            const double a = h.arg.eval(x);
            if (a > 0.0) h.arg.axpy(grad_obj, h.weight * 2.0 * a);
        }
        for (const auto& lg : P_.obj.logs) lg.arg.axpy(grad_obj, -lg.coef / lg.arg.eval(x));
    }

    // Centers phi(., t); returns false if the iteration budget ran out.
    // When stat_target > 0 the stage additionally polishes until the scaled
    // dual residual |grad phi|_inf / (t * max(1, |grad F|_inf)) drops below it.
    bool center(Eigen::VectorXd& y, double t, bool phase1_mode, SolveReport& rep,
                const std::function<bool(const Eigen::VectorXd&)>& early_stop = nullptr,
                double stat_target = 0.0, int stage_max = 60) {
        double best_stat = std::numeric_limits<double>::infinity();
        int no_progress = 0;
        for (int it = 0; it < stage_max; ++it) {
            if (rep.iterations >= tol_.max_newton) return false;
            ++rep.iterations;
            phi_grad_hess(y, t, phase1_mode, g_, H_);
            if (stat_target > 0.0 && !phase1_mode) {
                objective_gradient(y.head(n_), grad_obj_ws_);
                const double denom =
                    std::max({1.0, grad_obj_ws_.cwiseAbs().maxCoeff(), dual_scale_});
                const double stat = g_.cwiseAbs().maxCoeff() / (t * denom);
                if (stat <= stat_target) return true;
                if (stat < 0.7 * best_stat) {
                    best_stat = stat;
                    no_progress = 0;
                } else if (++no_progress >= 3) {
                    return true;
                }
            }
            Eigen::VectorXd dy = solve_newton(H_, g_);
            const double dec = -g_.dot(dy);
            double phi0;
            if (!phi_value(y, t, phase1_mode, &phi0)) return true; // numerical edge; give up stage
            if (stat_target <= 0.0 && dec / 2.0 <= 1e-11 * (1.0 + std::abs(phi0))) return true;
            // Below the evaluation noise of phi, Armijo cannot certify the
            // (tiny) decrease; take the full step if it stays in the domain.
            const bool below_noise = dec / 2.0 <= 1e-11 * (1.0 + std::abs(phi0));
            // backtracking line search (domain first, then Armijo)
            double step = 1.0;
            double phi1;
            bool ok = false;
            while (step > 1e-16) {
                trial_ = y + step * dy;
                if (phi_value(trial_, t, phase1_mode, &phi1) &&
                    (below_noise || phi1 <= phi0 + 0.01 * step * g_.dot(dy))) {
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            if (solver_trace_enabled())
                std::fprintf(stderr, "    [it %d] t=%.3g phi=%.10g dec/2=%.3g step=%.3g %s\n",
                             rep.iterations, t, phi0, dec / 2.0, ok ? step : 0.0,
                             phase1_mode ? "(phase1)" : "");
            if (!ok) return true; // stalled; treat stage as converged
            y = trial_;
            if (early_stop && early_stop(y)) return true;
        }
        return true;
    }

    Eigen::VectorXd solve_newton(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) const {
        const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        double ridge = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Hwork_ = H;
            if (ridge > 0.0) Hwork_.diagonal().array() += ridge;
            Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(Hwork_);
            if (llt.info() == Eigen::Success) {
                Eigen::VectorXd dx = llt.solve(-g);
                // two rounds of iterative refinement; the barrier Hessian is
                // severely ill conditioned near the end of the path
                for (int r = 0; r < 2; ++r) {
                    Eigen::VectorXd resid =
                        -g - H.selfadjointView<Eigen::Lower>() * dx;
                    if (ridge > 0.0) resid -= ridge * dx;
                    dx += llt.solve(resid);
                }
                return dx;
            }
            ridge = (ridge == 0.0) ? 1e-12 * scale : ridge * 100.0;
        }
        return -g / scale;
    }

    bool phase1(Eigen::VectorXd& x, SolveReport& rep) {
        const double mx0 = max_constraint(x);
        Eigen::VectorXd y(n_ + 1);
        y.head(n_) = x;
        y(n_) = mx0 + 1.0 + 0.1 * std::abs(mx0);
        auto feasible_now = [&](const Eigen::VectorXd& yy) {
            return max_constraint(yy.head(n_)) < -1e-12;
        };
        double t = 1.0;
        const int m = m_bar_ + 1;
        for (int stage = 0; stage < 40; ++stage) {
            if (!center(y, t, true, rep, feasible_now)) break;
            if (feasible_now(y)) {
                x = y.head(n_);
                return true;
            }
            if (static_cast<double>(m) / t < 1e-9 * (1.0 + std::abs(y(n_)))) break;
            t *= 30.0;
        }
        if (feasible_now(y)) {
            x = y.head(n_);
            return true;
        }
        return false;
    }

    void phase2(Eigen::VectorXd& x, SolveReport& rep) {
        double t = 1.0;
        bool gap_reached = (m_bar_ == 0);
        bool budget_ok = true;
        for (int stage = 0; stage < 60 && budget_ok; ++stage) {
            budget_ok = center(x, t, false, rep);
            rep.central_objectives.push_back(P_.obj.eval(x));
            if (!budget_ok) break;
            if (m_bar_ == 0) {
                gap_reached = true;
                break;
            }
            // gap scaled against both the objective value and the active
            // multiplier scale, so penalty-heavy programs terminate at a
            // barrier stiffness double precision can still center
            const double gap = static_cast<double>(m_bar_) / t;
            if (gap <= tol_.rel_gap * (1.0 + std::abs(P_.obj.eval(x)) + dual_scale_)) {
                gap_reached = true;
                break;
            }
            t *= 30.0;
        }
        if (gap_reached && budget_ok && m_bar_ > 0)
            center(x, t, false, rep, nullptr, 0.3 * tol_.stat, 15);
        rep.x = x;
        rep.objective = P_.obj.eval(x);
        rep.feasibility_residual = n_con() > 0 ? std::max(0.0, max_constraint(x)) : 0.0;
        // duals and stationarity from the final barrier point
        rep.ineq_duals.assign(static_cast<std::size_t>(n_con()), 0.0);
        for (int i = 0; i < n_con(); ++i)
            rep.ineq_duals[static_cast<std::size_t>(i)] = 1.0 / (t * (-con_value(i, x)));
        phi_grad_hess(x, t, false, g_, H_);
        objective_gradient(x, grad_obj_ws_);
        const double denom = std::max({1.0, grad_obj_ws_.cwiseAbs().maxCoeff(), dual_scale_});
        rep.stationarity_residual = (g_ / t).cwiseAbs().maxCoeff() / denom;
        const bool ok = gap_reached && rep.feasibility_residual <= tol_.feas &&
                        rep.stationarity_residual <= tol_.stat;
        rep.status = ok ? SolveStatus::optimal : SolveStatus::max_iterations;
        if (!ok)
            rep.message = gap_reached ? "residual tolerances not met" : "iteration budget exhausted";
    }

    const ConvexProgram& P_;
    SolveTolerances tol_;
    int n_;
    int m_bar_ = 0;
    std::vector<LinForm> domains_;
    mutable SparseVec ws_;
    mutable std::vector<double> row_vals_;
    mutable Eigen::VectorXd grad_ws_;
    mutable double dual_scale_ = 0.0;
    mutable Eigen::MatrixXd dense_cols_;
    mutable Eigen::MatrixXd Hwork_;
    Eigen::VectorXd g_;
    Eigen::MatrixXd H_;
    Eigen::VectorXd trial_;
    Eigen::VectorXd grad_obj_ws_;
};

// Eliminates affine equalities by reparameterizing x = x_p + N z with N a
// kernel basis of the equality matrix.
struct EqualityReduction {
    Eigen::VectorXd x_particular;
    Eigen::MatrixXd kernel;
    ConvexProgram reduced;
    bool empty_kernel = false;

    Eigen::VectorXd lift(const Eigen::VectorXd& z) const {
        return x_particular + (empty_kernel ? Eigen::VectorXd::Zero(x_particular.size())
                                            : Eigen::VectorXd(kernel * z));
    }
};

inline LinForm transform_linform(const LinForm& f, const Eigen::VectorXd& xp,
                                 const Eigen::MatrixXd& N) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(xp.size());
    f.axpy(a, 1.0);
    Eigen::VectorXd az = N.transpose() * a;
    LinForm out;
    out.c0 = f.eval(xp);
    for (int i = 0; i < az.size(); ++i)
        if (az(i) != 0.0) out.term(i, az(i));
    return out;
}

inline EqualityReduction reduce_equalities(const ConvexProgram& P) {
    EqualityReduction red;
    const int me = static_cast<int>(P.lin_eq.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(me, P.n);
    Eigen::VectorXd b(me);
    for (int r = 0; r < me; ++r) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(P.n);
        P.lin_eq[static_cast<std::size_t>(r)].axpy(row, 1.0);
        E.row(r) = row;
        b(r) = -P.lin_eq[static_cast<std::size_t>(r)].c0;
    }
    red.x_particular = E.completeOrthogonalDecomposition().solve(b);
    if ((E * red.x_particular - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
        red.reduced.trivially_infeasible = true;
        return red;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
    red.kernel = lu.kernel();
    if (lu.dimensionOfKernel() == 0) {
        red.empty_kernel = true;
        red.kernel = Eigen::MatrixXd::Zero(P.n, 1);
    }
    const int nz = static_cast<int>(red.kernel.cols());
    ConvexProgram& R = red.reduced;
    R.n = nz;
    auto tf = [&](const LinForm& f) { return transform_linform(f, red.x_particular, red.kernel); };
    R.obj.lin = tf(P.obj.lin);
    for (const auto& q : P.obj.quad_neg) {
        QoaTerm t = q;
        t.rows.clear();
        for (const auto& r : q.rows) t.rows.push_back(tf(r));
        t.den = tf(q.den);
        R.obj.quad_neg.push_back(std::move(t));
    }
    for (const auto& h : P.obj.hinge_neg) R.obj.hinge_neg.push_back({h.weight, tf(h.arg)});
    for (const auto& lg : P.obj.logs) R.obj.logs.push_back({lg.coef, tf(lg.arg)});
    for (const auto& f : P.lin_ineq) R.lin_ineq.push_back(tf(f));
    for (const auto& c : P.smooth_ineq) {
        SmoothConstraint sc;
        sc.name = c.name;
        sc.aff = tf(c.aff);
        for (const auto& q : c.terms) {
            QoaTerm t = q;
            t.rows.clear();
            for (const auto& r : q.rows) t.rows.push_back(tf(r));
            t.den = tf(q.den);
            sc.terms.push_back(std::move(t));
        }
        R.smooth_ineq.push_back(std::move(sc));
    }
    return red;
}

} // namespace detail

// Solves the program to the requested tolerances. Deterministic given
// identical inputs. The warm start, when given, must lie in the domain of
// every denominator and log argument (strict feasibility is not required;
// a phase-I search runs when needed).
inline SolveReport solve(const ConvexProgram& program, const Eigen::VectorXd* warm_start = nullptr,
                         SolveTolerances tol = {}) {
    if (!program.lin_eq.empty()) {
        auto red = detail::reduce_equalities(program);
        if (red.reduced.trivially_infeasible) {
            SolveReport rep;
            rep.status = SolveStatus::infeasible;
            rep.message = "inconsistent equality constraints";
            return rep;
        }
        Eigen::VectorXd z0 = Eigen::VectorXd::Zero(red.reduced.n);
        if (warm_start) {
            Eigen::VectorXd dx = *warm_start - red.x_particular;
            z0 = red.kernel.completeOrthogonalDecomposition().solve(dx);
        }
        detail::BarrierSolver bs(red.reduced, tol);
        SolveReport rep = bs.run(&z0);
        if (rep.x.size() > 0) rep.x = red.lift(rep.x);
        return rep;
    }
    detail::BarrierSolver bs(program, tol);
    return bs.run(warm_start);
}

inline void ConvexProgram::dump(std::ostream& os) const {
    os << "convex program: " << n << " variables, " << lin_ineq.size() << " affine rows, "
       << smooth_ineq.size() << " smooth rows, " << lin_eq.size() << " equalities\n";
    os << "maximize:\n  linear: ";
    detail::dump_linform(os, obj.lin, var_names);
    os << "\n";
    for (const auto& q : obj.quad_neg) {
        os << "  - qoa(coef=" << q.coef << ", rows=" << q.rows.size() << ", num_const="
           << q.num_const << ") / [";
        detail::dump_linform(os, q.den, var_names);
        os << "]\n";
    }
    for (const auto& h : obj.hinge_neg) {
        os << "  - " << h.weight << " * max(0, ";
        detail::dump_linform(os, h.arg, var_names);
        os << ")^2\n";
    }
    for (const auto& lg : obj.logs) {
        os << "  + " << lg.coef << " * ln(";
        detail::dump_linform(os, lg.arg, var_names);
        os << ")\n";
    }
    os << "subject to:\n";
    for (std::size_t i = 0; i < lin_ineq.size(); ++i) {
        os << "  lin[" << i << "]: ";
        detail::dump_linform(os, lin_ineq[i], var_names);
        os << " <= 0\n";
    }
    for (std::size_t i = 0; i < smooth_ineq.size(); ++i) {
        const auto& c = smooth_ineq[i];
        os << "  smooth[" << i << "]" << (c.name.empty() ? "" : " (" + c.name + ")") << ": "
           << c.terms.size() << " qoa terms + ";
        detail::dump_linform(os, c.aff, var_names);
        os << " <= 0\n";
    }
    for (std::size_t i = 0; i < lin_eq.size(); ++i) {
        os << "  eq[" << i << "]: ";
        detail::dump_linform(os, lin_eq[i], var_names);
        os << " = 0\n";
    }
}

} // namespace pzbeam
