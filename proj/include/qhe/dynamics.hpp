// dynamics.hpp: fixed-step RK4 integration of the GKSL master equation with
// heat-current bookkeeping.
//
// When every channel is an eigenoperator of H (always true for channels from
// build_channels) the dissipator commutes with the free evolution, so the
// integrator works in the interaction picture: the coherent rotation is applied
// exactly through the eigenbasis of H and RK4 only has to resolve the slow
// dissipative rates. Other channel sets fall back to RK4 on the full generator
// in the lab frame, with dt shrunk to resolve the largest Bohr frequency.

#pragma once

#include "qhe/dissipation.hpp"
#include "qhe/qcore.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qhe {

using SuperMatrix = Eigen::MatrixXcd;
using SuperVector = Eigen::VectorXcd;

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvolutionConfig {
    double dt{0.01};
    double t_max{500.0};
    double steady_tol{1e-10};
    bool record_currents{false};

    void validate() const {
        detail::require(std::isfinite(dt) && dt > 0.0, "EvolutionConfig: dt must be positive");
        detail::require(std::isfinite(t_max) && t_max >= dt, "EvolutionConfig: t_max must be >= dt");
        detail::require(steady_tol > 0.0, "EvolutionConfig: steady_tol must be positive");
    }
};

struct CurrentSample {
    double t;
    double hot;
    double cold;
};

struct HeatLedger {
    double q_pos_hot{0.0};
    double q_pos_cold{0.0};
    double q_net_hot{0.0};
    double q_net_cold{0.0};
    std::vector<CurrentSample> samples;
};

struct IntegrationStats {
    long steps{0};
    double step{0.0};
    bool interaction_frame{true};
    double max_trace_drift_rate{0.0};        // |Tr - 1| per unit time, before renormalization
    double max_hermiticity_residual{0.0};    // before re-Hermitization
    double min_eigenvalue{1.0};
};

struct Evolution {
    DensityMatrix state;
    HeatLedger ledger;
    IntegrationStats stats;
};

// -i[H, rho] + L(rho)
inline Operator gksl_rhs(const DensityMatrix& rho, const Operator& h, const std::vector<DissipationChannel>& channels) {
    detail::require(rho.dim() == h.dim(), "gksl_rhs: dimension mismatch");
    const Matrix& r = rho.matrix();
    Matrix out = complex(0.0, -1.0) * (h.matrix() * r - r * h.matrix());
    out += detail::apply_dissipator(r, channels);
    return Operator(std::move(out));
}

// ------------------------------ Superoperators -------------------------------
// Column-major vectorization: vec(X rho Y) = (Y^T kron X) vec(rho).

namespace detail {

inline SuperMatrix dense(const Matrix& m) { return SuperMatrix(m); }

inline SuperMatrix dissipator_superoperator(const std::vector<const DissipationChannel*>& channels,
                                            const SuperMatrix& basis, int d) {
    const SuperMatrix id = SuperMatrix::Identity(d, d);
    SuperMatrix s = SuperMatrix::Zero(d * d, d * d);
    for (const auto* ch : channels) {
        const SuperMatrix a = basis.adjoint() * dense(ch->jump.matrix()) * basis;
        const SuperMatrix ad = a.adjoint();
        const SuperMatrix ada = ad * a;
        const SuperMatrix aad = a * ad;
        s += ch->rate_down * (Eigen::kroneckerProduct(a.conjugate(), a).eval()
                              - 0.5 * Eigen::kroneckerProduct(id, ada).eval()
                              - 0.5 * Eigen::kroneckerProduct(ada.transpose(), id).eval());
        if (ch->rate_up != 0.0) {
            s += ch->rate_up * (Eigen::kroneckerProduct(a.transpose(), ad).eval()
                                - 0.5 * Eigen::kroneckerProduct(id, aad).eval()
                                - 0.5 * Eigen::kroneckerProduct(aad.transpose(), id).eval());
        }
    }
    return s;
}

inline SuperMatrix rk4_step_matrix(const SuperMatrix& generator, double h) {
    const auto n = generator.rows();
    const SuperMatrix z = h * generator;
    // I + z + z^2/2 + z^3/6 + z^4/24, Horner form
    SuperMatrix p = SuperMatrix::Identity(n, n) + z / 4.0;
    p = SuperMatrix::Identity(n, n) + (z * p) / 3.0;
    p = SuperMatrix::Identity(n, n) + (z * p) / 2.0;
    p = SuperMatrix::Identity(n, n) + z * p;
    return p;
}

inline bool channels_covariant(const Operator& h, const std::vector<DissipationChannel>& channels) {
    const double hs = std::max(1.0, max_norm(h));
    for (const auto& ch : channels) {
        if (ch.jump.dim() != h.dim()) throw std::domain_error("integrate: channel dimension mismatch");
        if (eigenoperator_residual(h, ch) > 1e-8 * hs * std::max(1.0, max_norm(ch.jump))) return false;
    }
    return true;
}

// Everything needed to advance vec(rho) by one RK4 step in a fixed working basis.
class GkslStepper {
public:
    GkslStepper(const Operator& h, const std::vector<DissipationChannel>& channels, double dt, double duration)
        : d_(h.dim()) {
        const auto es = hermitian_eigensystem(h);
        energies_ = es.values;
        interaction_ = channels_covariant(h, channels);
        basis_ = interaction_ ? dense(es.vectors) : SuperMatrix::Identity(d_, d_);

        std::vector<const DissipationChannel*> hot, cold;
        for (const auto& ch : channels) {
            (ch.bath == BathLabel::hot ? hot : cold).push_back(&ch);
        }
        const SuperMatrix s_hot = dissipator_superoperator(hot, basis_, d_);
        const SuperMatrix s_cold = dissipator_superoperator(cold, basis_, d_);
        SuperMatrix generator = s_hot + s_cold;

        const SuperMatrix h_work = basis_.adjoint() * dense(h.matrix()) * basis_;
        if (!interaction_) {
            const SuperMatrix id = SuperMatrix::Identity(d_, d_);
            generator += complex(0.0, -1.0) * (Eigen::kroneckerProduct(id, h_work).eval()
                                               - Eigen::kroneckerProduct(h_work.transpose(), id).eval());
        }
        // J_X = Tr(H L_X(rho)) = vec(H^T) . (S_X vec(rho))
        const SuperMatrix ht = h_work.transpose();
        const Eigen::Map<const SuperVector> vht(ht.data(), d_ * d_);
        w_hot_ = vht.transpose() * s_hot;
        w_cold_ = vht.transpose() * s_cold;

        double step_cap = dt;
        if (!interaction_) {
            const double span = energies_.maxCoeff() - energies_.minCoeff();
            if (span > 0.0) step_cap = std::min(step_cap, 0.1 / span);
        }
        steps_ = std::max<long>(1, static_cast<long>(std::ceil(duration / step_cap - 1e-9)));
        h_ = duration / static_cast<double>(steps_);
        step_ = rk4_step_matrix(generator, h_);
    }

    int dim() const { return d_; }
    long steps() const { return steps_; }
    double step() const { return h_; }
    bool interaction_frame() const { return interaction_; }
    const SuperMatrix& step_matrix() const { return step_; }

    SuperVector to_working(const Matrix& rho) const {
        const SuperMatrix r = basis_.adjoint() * dense(rho) * basis_;
        return Eigen::Map<const SuperVector>(r.data(), d_ * d_);
    }

    // Working-frame vector at time t back to a lab-frame matrix.
    Matrix to_lab(const SuperVector& v, double t) const {
        SuperMatrix r = Eigen::Map<const SuperMatrix>(v.data(), d_, d_);
        if (interaction_) {
            for (int i = 0; i < d_; ++i) {
                for (int j = 0; j < d_; ++j) {
                    r(i, j) *= std::exp(complex(0.0, -(energies_(i) - energies_(j)) * t));
                }
            }
        }
        const SuperMatrix lab = basis_ * r * basis_.adjoint();
        return Matrix(lab);
    }

    double current_hot(const SuperVector& v) const { return (w_hot_ * v)(0).real(); }
    double current_cold(const SuperVector& v) const { return (w_cold_ * v)(0).real(); }

private:
    int d_;
    RealVector energies_;
    bool interaction_{true};
    SuperMatrix basis_;
    SuperMatrix step_;
    Eigen::RowVectorXcd w_hot_;
    Eigen::RowVectorXcd w_cold_;
    long steps_{1};
    double h_{0.0};
};

// Re-Hermitize and renormalize in place; returns (trace drift, hermiticity residual).
inline std::pair<double, double> normalize_in_place(SuperVector& v, int d) {
    Eigen::Map<SuperMatrix> r(v.data(), d, d);
    const double herm = (r - r.adjoint()).cwiseAbs().maxCoeff();
    const SuperMatrix sym = 0.5 * (r + r.adjoint());
    const double tr = sym.trace().real();
    r = sym / tr;
    return {std::abs(tr - 1.0), herm};
}

inline double min_eigenvalue(const SuperVector& v, int d) {
    const Eigen::Map<const SuperMatrix> r(v.data(), d, d);
    Eigen::SelfAdjointEigenSolver<SuperMatrix> solver(r, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

inline void check_positivity(double lo, double t) {
    if (!(lo >= tolerances().positivity_abort)) {  // also catches NaN
        throw IntegrationError("integrate: state lost positivity (min eigenvalue " + std::to_string(lo) + " at t = " +
                               std::to_string(t) + "); reduce dt");
    }
}

}  // namespace detail

inline std::vector<DissipationChannel> channel_union(const std::vector<DissipationChannel>& a,
                                                     const std::vector<DissipationChannel>& b) {
    std::vector<DissipationChannel> out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// RK4 from 0 to cfg.t_max. Channels are partitioned into hot and cold by their
// bath label; heat currents are sampled every step and integrated with the
// trapezoid rule, the positive parts clamping each negative step to zero.
inline Evolution integrate(const DensityMatrix& rho0, const Operator& h,
                           const std::vector<DissipationChannel>& channels, const EvolutionConfig& cfg) {
    cfg.validate();
    detail::require(rho0.dim() == h.dim(), "integrate: dimension mismatch");
    const detail::GkslStepper stepper(h, channels, cfg.dt, cfg.t_max);
    const int d = stepper.dim();
    const double dt = stepper.step();

    IntegrationStats stats;
    stats.steps = stepper.steps();
    stats.step = dt;
    stats.interaction_frame = stepper.interaction_frame();

    HeatLedger ledger;
    SuperVector v = stepper.to_working(rho0.matrix());
    double j_hot = stepper.current_hot(v);
    double j_cold = stepper.current_cold(v);
    if (cfg.record_currents) ledger.samples.push_back({0.0, j_hot, j_cold});

    stats.min_eigenvalue = detail::min_eigenvalue(v, d);
    constexpr long kPositivityStride = 16;
    for (long n = 1; n <= stepper.steps(); ++n) {
        v = stepper.step_matrix() * v;
        const auto [drift, herm] = detail::normalize_in_place(v, d);
        stats.max_trace_drift_rate = std::max(stats.max_trace_drift_rate, drift / dt);
        stats.max_hermiticity_residual = std::max(stats.max_hermiticity_residual, herm);

        const double t = static_cast<double>(n) * dt;
        const double nh = stepper.current_hot(v);
        const double nc = stepper.current_cold(v);
        const double dq_hot = 0.5 * dt * (j_hot + nh);
        const double dq_cold = 0.5 * dt * (j_cold + nc);
        ledger.q_net_hot += dq_hot;
        ledger.q_net_cold += dq_cold;
        ledger.q_pos_hot += std::max(0.0, dq_hot);
        ledger.q_pos_cold += std::max(0.0, dq_cold);
        j_hot = nh;
        j_cold = nc;
        if (cfg.record_currents) ledger.samples.push_back({t, nh, nc});

        if (n % kPositivityStride == 0 || n == stepper.steps()) {
            const double lo = detail::min_eigenvalue(v, d);
            stats.min_eigenvalue = std::min(stats.min_eigenvalue, lo);
            detail::check_positivity(lo, t);
        }
    }
    return {sanitized_state(stepper.to_lab(v, cfg.t_max)), std::move(ledger), stats};
}

// Same RK4 scheme without per-step bookkeeping: the step matrix is raised to
// the required power by repeated squaring. Used for long thermalization strokes
// where only the endpoint matters.
inline DensityMatrix propagate(const DensityMatrix& rho0, const Operator& h,
                               const std::vector<DissipationChannel>& channels, double duration, double dt = 0.01) {
    detail::require(rho0.dim() == h.dim(), "propagate: dimension mismatch");
    detail::require(dt > 0.0 && duration >= 0.0, "propagate: invalid duration or step");
    if (duration == 0.0) return rho0;
    const detail::GkslStepper stepper(h, channels, dt, duration);
    SuperVector v = stepper.to_working(rho0.matrix());
    SuperMatrix power = stepper.step_matrix();
    for (long n = stepper.steps(); n > 0; n >>= 1) {
        if (n & 1) v = power * v;
        if (n > 1) power = (power * power).eval();
    }
    detail::normalize_in_place(v, stepper.dim());
    detail::check_positivity(detail::min_eigenvalue(v, stepper.dim()), duration);
    return sanitized_state(stepper.to_lab(v, duration));
}

// Integrates until max|d rho/dt| < cfg.steady_tol or cfg.t_max, whichever comes first.
inline std::pair<DensityMatrix, double> evolve_to_steady(const DensityMatrix& rho0, const Operator& h,
                                                         const std::vector<DissipationChannel>& channels,
                                                         const EvolutionConfig& cfg) {
    cfg.validate();
    detail::require(rho0.dim() == h.dim(), "evolve_to_steady: dimension mismatch");
    if (max_norm(gksl_rhs(rho0, h, channels)) < cfg.steady_tol) return {rho0, 0.0};

    const detail::GkslStepper stepper(h, channels, cfg.dt, cfg.t_max);
    const int d = stepper.dim();
    SuperVector v = stepper.to_working(rho0.matrix());
    constexpr long kCheckStride = 10;
    for (long n = 1; n <= stepper.steps(); ++n) {
        v = stepper.step_matrix() * v;
        detail::normalize_in_place(v, d);
        if (n % kCheckStride == 0 || n == stepper.steps()) {
            const double t = static_cast<double>(n) * stepper.step();
            detail::check_positivity(detail::min_eigenvalue(v, d), t);
            DensityMatrix rho = sanitized_state(stepper.to_lab(v, t));
            if (max_norm(gksl_rhs(rho, h, channels)) < cfg.steady_tol || n == stepper.steps()) {
                return {std::move(rho), t};
            }
        }
    }
    return {sanitized_state(stepper.to_lab(v, cfg.t_max)), cfg.t_max};
}

}  // namespace qhe
