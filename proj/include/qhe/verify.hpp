// verify.hpp: fixed-seed verification battery behind `qhe verify`: GKSL
// invariants, Gibbs fixed points, closed-form and exact-exponential oracles,
// the listed jump operators of the simultaneous engines, and module properties.

#pragma once

#include "qhe/io.hpp"
#include "qhe/optimize.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qhe::verify {

struct Options {
    double kappa{1e-3};
    std::uint64_t seed{20240611};
};

struct Result {
    bool passed{false};
    std::string detail;
};

struct Check {
    std::string group;
    std::string name;
    std::function<Result(const Options&)> run;
};

struct Outcome {
    std::string group;
    std::string name;
    bool passed{false};
    std::string detail;
    double seconds{0.0};
};

// ------------------------------ Random inputs -------------------------------

using Rng = std::mt19937_64;

inline Matrix random_matrix(int d, Rng& rng) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = complex(g(rng), g(rng));
    }
    return m;
}

inline Operator random_hermitian(int d, Rng& rng) {
    const Matrix m = random_matrix(d, rng);
    return Operator(Matrix(0.5 * (m + m.adjoint())));
}

// Full-rank state from a Ginibre matrix.
inline DensityMatrix random_density(int d, Rng& rng) {
    const Matrix g = random_matrix(d, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(Operator(Matrix(0.5 * (rho + rho.adjoint()))));
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// A valid simultaneous-engine parameter set.
inline EngineParams random_sim_params(EngineKind kind, Rng& rng) {
    EngineParams p;
    p.kind = kind;
    p.A = uniform(rng, 1.0, 50.0);
    p.omega_sb = uniform(rng, 0.0, p.A / 2.0);
    p.T_H = uniform(rng, 0.5, 50.0);
    p.T_C = uniform(rng, 0.5, p.T_H);
    p.t2 = uniform(rng, 0.5, 10.0);
    return p;
}

inline std::string fmt(double x) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << x;
    return s.str();
}

inline Result bound(double value, double limit, const std::string& what) {
    return {value <= limit, what + " = " + fmt(value) + " (limit " + fmt(limit) + ")"};
}

// ------------------------- Exact generator oracle ---------------------------

// Full d^2 x d^2 generator assembled column by column from its action on the
// matrix units |i><j|, independently of the integrator's Kronecker assembly.
inline Eigen::MatrixXcd generator_matrix(const Operator& h, const std::vector<DissipationChannel>& channels) {
    const int d = h.dim();
    Eigen::MatrixXcd g(d * d, d * d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            const Matrix out = complex(0.0, -1.0) * (h.matrix() * e - e * h.matrix()) + detail::apply_dissipator(e, channels);
            for (int c = 0; c < d; ++c) {
                for (int r = 0; r < d; ++r) g(c * d + r, j * d + i) = out(r, c);
            }
        }
    }
    return g;
}

inline DensityMatrix exact_evolution(const DensityMatrix& rho0, const Operator& h,
                                     const std::vector<DissipationChannel>& channels, double t) {
    const int d = h.dim();
    const Eigen::MatrixXcd prop = (generator_matrix(h, channels) * t).exp();
    Eigen::VectorXcd v(d * d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) v(c * d + r) = rho0.matrix()(r, c);
    }
    const Eigen::VectorXcd out = prop * v;
    Matrix m(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) m(r, c) = out(c * d + r);
    }
    return sanitized_state(m);
}

// ------------------------- Listed jump operators ----------------------------

struct ListedOperator {
    std::string name;
    double omega;
    Operator op;
};

// |s~ b> with the battery index varying fastest.
inline Vector product_ket(int s, int b) {
    Vector v = Vector::Zero(6);
    v(2 * s + b) = 1.0;
    return v;
}

inline Operator ket_bra(const Vector& a, const Vector& b) { return Operator(Matrix(a * b.adjoint())); }

struct ListedBasis {
    std::vector<Vector> kets;
    std::vector<double> energies;
};

inline ListedBasis out_and_out_basis(double A, double w) {
    const double r = 1.0 / std::sqrt(2.0);
    return {{product_ket(0, 0), r * (product_ket(1, 0) - product_ket(0, 1)), r * (product_ket(1, 0) + product_ket(0, 1)),
             r * (product_ket(1, 1) - product_ket(2, 0)), r * (product_ket(1, 1) + product_ket(2, 0)), product_ket(2, 1)},
            {-3.0 * A / 4.0, -(A + 4.0 * w) / 4.0, (-A + 4.0 * w) / 4.0, (A - 4.0 * w) / 4.0, (A + 4.0 * w) / 4.0,
             3.0 * A / 4.0}};
}

inline ListedBasis fragmented_basis(double A, double w) {
    const double r = 1.0 / std::sqrt(2.0);
    return {{product_ket(0, 0), product_ket(1, 0), product_ket(0, 1), r * (product_ket(1, 1) - product_ket(2, 0)),
             r * (product_ket(1, 1) + product_ket(2, 0)), product_ket(2, 1)},
            {-3.0 * A / 4.0, -A / 4.0, -A / 4.0, (A - 4.0 * w) / 4.0, (A + 4.0 * w) / 4.0, 3.0 * A / 4.0}};
}

inline std::vector<ListedOperator> out_and_out_listing(double A, double w) {
    const auto b = out_and_out_basis(A, w);
    const auto& k = b.kets;
    auto kb = [&](int i, int j) { return ket_bra(k[i], k[j]); };
    const double r = 1.0 / std::sqrt(2.0);
    return {{"A1", (A + 2.0 * w) / 2.0, r * (kb(0, 2) + kb(3, 5))},
            {"A2", (A - 2.0 * w) / 2.0, r * (kb(0, 1) + kb(4, 5))},
            {"A3", A + w, r * (kb(0, 4) - kb(1, 5))},
            {"A4", A - w, r * (kb(2, 5) - kb(0, 3))},
            {"A5", A / 2.0, kb(2, 4) - kb(1, 3)}};
}

inline std::vector<ListedOperator> fragmented_hot_listing(double A, double w) {
    const auto b = fragmented_basis(A, w);
    const auto& k = b.kets;
    return {{"A1_H", A - w, -1.0 * ket_bra(k[0], k[3])}, {"A2_H", A + w, ket_bra(k[0], k[4])}, {"A3_H", A, ket_bra(k[2], k[5])}};
}

inline std::vector<ListedOperator> fragmented_cold_listing(double A, double w) {
    const auto b = fragmented_basis(A, w);
    const auto& k = b.kets;
    return {{"A1_C", A / 2.0, ket_bra(k[0], k[1])},
            {"A2_C", A / 2.0 - w, ket_bra(k[2], k[3])},
            {"A3_C", A / 2.0 + w, ket_bra(k[2], k[4])}};
}

// Relative residual of `listed` after projecting onto span{computed} (Frobenius).
inline double span_residual(const Operator& listed, const Operator& computed) {
    const Matrix& l = listed.matrix();
    const Matrix& c = computed.matrix();
    const complex coeff = (c.adjoint() * l).trace() / (c.adjoint() * c).trace();
    return (l - coeff * c).norm() / l.norm();
}

inline double basis_residual(const Operator& h, const ListedBasis& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < b.kets.size(); ++i) {
        const Vector v = b.kets[i];
        worst = std::max(worst, (h.matrix() * v - b.energies[i] * v).cwiseAbs().maxCoeff());
    }
    return worst;
}

struct ListingReport {
    bool counts_match{false};
    double worst_frequency_error{0.0};
    double worst_span_residual{0.0};
    std::string detail;
};

inline ListingReport compare_listing(const Operator& h, const Operator& coupling, const std::vector<ListedOperator>& listed) {
    const auto computed = eigenoperator_decomposition(h, coupling);
    ListingReport rep;
    rep.counts_match = computed.size() == listed.size();
    std::ostringstream s;
    s << computed.size() << " computed / " << listed.size() << " listed";
    for (const auto& l : listed) {
        const FrequencyComponent* match = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : computed) {
            if (std::abs(c.omega - l.omega) < best) {
                best = std::abs(c.omega - l.omega);
                match = &c;
            }
        }
        rep.worst_frequency_error = std::max(rep.worst_frequency_error, best);
        const double res = match ? span_residual(l.op, match->jump) : 1.0;
        rep.worst_span_residual = std::max(rep.worst_span_residual, res);
    }
    s << ", max |dw| " << fmt(rep.worst_frequency_error) << ", max span residual " << fmt(rep.worst_span_residual);
    rep.detail = s.str();
    return rep;
}

// ------------------------------ Rate oracle ---------------------------------

// Two-level population relaxation p(t) = p_inf + (p0 - p_inf) exp(-(g_down + g_up) t)
// for the upper level of a single channel.
inline double upper_population(double p_upper0, double p_pair, double g_down, double g_up, double t) {
    const double p_inf = p_pair * g_up / (g_down + g_up);
    return p_inf + (p_upper0 - p_inf) * std::exp(-(g_down + g_up) * t);
}

// ------------------------------- The checks ---------------------------------

inline std::vector<Check> checks() {
    std::vector<Check> out;
    auto add = [&](std::string group, std::string name, std::function<Result(const Options&)> f) {
        out.push_back({std::move(group), std::move(name), std::move(f)});
    };

    // ---- gksl
    add("gksl", "dissipator-traceless-hermitian", [](const Options& o) {
        Rng rng(o.seed);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const bool six = trial % 2;
            const Operator h = six ? total_hamiltonian(EngineKind::SimOut, 4.0, 0.7) : qutrit_hamiltonian(3.0);
            const Operator x = six ? kron(qutrit_all_transitions(), Operator::identity(2)) : qutrit_all_transitions();
            const auto ch = build_channels(h, x, {uniform(rng, 0.2, 5.0), o.kappa, BathLabel::hot});
            const Operator l = dissipator_apply(random_density(h.dim(), rng), ch);
            worst = std::max({worst, std::abs(l.trace()), l.hermiticity_residual()});
        }
        return bound(worst, 1e-12, "max |Tr L| / |L - L^dag|");
    });

    add("gksl", "eigenoperator-property", [](const Options& o) {
        double worst = 0.0;
        for (auto kind : kAllEngines) {
            const bool sim = !is_sequential(kind);
            const Operator h = sim ? total_hamiltonian(kind, 50.0, 10.0) : qutrit_hamiltonian(50.0);
            for (const Operator& c : {hot_coupling(kind), cold_coupling(kind)}) {
                const Operator x = sim ? kron(c, Operator::identity(2)) : c;
                for (const auto& ch : build_channels(h, x, {7.0, o.kappa, BathLabel::cold})) {
                    worst = std::max(worst, eigenoperator_residual(h, ch));
                }
            }
        }
        return bound(worst, 1e-9, "max |[H, A] + w A|");
    });

    add("gksl", "detailed-balance-rates", [](const Options& o) {
        double worst = 0.0;
        bool ordered = true;
        const Operator h = total_hamiltonian(EngineKind::SimOut, 20.0, 3.0);
        for (double T : {0.5, 3.0, 40.0}) {
            for (const auto& ch : build_channels(h, kron(qutrit_all_transitions(), Operator::identity(2)),
                                                 {T, o.kappa, BathLabel::hot})) {
                ordered = ordered && ch.rate_down > ch.rate_up && ch.rate_up >= 0.0;
                if (ch.rate_up > 0.0) worst = std::max(worst, std::abs(ch.rate_down / ch.rate_up / std::exp(ch.omega / T) - 1.0));
            }
        }
        auto r = bound(worst, 1e-9, "max relative error of rate_down/rate_up vs exp(w/T)");
        r.passed = r.passed && ordered;
        return r;
    });

    add("gksl", "integration-integrity", [](const Options& o) {
        Rng rng(o.seed + 1);
        double drift = 0.0, herm = 0.0, lo = 1.0;
        for (int trial = 0; trial < 6; ++trial) {
            EngineParams p = random_sim_params(trial % 2 ? EngineKind::SimFrag : EngineKind::SimOut, rng);
            p.kappa = o.kappa;
            const auto s = run_simultaneous(p).stroke.stats;
            drift = std::max(drift, s.max_trace_drift_rate);
            herm = std::max(herm, s.max_hermiticity_residual);
            lo = std::min(lo, s.min_eigenvalue);
        }
        const bool ok = drift <= 1e-9 && herm <= 1e-12 && lo >= -1e-8;
        return Result{ok, "drift/time " + fmt(drift) + ", hermiticity " + fmt(herm) + ", min eigenvalue " + fmt(lo)};
    });

    add("gksl", "dt-halving", [](const Options& o) {
        Rng rng(o.seed + 2);
        double worst = 0.0;
        for (int trial = 0; trial < 4; ++trial) {
            EngineParams p = random_sim_params(trial % 2 ? EngineKind::SimFrag : EngineKind::SimOut, rng);
            p.kappa = o.kappa;
            const auto a = run_simultaneous(p).stroke.state;
            p.dt /= 2.0;
            const auto b = run_simultaneous(p).stroke.state;
            worst = std::max(worst, detail::max_abs(a.matrix() - b.matrix()));
        }
        return bound(worst, 1e-8, "max entry change when halving dt");
    });

    add("gksl", "closed-system-limit", [](const Options& o) {
        Rng rng(o.seed + 3);
        const Operator h = random_hermitian(6, rng);
        const DensityMatrix rho = random_density(6, rng);
        EvolutionConfig cfg;
        cfg.t_max = 1.0;
        const auto ev = integrate(rho, h, {}, cfg);
        return bound(detail::max_abs(ev.state.matrix() - unitary_evolve(rho, h, 1.0).matrix()), 1e-8,
                     "max deviation from exact unitary evolution");
    });

    add("gksl", "first-law-ledger", [](const Options& o) {
        Rng rng(o.seed + 4);
        double worst = 0.0, neg = 0.0;
        for (int trial = 0; trial < 6; ++trial) {
            EngineParams p = random_sim_params(trial % 2 ? EngineKind::SimFrag : EngineKind::SimOut, rng);
            p.kappa = o.kappa;
            const auto run = run_simultaneous(p);
            const auto& l = run.stroke.ledger;
            const double de = expectation(run.hamiltonian, run.stroke.state) - expectation(run.hamiltonian, run.initial);
            worst = std::max(worst, std::abs(de - l.q_net_hot - l.q_net_cold));
            neg = std::max({neg, l.q_net_hot - l.q_pos_hot, l.q_net_cold - l.q_pos_cold, -l.q_pos_hot, -l.q_pos_cold});
        }
        auto r = bound(worst, 1e-6, "max |dE - q_net|");
        r.passed = r.passed && neg <= 0.0;
        r.detail += ", positive-part excess " + fmt(neg);
        return r;
    });

    add("gksl", "superoperator-exponential", [](const Options& o) {
        Rng rng(o.seed + 5);
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            EngineParams p = random_sim_params(trial % 2 ? EngineKind::SimFrag : EngineKind::SimOut, rng);
            p.kappa = o.kappa;
            const auto run = run_simultaneous(p);
            const auto exact = exact_evolution(run.initial, run.hamiltonian,
                                               channel_union(run.hot_channels, run.cold_channels), p.t2);
            worst = std::max(worst, trace_distance(exact, run.stroke.state));
        }
        return bound(worst, 1e-7, "max trace distance RK4 vs exp(L t)");
    });

    // ---- gibbs
    add("gibbs", "dissipator-fixed-point", [](const Options& o) {
        double worst = 0.0;
        for (double T : {0.3, 2.0, 30.0}) {
            const Operator hs = qutrit_hamiltonian(5.0);
            worst = std::max(worst, max_norm(gksl_rhs(thermal_state(hs, T), hs,
                                                      build_channels(hs, qutrit_all_transitions(), {T, o.kappa, BathLabel::hot}))));
            const Operator ht = total_hamiltonian(EngineKind::SimOut, 5.0, 1.1);
            const auto ch = build_channels(ht, kron(qutrit_all_transitions(), Operator::identity(2)), {T, o.kappa, BathLabel::cold});
            worst = std::max(worst, max_norm(gksl_rhs(thermal_state(ht, T), ht, ch)));
        }
        return bound(worst, 1e-10, "max |d rho/dt| at the Gibbs state");
    });

    add("gibbs", "relaxation-to-gibbs", [](const Options& o) {
        Rng rng(o.seed + 6);
        double worst = 0.0;
        for (int trial = 0; trial < 6; ++trial) {
            const bool six = trial % 2;
            const double T = uniform(rng, 0.5, 3.0);
            const Operator h = six ? total_hamiltonian(EngineKind::SimOut, 2.0, 0.3) : qutrit_hamiltonian(2.0);
            const Operator x = six ? kron(qutrit_all_transitions(), Operator::identity(2)) : qutrit_all_transitions();
            const auto ch = build_channels(h, x, {T, o.kappa, BathLabel::hot});
            const auto out = propagate(random_density(h.dim(), rng), h, ch, 4e4);
            worst = std::max(worst, trace_distance(out, thermal_state(h, T)));
        }
        return bound(worst, 1e-6, "max trace distance to the Gibbs state");
    });

    add("gibbs", "fragmented-rate-oracle", [](const Options& o) {
        // Hot channel |0~><2~| leaves the |1~> population alone and relaxes the
        // {0, 2} pair exponentially.
        const double A = 12.0, T = 9.0, t = 500.0;
        const Operator hs = qutrit_hamiltonian(A);
        const auto ch = build_channels(hs, hot_coupling(EngineKind::SeqFrag), {T, o.kappa, BathLabel::hot});
        if (ch.size() != 1) return Result{false, "expected one channel, got " + std::to_string(ch.size())};
        const DensityMatrix start = thermal_state(hs, 1.5);
        const auto end = propagate(start, hs, ch, t);
        const double p0 = start.matrix()(0, 0).real(), p1 = start.matrix()(1, 1).real(), p2 = start.matrix()(2, 2).real();
        const double expect2 = upper_population(p2, p0 + p2, ch[0].rate_down, ch[0].rate_up, t);
        const double err = std::max(std::abs(end.matrix()(2, 2).real() - expect2), std::abs(end.matrix()(1, 1).real() - p1));
        return bound(err, 1e-9, "max population error vs rate equation");
    });

    // ---- oracle
    add("oracle", "seq-out-closed-form", [](const Options&) {
        double worst = 0.0;
        const double A = 50.0;
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                for (int k = 0; k < 5; ++k) {
                    const double h = 0.05 + (5.0 - 0.05) * i / 4.0;
                    const double c = 0.05 + (5.0 - 0.05) * j / 4.0;
                    EngineParams p;
                    p.A = A;
                    p.T_H = A / (2.0 * h);
                    p.T_C = A / (2.0 * c);
                    p.lambda = std::numbers::pi * k / 4.0;
                    const auto m = run_seq_out(p);
                    const auto a = analytic_seq_out(p.A, p.T_H, p.T_C, p.lambda);
                    worst = std::max({worst, std::abs(m.q_hot - a.q_hot), std::abs(m.w_battery - a.w_battery)});
                }
            }
        }
        return bound(worst / A, 1e-10, "max |simulated - closed form| / A");
    });

    add("oracle", "seq-out-asymptote", [](const Options&) {
        EngineParams p;
        p.A = 50.0;
        p.T_H = 25000.0;
        p.T_C = 15.0;
        p.lambda = std::numbers::pi / 2.0;
        const double w = run_seq_out(p).w_battery;
        return bound(std::abs(w - 16.658), 0.01, "|W - 16.658| at h = 0.001");
    });

    add("oracle", "seq-out-unit-efficiency", [](const Options&) {
        int plateau = 0;
        for (double th = 15.0; th <= 100.0; th += 1.0) {
            EngineParams p;
            p.A = 50.0;
            p.T_H = th;
            p.T_C = 15.0;
            p.lambda = std::numbers::pi / 2.0;
            const auto m = run_seq_out(p);
            if (th > p.T_C && m.q_cold_stroke < 0.0 && m.eta == 1.0) ++plateau;
        }
        return Result{plateau > 0, std::to_string(plateau) + " T_H values with Q_C < 0 and eta = 1"};
    });

    // ---- appendix
    add("appendix", "out-and-out-eigenbasis", [](const Options&) {
        const double A = 50.0, w = 10.0;
        return bound(basis_residual(total_hamiltonian(EngineKind::SimOut, A, w), out_and_out_basis(A, w)), 1e-12,
                     "max |H v - E v| over listed eigenpairs");
    });

    add("appendix", "out-and-out-jump-operators", [](const Options&) {
        const double A = 50.0, w = 10.0;
        const auto rep = compare_listing(total_hamiltonian(EngineKind::SimOut, A, w),
                                         kron(qutrit_all_transitions(), Operator::identity(2)), out_and_out_listing(A, w));
        return Result{rep.counts_match && rep.worst_frequency_error <= 1e-9 && rep.worst_span_residual <= 1e-9, rep.detail};
    });

    add("appendix", "fragmented-eigenbasis", [](const Options&) {
        const double A = 50.0, w = 10.0;
        return bound(basis_residual(total_hamiltonian(EngineKind::SimFrag, A, w), fragmented_basis(A, w)), 1e-12,
                     "max |H v - E v| over listed eigenpairs");
    });

    add("appendix", "fragmented-jump-operators", [](const Options&) {
        const double A = 50.0, w = 10.0;
        const Operator h = total_hamiltonian(EngineKind::SimFrag, A, w);
        const Operator id2 = Operator::identity(2);
        const auto hot = compare_listing(h, kron(hot_coupling(EngineKind::SimFrag), id2), fragmented_hot_listing(A, w));
        const auto cold = compare_listing(h, kron(cold_coupling(EngineKind::SimFrag), id2), fragmented_cold_listing(A, w));
        const bool ok = hot.counts_match && cold.counts_match &&
                        std::max(hot.worst_frequency_error, cold.worst_frequency_error) <= 1e-9 &&
                        std::max(hot.worst_span_residual, cold.worst_span_residual) <= 1e-9;
        return Result{ok, "hot: " + hot.detail + "; cold: " + cold.detail};
    });

    // ---- properties
    add("properties", "kron-associativity", [](const Options& o) {
        Rng rng(o.seed + 7);
        const Operator a = random_hermitian(2, rng), b = random_hermitian(2, rng), c = random_hermitian(2, rng);
        const Operator l = kron(kron(a, b), c), r = kron(a, kron(b, c));
        auto res = bound(max_norm(l - r), 1e-12, "max |(a x b) x c - a x (b x c)|");
        res.passed = res.passed && l.dim() == 8;
        return res;
    });

    add("properties", "partial-trace-factors", [](const Options& o) {
        Rng rng(o.seed + 8);
        const DensityMatrix s = random_density(3, rng), b = random_density(2, rng);
        const DensityMatrix joint = kron(s, b);
        const double err = std::max(detail::max_abs(partial_trace(joint, kSystemBattery, 0).matrix() - s.matrix()),
                                    detail::max_abs(partial_trace(joint, kSystemBattery, 1).matrix() - b.matrix()));
        return bound(err, 1e-12, "max factor reconstruction error");
    });

    add("properties", "trace-distance-metric", [](const Options& o) {
        Rng rng(o.seed + 9);
        double violation = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto a = random_density(4, rng), b = random_density(4, rng), c = random_density(4, rng);
            const double ab = trace_distance(a, b), bc = trace_distance(b, c), ac = trace_distance(a, c);
            violation = std::max({violation, ac - ab - bc, std::abs(ab - trace_distance(b, a)), ab - 1.0, -ab});
        }
        return bound(violation, 1e-12, "max triangle/symmetry/range violation");
    });

    add("properties", "unitary-spectrum", [](const Options& o) {
        Rng rng(o.seed + 10);
        const Operator h = random_hermitian(6, rng);
        const DensityMatrix rho = random_density(6, rng);
        const DensityMatrix out = unitary_evolve(rho, h, 3.7);
        const double err = (eigenvalues(rho.op()) - eigenvalues(out.op())).cwiseAbs().maxCoeff();
        return bound(std::max(err, std::abs(out.op().trace() - 1.0)), 1e-12, "max spectrum/trace change");
    });

    add("properties", "thermal-populations-ordered", [](const Options&) {
        bool ok = true;
        for (double T : {0.1, 1.0, 10.0}) {
            const auto rho = thermal_state(qutrit_hamiltonian(2.0), T).matrix();
            ok = ok && rho(0, 0).real() > rho(1, 1).real() && rho(1, 1).real() > rho(2, 2).real();
        }
        return Result{ok, ok ? "populations decrease with energy" : "population ordering violated"};
    });

    add("properties", "work-stroke-commutes", [](const Options&) {
        double worst = 0.0;
        for (auto kind : {EngineKind::SeqOut, EngineKind::SeqFrag}) {
            worst = std::max(worst, max_norm(commutator(work_stroke_hamiltonian(kind, 50.0, 1.0), local_hamiltonian(50.0))));
        }
        return bound(worst, 1e-12, "max |[H_SB, H_S + H_B]|");
    });

    add("properties", "work-stroke-energy-conservation", [](const Options& o) {
        Rng rng(o.seed + 11);
        double worst = 0.0;
        const Operator h0 = local_hamiltonian(50.0);
        for (auto kind : {EngineKind::SeqOut, EngineKind::SeqFrag}) {
            const Operator hsb = work_stroke_hamiltonian(kind, 50.0, 1.0);
            const DensityMatrix joint = kron(thermal_state(qutrit_hamiltonian(50.0), 20.0), DensityMatrix::basis_state(2, 0));
            for (int k = 0; k <= 8; ++k) {
                const double lambda = std::numbers::pi * k / 8.0;
                worst = std::max(worst, std::abs(expectation(h0, unitary_evolve(joint, hsb, lambda)) - expectation(h0, joint)));
            }
        }
        return bound(worst, 1e-10, "max drift of <H_S + H_B> along the work stroke");
    });

    add("properties", "seq-out-tc-independence", [](const Options&) {
        double spread = 0.0;
        bool unit = true;
        EngineParams p;
        p.A = 50.0;
        p.T_H = 40.0;
        p.lambda = std::numbers::pi / 2.0;
        p.T_C = 1.0;
        const double w0 = run_seq_out(p).w_battery;
        for (double tc : {2.0, 5.0, 15.0, 30.0, 40.0}) {
            p.T_C = tc;
            const auto m = run_seq_out(p);
            spread = std::max(spread, std::abs(m.w_battery - w0));
            if (m.q_cold_stroke < 0.0) unit = unit && std::abs(m.eta - 1.0) <= 1e-12;
        }
        auto r = bound(spread, 1e-12, "max W change across T_C");
        r.passed = r.passed && unit;
        return r;
    });

    add("properties", "battery-bounds", [](const Options& o) {
        Rng rng(o.seed + 12);
        double low = 0.0, high = 0.0;
        for (int k = 0; k <= 8; ++k) {
            EngineParams p;
            p.A = 30.0;
            p.T_H = 25.0;
            p.T_C = 3.0;
            p.lambda = std::numbers::pi * k / 8.0;
            for (auto kind : {EngineKind::SeqOut, EngineKind::SeqFrag}) {
                p.kind = kind;
                const auto m = run_engine(p);
                low = std::min(low, m.w_battery);
                high = std::max(high, m.pcg);
            }
        }
        for (int trial = 0; trial < 4; ++trial) {
            EngineParams p = random_sim_params(trial % 2 ? EngineKind::SimFrag : EngineKind::SimOut, rng);
            p.kappa = o.kappa;
            const auto m = run_engine(p);
            low = std::min(low, m.w_battery);
            high = std::max(high, m.pcg);
        }
        const bool ok = low >= -1e-12 && high <= 100.0 + 1e-9;
        return Result{ok, "min W " + fmt(low) + ", max pcg " + fmt(high)};
    });

    add("properties", "seq-frag-periodicity", [](const Options& o) {
        EngineParams p;
        p.kind = EngineKind::SeqFrag;
        p.A = 40.0;
        p.T_H = 30.0;
        p.T_C = 2.0;
        p.kappa = o.kappa;
        p.n_cycles = 5;
        const auto cycles = run_seq_frag(p);
        double worst = 0.0;
        for (std::size_t k = 2; k < cycles.size(); ++k) {
            worst = std::max({worst, std::abs(cycles[k].w_battery - cycles[1].w_battery),
                              std::abs(cycles[k].q_hot - cycles[1].q_hot),
                              std::abs(cycles[k].q_cold_stroke - cycles[1].q_cold_stroke)});
        }
        return bound(worst, 1e-3 * p.A, "max change of cycles >= 3 vs cycle 2");
    });

    add("properties", "equal-temperature-symmetry", [](const Options& o) {
        EngineParams p;
        p.kind = EngineKind::SimOut;
        p.A = 30.0;
        p.omega_sb = 4.0;
        p.T_H = p.T_C = 12.0;
        p.t2 = 7.0;
        p.kappa = o.kappa;
        const auto& l = run_simultaneous(p).stroke.ledger;
        return bound(std::abs(l.q_net_hot - l.q_net_cold), 1e-8, "|q_net_hot - q_net_cold|");
    });

    add("properties", "sim-frag-second-stroke-sign", [](const Options& o) {
        // closing-stroke heat keeps its sign (absorption shows up as negative)
        EngineParams p;
        p.kind = EngineKind::SimFrag;
        p.A = 50.0;
        p.omega_sb = 20.0;
        p.T_H = p.T_C = 50.0;
        p.t2 = 10.0;
        p.kappa = o.kappa;
        const auto m = run_engine(p);
        const bool ok = m.q_cold_stroke < 0.0 && std::abs(m.q_total - (m.q_hot + m.q_cold_in_stroke1 - m.q_cold_stroke)) <= 1e-12;
        return Result{ok, "Q_2 = " + fmt(m.q_cold_stroke) + ", Q_T = " + fmt(m.q_total)};
    });

    add("properties", "optimizer-determinism", [](const Options& o) {
        SearchSpace space = SearchSpace::bounded_by(20.0);
        space.kappa = o.kappa;
        const Budget b{3, 30, 1};
        const auto r1 = maximize_work(EngineKind::SeqFrag, space, b);
        const auto r2 = maximize_work(EngineKind::SeqFrag, space, b);
        const bool same = r1.best_metrics.w_battery == r2.best_metrics.w_battery && r1.best_params.A == r2.best_params.A &&
                          r1.best_params.T_H == r2.best_params.T_H && r1.best_params.T_C == r2.best_params.T_C &&
                          r1.best_params.lambda == r2.best_params.lambda && r1.evaluations == r2.evaluations;
        return Result{same, "W* = " + format_number(r1.best_metrics.w_battery)};
    });

    add("properties", "parallel-matches-serial", [](const Options& o) {
        SearchSpace space = SearchSpace::bounded_by(30.0);
        space.kappa = o.kappa;
        const auto serial = maximize_work(EngineKind::SimFrag, space, Budget{2, 10, 1});
        const auto parallel = maximize_work(EngineKind::SimFrag, space, Budget{2, 10, 3});
        const bool same = serial.best_metrics.w_battery == parallel.best_metrics.w_battery &&
                          serial.best_params.omega_sb == parallel.best_params.omega_sb &&
                          serial.best_params.t2 == parallel.best_params.t2;
        return Result{same, "W* = " + format_number(serial.best_metrics.w_battery)};
    });

    add("properties", "optimizer-feasibility", [](const Options& o) {
        SearchSpace space = SearchSpace::bounded_by(15.0);
        space.kappa = o.kappa;
        bool ok = true;
        for (auto kind : kAllEngines) {
            const auto r = maximize_work(kind, space, Budget{3, 20, 1}, {}, true);
            const auto& p = r.best_params;
            ok = ok && p.T_C <= p.T_H && p.T_H <= 15.0 && p.A <= 50.0 && p.omega_sb <= p.A / 2.0 && p.t2 <= 10.0;
            // seq-out candidates are scored with the closed form, the optimum is re-simulated
            const double slack = 1e-12 * std::max(1.0, std::abs(r.best_metrics.w_battery));
            for (const auto& t : r.trace) ok = ok && r.best_metrics.w_battery + slack >= t.w_battery;
        }
        return Result{ok, ok ? "optima feasible and dominate their traces" : "constraint or trace violation"};
    });

    add("properties", "csv-json-roundtrip", [](const Options&) {
        Table t;
        t.columns = sweep_columns();
        Rng rng(7);
        for (int r = 0; r < 5; ++r) {
            std::vector<double> row;
            for (std::size_t c = 0; c < t.columns.size(); ++c) row.push_back(round12(uniform(rng, -100.0, 100.0)));
            t.rows.push_back(std::move(row));
        }
        std::stringstream csv;
        write_csv(csv, t);
        const Table back = read_csv(csv);
        const Table from_json = table_from_json(nlohmann::json::parse(table_json(t).dump()));
        const bool ok = back == t && from_json == t;
        return Result{ok, ok ? "tables identical after CSV and JSON round trips" : "round trip changed the table"};
    });

    return out;
}

// `only` selects a group or a single check by name; empty runs everything.
// Exceptions raised by a check count as failures.
inline std::vector<Outcome> run(const Options& opt, std::string_view only = {}) {
    std::vector<Outcome> out;
    for (const auto& c : checks()) {
        if (!only.empty() && only != c.group && only != c.name) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{c.group, c.name, false, "", 0.0};
        try {
            const Result r = c.run(opt);
            o.passed = r.passed;
            o.detail = r.detail;
        } catch (const std::exception& e) {
            o.detail = std::string("exception: ") + e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace qhe::verify
