// engines.hpp: the four qutrit engines charging a two-level battery,
// sequential (heat / work / cold strokes) and simultaneous (one combined stroke
// followed by re-thermalization with the cold bath), each with out-and-out or
// fragmented couplings. Also the closed-form results for the sequential
// out-and-out engine, used as an oracle and as the optimizer objective.

#pragma once

#include "qhe/dissipation.hpp"
#include "qhe/dynamics.hpp"
#include "qhe/qcore.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qhe {

enum class EngineKind { SeqOut, SeqFrag, SimOut, SimFrag };

inline constexpr std::array<EngineKind, 4> kAllEngines{EngineKind::SeqOut, EngineKind::SeqFrag, EngineKind::SimOut,
                                                      EngineKind::SimFrag};

inline std::string to_string(EngineKind k) {
    switch (k) {
        case EngineKind::SeqOut: return "seq-out";
        case EngineKind::SeqFrag: return "seq-frag";
        case EngineKind::SimOut: return "sim-out";
        case EngineKind::SimFrag: return "sim-frag";
    }
    return "unknown";
}

inline std::optional<EngineKind> parse_engine_kind(std::string_view s) {
    for (auto k : kAllEngines) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

inline bool is_sequential(EngineKind k) { return k == EngineKind::SeqOut || k == EngineKind::SeqFrag; }
inline bool is_fragmented(EngineKind k) { return k == EngineKind::SeqFrag || k == EngineKind::SimFrag; }

struct EngineParams {
    EngineKind kind{EngineKind::SeqOut};
    double A{50.0};
    double T_H{20.0};
    double T_C{5.0};
    double lambda{std::numbers::pi / 2.0};  // omega_sb * t1, sequential engines
    double omega_sb{0.0};                   // simultaneous engines
    double t2{0.0};                         // simultaneous engines
    double kappa{1e-3};
    int n_cycles{2};                        // SeqFrag only
    double stroke_time{500.0};              // SeqFrag thermalization strokes
    double dt{0.01};

    void validate() const {
        detail::require(std::isfinite(A) && A > 0.0, "EngineParams: A must be positive");
        detail::require(std::isfinite(T_H) && T_H > 0.0, "EngineParams: T_H must be positive");
        detail::require(std::isfinite(T_C) && T_C > 0.0, "EngineParams: T_C must be positive");
        detail::require(std::isfinite(kappa) && kappa > 0.0, "EngineParams: kappa must be positive");
        detail::require(std::isfinite(dt) && dt > 0.0, "EngineParams: dt must be positive");
        if (is_sequential(kind)) {
            detail::require(std::isfinite(lambda), "EngineParams: lambda must be finite");
        } else {
            detail::require(std::isfinite(omega_sb) && omega_sb >= 0.0, "EngineParams: omega_sb must be >= 0");
            detail::require(omega_sb <= A / 2.0 * (1.0 + 1e-12), "EngineParams: omega_sb must not exceed A/2");
            detail::require(std::isfinite(t2) && t2 >= 0.0, "EngineParams: t2 must be >= 0");
        }
        if (kind == EngineKind::SeqFrag) {
            detail::require(n_cycles >= 2, "EngineParams: SeqFrag needs n_cycles >= 2");
            detail::require(std::isfinite(stroke_time) && stroke_time > 0.0, "EngineParams: stroke_time must be > 0");
        }
    }
};

struct CycleMetrics {
    double q_hot{0.0};              // Q_H, or positive hot-bath heat of the combined stroke
    double q_cold_stroke{0.0};      // heat released to the cold bath in the closing stroke
    double q_cold_in_stroke1{0.0};  // positive cold-bath intake of the combined stroke
    double q_total{0.0};
    double w_battery{0.0};
    double pcg{0.0};
    double eta{0.0};
    double closure{0.0};
};

class MetricError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Heaviside step with theta(0) = 0.
inline double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

// Total absorbed heat counts the closing-stroke heat only when it is absorbed.
inline CycleMetrics metrics_from(double q_hot, double q_cold_in_stroke1, double q_cold_stroke, double w_battery,
                                 double A, double closure = 0.0) {
    detail::require(A > 0.0, "metrics_from: A must be positive");
    CycleMetrics m;
    m.q_hot = q_hot;
    m.q_cold_in_stroke1 = q_cold_in_stroke1;
    m.q_cold_stroke = q_cold_stroke;
    m.q_total = q_hot + q_cold_in_stroke1 - q_cold_stroke * heaviside(-q_cold_stroke);
    m.w_battery = w_battery;
    m.pcg = 2.0 * w_battery / A * 100.0;
    m.closure = closure;
    if (m.q_total > 0.0) {
        m.eta = w_battery / m.q_total;
    } else if (w_battery > 1e-10 * A) {
        throw MetricError("metrics_from: battery gained work " + std::to_string(w_battery) +
                          " without absorbed heat (q_total = " + std::to_string(m.q_total) + ")");
    }
    return m;
}

// ------------------------------- Couplings ----------------------------------

// sum_{i != j} |i~><j~|
inline Operator qutrit_all_transitions() {
    Matrix m = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
    return Operator(std::move(m));
}

inline Operator qutrit_pair_coupling(int i, int j) { return qutrit_transition(i, j) + qutrit_transition(j, i); }

// S-B interaction: out-and-out w (J+ (x) s- + J- (x) s+); fragmented w (a12 (x) s+ + a21 (x) s-).
inline Operator work_stroke_hamiltonian(EngineKind kind, double A, double omega_sb) {
    detail::require(std::isfinite(A) && A > 0.0, "work_stroke_hamiltonian: A must be positive");
    if (is_fragmented(kind)) {
        return omega_sb * (kron(qutrit_transition(1, 2), sigma_plus()) + kron(qutrit_transition(2, 1), sigma_minus()));
    }
    return omega_sb * (kron(qutrit_raising(), sigma_minus()) + kron(qutrit_lowering(), sigma_plus()));
}

// H_S (x) I2 + I3 (x) H_B
inline Operator local_hamiltonian(double A) {
    return kron(qutrit_hamiltonian(A), Operator::identity(2)) + kron(Operator::identity(3), battery_hamiltonian(A));
}

inline Operator total_hamiltonian(EngineKind kind, double A, double omega_sb) {
    return local_hamiltonian(A) + work_stroke_hamiltonian(kind, A, omega_sb);
}

inline Operator hot_coupling(EngineKind kind) {
    return is_fragmented(kind) ? qutrit_pair_coupling(0, 2) : qutrit_all_transitions();
}

inline Operator cold_coupling(EngineKind kind) {
    return is_fragmented(kind) ? qutrit_pair_coupling(0, 1) : qutrit_all_transitions();
}

inline constexpr std::array<int, 2> kSystemBattery{3, 2};

// --------------------------- Closed-form results ----------------------------

struct SeqOutAnalytic {
    double q_hot;
    double w_battery;
};

inline SeqOutAnalytic analytic_seq_out(double A, double T_H, double T_C, double lambda) {
    detail::require(T_H > 0.0 && T_C > 0.0, "analytic_seq_out: temperatures must be positive");
    const double h = A / (2.0 * T_H);
    const double c = A / (2.0 * T_C);
    // cosh/sinh overflow near 710; the ratios below stay finite.
    double q_hot;
    if (std::max(c, h) < 300.0) {
        q_hot = A * (2.0 * std::sinh(c - h) + std::sinh(c) - std::sinh(h)) /
                ((2.0 * std::cosh(c) + 1.0) * (2.0 * std::cosh(h) + 1.0));
    } else {
        // A [sinh c/(1+2cosh c) - sinh h/(1+2cosh h)], each term evaluated stably
        auto ratio = [](double x) { return (1.0 - std::exp(-2.0 * x)) / (2.0 * (1.0 + std::exp(-2.0 * x)) + 2.0 * std::exp(-x)); };
        q_hot = A * (ratio(c) - ratio(h));
    }
    const double eh = std::exp(-h);  // divide numerator and denominator by e^{2h}
    const double w = A * (eh + eh * eh) * (1.0 - std::cos(2.0 * lambda)) / (4.0 * (eh * eh + eh + 1.0));
    return {q_hot, w};
}

inline double analytic_seq_out_wmax(double A, double T_H) {
    detail::require(A > 0.0 && T_H > 0.0, "analytic_seq_out_wmax: inputs must be positive");
    return analytic_seq_out(A, T_H, T_H, std::numbers::pi / 2.0).w_battery;
}

// ----------------------------- Shared strokes -------------------------------

namespace detail {

struct WorkStroke {
    DensityMatrix system;
    DensityMatrix battery;
    double w_battery;
};

// rho_S (x) |0><0| evolved under H_SB at unit coupling for time lambda.
inline WorkStroke sequential_work_stroke(EngineKind kind, double A, const DensityMatrix& rho_s, double lambda) {
    const DensityMatrix joint = kron(rho_s, DensityMatrix::basis_state(2, 0));
    const DensityMatrix out = unitary_evolve(joint, work_stroke_hamiltonian(kind, A, 1.0), lambda);
    DensityMatrix battery = partial_trace(out, kSystemBattery, 1);
    DensityMatrix system = partial_trace(out, kSystemBattery, 0);
    const double w = expectation(battery_hamiltonian(A), battery) + A / 4.0;
    return {std::move(system), std::move(battery), w};
}

}  // namespace detail

// --------------------------- Sequential engines -----------------------------

// Thermalization strokes reach the Gibbs endpoints exactly (out-and-out baths
// have the Gibbs state as unique fixed point); the work stroke is unitary.
inline CycleMetrics run_seq_out(const EngineParams& p) {
    p.validate();
    const Operator hs = qutrit_hamiltonian(p.A);
    const DensityMatrix rho_c = thermal_state(hs, p.T_C);
    const DensityMatrix rho_h = thermal_state(hs, p.T_H);
    const double q_hot = expectation(hs, rho_h) - expectation(hs, rho_c);
    const auto work = detail::sequential_work_stroke(EngineKind::SeqOut, p.A, rho_h, p.lambda);
    const double q_cold = expectation(hs, work.system) - expectation(hs, rho_c);
    return metrics_from(q_hot, 0.0, q_cold, work.w_battery, p.A, 0.0);
}

// One entry per cycle; each cycle starts from the previous cycle's final qutrit
// state and charges a fresh ground-state battery.
inline std::vector<CycleMetrics> run_seq_frag(const EngineParams& p) {
    p.validate();
    const Operator hs = qutrit_hamiltonian(p.A);
    const auto hot = build_channels(hs, hot_coupling(EngineKind::SeqFrag), {p.T_H, p.kappa, BathLabel::hot});
    const auto cold = build_channels(hs, cold_coupling(EngineKind::SeqFrag), {p.T_C, p.kappa, BathLabel::cold});

    std::vector<CycleMetrics> cycles;
    DensityMatrix rho = thermal_state(hs, p.T_C);
    for (int k = 0; k < p.n_cycles; ++k) {
        const DensityMatrix start = rho;
        const DensityMatrix heated = propagate(start, hs, hot, p.stroke_time, p.dt);
        const double q_hot = expectation(hs, heated) - expectation(hs, start);
        const auto work = detail::sequential_work_stroke(EngineKind::SeqFrag, p.A, heated, p.lambda);
        rho = propagate(work.system, hs, cold, p.stroke_time, p.dt);
        const double q_cold = expectation(hs, work.system) - expectation(hs, rho);
        cycles.push_back(metrics_from(q_hot, 0.0, q_cold, work.w_battery, p.A, trace_distance(start, rho)));
    }
    return cycles;
}

// -------------------------- Simultaneous engines ----------------------------

struct SimulatedCycle {
    CycleMetrics metrics;
    DensityMatrix initial;  // rho_C (x) |0><0|
    Evolution stroke;       // combined stroke, lab frame
    Operator hamiltonian;   // H_T
    std::vector<DissipationChannel> hot_channels;
    std::vector<DissipationChannel> cold_channels;
};

inline SimulatedCycle run_simultaneous(const EngineParams& p, bool record_currents = false) {
    p.validate();
    detail::require(!is_sequential(p.kind), "run_simultaneous: engine kind must be sim-out or sim-frag");
    const Operator hs = qutrit_hamiltonian(p.A);
    const Operator id2 = Operator::identity(2);
    const Operator ht = total_hamiltonian(p.kind, p.A, p.omega_sb);
    auto hot = build_channels(ht, kron(hot_coupling(p.kind), id2), {p.T_H, p.kappa, BathLabel::hot});
    auto cold = build_channels(ht, kron(cold_coupling(p.kind), id2), {p.T_C, p.kappa, BathLabel::cold});

    const DensityMatrix rho_c = thermal_state(hs, p.T_C);
    DensityMatrix initial = kron(rho_c, DensityMatrix::basis_state(2, 0));

    Evolution stroke{initial, {}, {}};
    if (p.t2 > 0.0) {
        EvolutionConfig cfg;
        cfg.dt = std::min(p.dt, p.t2);
        cfg.t_max = p.t2;
        cfg.record_currents = record_currents;
        stroke = integrate(initial, ht, channel_union(hot, cold), cfg);
    }

    const DensityMatrix battery = partial_trace(stroke.state, kSystemBattery, 1);
    const DensityMatrix system = partial_trace(stroke.state, kSystemBattery, 0);
    const double w = expectation(battery_hamiltonian(p.A), battery) + p.A / 4.0;
    // Closing stroke: exact re-thermalization with the (out-and-out) cold bath.
    const double q2 = expectation(hs, system) - expectation(hs, rho_c);
    CycleMetrics m = metrics_from(stroke.ledger.q_pos_hot, stroke.ledger.q_pos_cold, q2, w, p.A, 0.0);
    return {m, std::move(initial), std::move(stroke), ht, std::move(hot), std::move(cold)};
}

inline CycleMetrics run_sim_out(EngineParams p) {
    p.kind = EngineKind::SimOut;
    return run_simultaneous(p).metrics;
}

inline CycleMetrics run_sim_frag(EngineParams p) {
    p.kind = EngineKind::SimFrag;
    return run_simultaneous(p).metrics;
}

// Headline metrics of one engine run; SeqFrag reports its second cycle.
inline CycleMetrics run_engine(const EngineParams& p) {
    switch (p.kind) {
        case EngineKind::SeqOut: return run_seq_out(p);
        case EngineKind::SeqFrag: return run_seq_frag(p).at(1);
        case EngineKind::SimOut:
        case EngineKind::SimFrag: return run_simultaneous(p).metrics;
    }
    throw std::domain_error("run_engine: unknown engine kind");
}

}  // namespace qhe
