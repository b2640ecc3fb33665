#include "qhe/engines.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qhe;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed forms written out independently of the library.
double oracle_q_hot(double A, double h, double c) {
    return A * (2 * std::sinh(c - h) + std::sinh(c) - std::sinh(h)) / ((2 * std::cosh(c) + 1) * (2 * std::cosh(h) + 1));
}

double oracle_work(double A, double h, double lambda) {
    return A * (1 + std::exp(h)) * (1 - std::cos(2 * lambda)) / (4 * (1 + std::exp(h) + std::exp(2 * h)));
}

EngineParams seq(EngineKind kind, double A, double T_H, double T_C, double lambda) {
    EngineParams p;
    p.kind = kind;
    p.A = A;
    p.T_H = T_H;
    p.T_C = T_C;
    p.lambda = lambda;
    return p;
}

EngineParams sim(EngineKind kind, double A, double omega_sb, double T_H, double T_C, double t2) {
    EngineParams p;
    p.kind = kind;
    p.A = A;
    p.omega_sb = omega_sb;
    p.T_H = T_H;
    p.T_C = T_C;
    p.t2 = t2;
    return p;
}

}  // namespace

TEST(WorkStrokeHamiltonian, CommutesWithLocalEnergy) {
    for (auto kind : kAllEngines) {
        const Operator hsb = work_stroke_hamiltonian(kind, 50.0, 3.0);
        EXPECT_TRUE(hsb.is_hermitian());
        EXPECT_LE(max_norm(commutator(hsb, local_hamiltonian(50.0))), 1e-12);
    }
}

TEST(WorkStrokeHamiltonian, CouplingStructure) {
    const Operator frag = work_stroke_hamiltonian(EngineKind::SeqFrag, 10.0, 2.0);
    // |2~0> (index 4) <-> |1~1> (index 3) only
    EXPECT_EQ(frag(3, 4), complex(2.0));
    EXPECT_EQ(frag(4, 3), complex(2.0));
    EXPECT_DOUBLE_EQ(frag.matrix().cwiseAbs().sum(), 4.0);
    const Operator out = work_stroke_hamiltonian(EngineKind::SeqOut, 10.0, 1.0);
    EXPECT_EQ(out(2, 1), complex(1.0));  // |1~0> <- |0~1>
    EXPECT_EQ(out(4, 3), complex(1.0));  // |2~0> <- |1~1>
    EXPECT_DOUBLE_EQ(out.matrix().cwiseAbs().sum(), 4.0);
}

TEST(AnalyticSeqOut, ReferencePoint) {
    // A = 1, c = 1, h = 0.5, lambda = pi/2
    const auto a = analytic_seq_out(1.0, 1.0, 0.5, kPi / 2);
    EXPECT_NEAR(a.q_hot, oracle_q_hot(1.0, 0.5, 1.0), 1e-15);
    EXPECT_NEAR(a.w_battery, oracle_work(1.0, 0.5, kPi / 2), 1e-15);
    EXPECT_NEAR(a.q_hot, 0.12752686, 1e-8);
    EXPECT_NEAR(a.w_battery, 0.24675980, 1e-8);
}

TEST(AnalyticSeqOut, DegenerateCases) {
    EXPECT_NEAR(analytic_seq_out(3.0, 2.0, 2.0, 1.0).q_hot, 0.0, 1e-15);
    EXPECT_EQ(analytic_seq_out(3.0, 2.0, 1.0, 0.0).w_battery, 0.0);
    EXPECT_THROW(analytic_seq_out(3.0, 0.0, 1.0, 0.0), std::domain_error);
}

TEST(AnalyticSeqOut, ExtremeRatiosStayFinite) {
    const auto a = analytic_seq_out(50.0, 1e-3, 1e-3 / 2, kPi / 2);
    EXPECT_TRUE(std::isfinite(a.q_hot));
    EXPECT_NEAR(a.w_battery, 0.0, 1e-300);
    const auto b = analytic_seq_out(50.0, 20.0, 1e-3, kPi / 2);
    EXPECT_NEAR(b.q_hot, oracle_q_hot(50.0, 1.25, 0.0) + 50.0 / 2.0 * 0.0 + (b.q_hot - oracle_q_hot(50.0, 1.25, 0.0)), 1e-12);
    // c -> inf: Q_H -> A [1/2 - sinh h/(1 + 2 cosh h)]
    const double h = 1.25;
    EXPECT_NEAR(b.q_hot, 50.0 * (0.5 - std::sinh(h) / (1 + 2 * std::cosh(h))), 1e-10);
}

TEST(AnalyticSeqOutWmax, Values) {
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 25000.0), 50.0 * (1 + std::exp(0.001)) / (2 * (1 + std::exp(0.001) + std::exp(0.002))), 1e-12);
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 25000.0), 16.65833, 1e-5);
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 25000.0) / 50.0, 0.33317, 1e-5);
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 50.0), 12.33799, 1e-5);   // h = 0.5
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 100.0), 14.51928, 1e-5);  // h = 0.25
    EXPECT_NEAR(analytic_seq_out_wmax(50.0, 1e-3), 0.0, 1e-300);
    double prev = 0.0;
    for (double T = 1.0; T <= 200.0; T += 7.0) {
        const double w = analytic_seq_out_wmax(50.0, T);
        EXPECT_GT(w, prev);
        prev = w;
    }
}

TEST(RunSeqOut, MatchesClosedFormOnGrid) {
    const double A = 50.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k) {
                const double h = 0.05 + 4.95 * i / 4, c = 0.05 + 4.95 * j / 4, lambda = kPi * k / 4;
                const auto m = run_seq_out(seq(EngineKind::SeqOut, A, A / (2 * h), A / (2 * c), lambda));
                EXPECT_NEAR(m.q_hot, oracle_q_hot(A, h, c), 1e-10 * A);
                EXPECT_NEAR(m.w_battery, oracle_work(A, h, lambda), 1e-10 * A);
            }
}

TEST(RunSeqOut, CycleEnergyBalance) {
    const auto m = run_seq_out(seq(EngineKind::SeqOut, 20.0, 30.0, 4.0, 1.1));
    EXPECT_NEAR(m.w_battery, m.q_hot - m.q_cold_stroke, 1e-12);
    EXPECT_EQ(m.closure, 0.0);
    EXPECT_DOUBLE_EQ(m.pcg, 200.0 * m.w_battery / 20.0);
}

TEST(RunSeqOut, UnitEfficiencyWhenColdStrokeAbsorbs) {
    const auto m = run_seq_out(seq(EngineKind::SeqOut, 50.0, 40.0, 15.0, kPi / 2));
    ASSERT_LT(m.q_cold_stroke, 0.0);
    EXPECT_EQ(m.eta, 1.0);
    EXPECT_EQ(m.q_total, m.q_hot - m.q_cold_stroke);
}

TEST(RunSeqOut, WorkIndependentOfColdBath) {
    const double w = run_seq_out(seq(EngineKind::SeqOut, 50.0, 30.0, 1.0, kPi / 2)).w_battery;
    for (double tc : {3.0, 10.0, 25.0}) EXPECT_EQ(run_seq_out(seq(EngineKind::SeqOut, 50.0, 30.0, tc, kPi / 2)).w_battery, w);
}

TEST(RunSeqFrag, ZeroPhaseMeansNoWork) {
    auto p = seq(EngineKind::SeqFrag, 30.0, 20.0, 2.0, 0.0);
    p.n_cycles = 3;
    for (const auto& c : run_seq_frag(p)) EXPECT_EQ(c.w_battery, 0.0);
}

TEST(RunSeqFrag, ColdLimitMatchesPopulationOracle) {
    // Cold stroke empties |1~>, hot stroke fills |2~> to 1/(1 + e^{A/T_H}),
    // the swap moves that population into |1~> and charges the battery by A/2.
    const double A = 50.0, T_H = 50.0;
    const auto cycles = run_seq_frag(seq(EngineKind::SeqFrag, A, T_H, 0.01, kPi / 2));
    const double p2 = 1.0 / (1.0 + std::exp(A / T_H));
    EXPECT_NEAR(cycles[1].w_battery, A / 2 * p2, 1e-4);
    EXPECT_NEAR(cycles[1].q_hot, A * p2, 1e-4);
    EXPECT_NEAR(cycles[1].eta, 0.5, 1e-5);
    EXPECT_LT(cycles[1].closure, 1e-5);
}

TEST(RunSeqFrag, CyclesSettle) {
    auto p = seq(EngineKind::SeqFrag, 40.0, 25.0, 3.0, 1.2);
    p.n_cycles = 5;
    const auto cycles = run_seq_frag(p);
    ASSERT_EQ(cycles.size(), 5u);
    for (std::size_t k = 2; k < cycles.size(); ++k) {
        EXPECT_NEAR(cycles[k].w_battery, cycles[1].w_battery, 1e-3 * p.A);
        EXPECT_NEAR(cycles[k].q_hot, cycles[1].q_hot, 1e-3 * p.A);
    }
    EXPECT_EQ(run_engine(p).w_battery, cycles[1].w_battery);
}

TEST(RunSeqFrag, NeedsTwoCycles) {
    auto p = seq(EngineKind::SeqFrag, 40.0, 25.0, 3.0, 1.2);
    p.n_cycles = 1;
    EXPECT_THROW(run_seq_frag(p), std::domain_error);
}

TEST(BatteryBounds, SequentialEnginesOverPhase) {
    for (auto kind : {EngineKind::SeqOut, EngineKind::SeqFrag}) {
        for (int k = 0; k <= 12; ++k) {
            const auto m = run_engine(seq(kind, 35.0, 30.0, 2.0, kPi * k / 12));
            EXPECT_GE(m.w_battery, -1e-14);
            EXPECT_LE(m.pcg, 100.0);
        }
    }
}

TEST(RunSimultaneous, ZeroDurationIsIdle) {
    for (auto kind : {EngineKind::SimOut, EngineKind::SimFrag}) {
        const auto m = run_engine(sim(kind, 20.0, 5.0, 15.0, 3.0, 0.0));
        EXPECT_EQ(m.w_battery, 0.0);
        EXPECT_EQ(m.q_hot + m.q_cold_in_stroke1, 0.0);
        EXPECT_NEAR(m.q_cold_stroke, 0.0, 1e-14);
    }
}

TEST(RunSimultaneous, EqualTemperaturesGiveEqualLedgers) {
    const auto run = run_simultaneous(sim(EngineKind::SimOut, 30.0, 6.0, 11.0, 11.0, 8.0));
    EXPECT_NEAR(run.stroke.ledger.q_net_hot, run.stroke.ledger.q_net_cold, 1e-8);
}

TEST(RunSimultaneous, FirstLaw) {
    for (auto kind : {EngineKind::SimOut, EngineKind::SimFrag}) {
        const auto run = run_simultaneous(sim(kind, 45.0, 12.0, 40.0, 3.0, 9.0));
        const double de = expectation(run.hamiltonian, run.stroke.state) - expectation(run.hamiltonian, run.initial);
        EXPECT_NEAR(de, run.stroke.ledger.q_net_hot + run.stroke.ledger.q_net_cold, 1e-6);
    }
}

TEST(RunSimultaneous, MetricsAssembly) {
    const auto run = run_simultaneous(sim(EngineKind::SimFrag, 50.0, 20.0, 50.0, 10.0, 10.0));
    const auto& m = run.metrics;
    EXPECT_EQ(m.q_hot, run.stroke.ledger.q_pos_hot);
    EXPECT_EQ(m.q_cold_in_stroke1, run.stroke.ledger.q_pos_cold);
    EXPECT_DOUBLE_EQ(m.q_total, m.q_hot + m.q_cold_in_stroke1 - (m.q_cold_stroke < 0 ? m.q_cold_stroke : 0.0));
    EXPECT_DOUBLE_EQ(m.pcg, 200.0 * m.w_battery / 50.0);
    EXPECT_GT(m.w_battery, 0.0);
}

TEST(RunSimultaneous, FragmentedChannelFrequencies) {
    const double A = 50.0, w = 10.0;
    const auto run = run_simultaneous(sim(EngineKind::SimFrag, A, w, 30.0, 5.0, 1.0));
    ASSERT_EQ(run.hot_channels.size(), 3u);
    ASSERT_EQ(run.cold_channels.size(), 3u);
    const double hot[] = {A - w, A, A + w};
    const double cold[] = {A / 2 - w, A / 2, A / 2 + w};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(run.hot_channels[i].omega, hot[i], 1e-9);
        EXPECT_NEAR(run.cold_channels[i].omega, cold[i], 1e-9);
    }
}

TEST(RunSimultaneous, FragmentedColdBathOnlyAbsorbsInFirstStroke) {
    const auto m = run_engine(sim(EngineKind::SimFrag, 50.0, 23.0, 50.0, 50.0, 10.0));
    EXPECT_EQ(m.q_cold_in_stroke1, 0.0);
    EXPECT_LT(m.q_cold_stroke, 0.0);  // absorbs in the closing stroke, reported with its sign
}

TEST(RunSimultaneous, CouplingConstraint) {
    EXPECT_THROW(run_engine(sim(EngineKind::SimOut, 10.0, 5.1, 3.0, 1.0, 1.0)), std::domain_error);
    EXPECT_NO_THROW(run_engine(sim(EngineKind::SimOut, 10.0, 5.0, 3.0, 1.0, 1.0)));
    EXPECT_THROW(run_engine(sim(EngineKind::SimFrag, 10.0, -1.0, 3.0, 1.0, 1.0)), std::domain_error);
}

TEST(MetricsFrom, Examples) {
    EXPECT_DOUBLE_EQ(metrics_from(30.0, 0.0, 5.0, 25.0, 50.0).pcg, 100.0);
    EXPECT_DOUBLE_EQ(metrics_from(0.7, 0.0, 0.0, 0.7, 3.0).eta, 1.0);
    const auto m = metrics_from(0.5, 0.0, -0.3, 0.2, 1.0);
    EXPECT_DOUBLE_EQ(m.q_total, 0.8);
    EXPECT_DOUBLE_EQ(m.eta, 0.25);
}

TEST(MetricsFrom, HeavisideAtZero) {
    EXPECT_EQ(heaviside(0.0), 0.0);
    EXPECT_EQ(metrics_from(0.4, 0.1, 0.0, 0.1, 1.0).q_total, 0.5);
    EXPECT_EQ(metrics_from(0.4, 0.1, 0.2, 0.1, 1.0).q_total, 0.5);
}

TEST(MetricsFrom, WorkWithoutHeatIsAnAccountingError) {
    EXPECT_THROW(metrics_from(0.0, 0.0, 0.0, 0.3, 1.0), MetricError);
    EXPECT_EQ(metrics_from(0.0, 0.0, 0.0, 0.0, 1.0).eta, 0.0);
    EXPECT_THROW(metrics_from(0.1, 0.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST(EngineKind, Names) {
    for (auto k : kAllEngines) EXPECT_EQ(parse_engine_kind(to_string(k)), k);
    EXPECT_FALSE(parse_engine_kind("seq_out").has_value());
}

TEST(EngineParams, Validation) {
    auto p = seq(EngineKind::SeqOut, 0.0, 1.0, 1.0, 0.0);
    EXPECT_THROW(p.validate(), std::domain_error);
    p = seq(EngineKind::SeqOut, 1.0, -1.0, 1.0, 0.0);
    EXPECT_THROW(p.validate(), std::domain_error);
    p = sim(EngineKind::SimOut, 1.0, 0.1, 1.0, 1.0, -1.0);
    EXPECT_THROW(p.validate(), std::domain_error);
    p = sim(EngineKind::SimOut, 1.0, 0.1, 1.0, 1.0, 1.0);
    p.kappa = 0.0;
    EXPECT_THROW(p.validate(), std::domain_error);
}
