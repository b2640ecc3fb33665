// qhe: run engines, sweep the bath-temperature cap, compare engines and run
// the verification battery. Exit codes: 0 success, 1 numerical or assertion
// failure, 2 usage error.

#include "qhe/io.hpp"
#include "qhe/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <thread>

namespace {

using namespace qhe;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string output;
    std::string format{"json"};
    bool fast{false};
    int threads{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
    double kappa{1e-3};
};

struct RunOptions {
    std::string engine;
    double A{0.0};
    double T_H{20.0};
    double T_C{5.0};
    double lambda{std::numbers::pi / 2.0};
    double omega_sb{0.0};
    double t2{0.0};
    int n_cycles{2};
    double dt{0.01};
};

struct GridOptions {
    std::string engine;
    double tu_min{10.0};
    double tu_max{60.0};
    int tu_steps{6};
    std::vector<double> eta_vs_tc;
    double seq_out_T_C{15.0};
};

struct VerifyOptions {
    std::string only;
    double kappa{1e-3};
};

EngineKind engine_kind(const std::string& name) {
    if (auto k = parse_engine_kind(name)) return *k;
    throw UsageError("unknown engine '" + name + "' (expected seq-out, seq-frag, sim-out or sim-frag)");
}

// Writes to --output when given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw UsageError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Budget budget_for(const CommonOptions& c) {
    Budget b = c.fast ? Budget::fast() : Budget::standard();
    b.threads = c.threads;
    return b;
}

std::vector<double> tu_grid(const GridOptions& g) {
    if (g.tu_steps < 1) throw UsageError("--tu-steps must be >= 1");
    if (!(g.tu_min > kMinTemperature) || g.tu_max < g.tu_min) throw UsageError("need 1e-3 < --tu-min <= --tu-max");
    if (g.tu_steps > 1 && g.tu_max == g.tu_min) throw UsageError("--tu-max must exceed --tu-min for several steps");
    return linspace(g.tu_min, g.tu_max, g.tu_steps);
}

SearchSpace space_for(const CommonOptions& c, const GridOptions& g) {
    SearchSpace s;
    s.kappa = c.kappa;
    s.seq_out_T_C = g.seq_out_T_C;
    return s;
}

int cmd_run(const CommonOptions& c, const RunOptions& r) {
    EngineParams p;
    p.kind = engine_kind(r.engine);
    p.A = r.A;
    p.T_H = r.T_H;
    p.T_C = r.T_C;
    p.lambda = r.lambda;
    p.omega_sb = r.omega_sb;
    p.t2 = r.t2;
    p.kappa = c.kappa;
    p.n_cycles = r.n_cycles;
    p.dt = r.dt;
    try {
        p.validate();
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }

    std::vector<CycleMetrics> cycles;
    CycleMetrics headline;
    if (p.kind == EngineKind::SeqFrag) {
        cycles = run_seq_frag(p);
        headline = cycles.at(1);
    } else {
        headline = run_engine(p);
    }

    Sink sink(c.output);
    if (c.format == "csv") {
        Table t;
        t.columns = {"q_hot", "q_cold_stroke", "q_cold_in_stroke1", "q_total", "w_battery", "pcg", "eta", "closure"};
        auto row = [](const CycleMetrics& m) {
            return std::vector<double>{m.q_hot, m.q_cold_stroke, m.q_cold_in_stroke1, m.q_total,
                                       m.w_battery, m.pcg, m.eta, m.closure};
        };
        if (cycles.empty()) {
            t.rows.push_back(row(headline));
        } else {
            for (const auto& m : cycles) t.rows.push_back(row(m));
        }
        write_csv(sink.stream(), t);
    } else {
        sink.stream() << std::setw(2) << run_document(p, headline, cycles) << '\n';
    }
    return 0;
}

int cmd_sweep(const CommonOptions& c, const GridOptions& g) {
    const EngineKind kind = engine_kind(g.engine);
    if (!g.eta_vs_tc.empty() && kind != EngineKind::SeqOut) throw UsageError("--eta-vs-tc applies to seq-out only");
    for (double tc : g.eta_vs_tc) {
        if (!(tc > 0.0)) throw UsageError("--eta-vs-tc temperatures must be positive");
    }
    const auto grid = tu_grid(g);
    const auto rows = sweep_TU(kind, grid, space_for(c, g), budget_for(c));
    const Table t = sweep_table(kind, rows, g.eta_vs_tc);

    Sink sink(c.output);
    if (c.format == "csv") {
        write_csv(sink.stream(), t);
    } else {
        nlohmann::json j{{"engine", to_string(kind)}, {"table", table_json(t)}, {"generated_at", iso8601_now()}};
        sink.stream() << std::setw(2) << j << '\n';
    }
    return 0;
}

int cmd_compare(const CommonOptions& c, const GridOptions& g) {
    const auto grid = tu_grid(g);
    const Comparison cmp = compare_engines(grid, space_for(c, g), budget_for(c));
    const Table t = comparison_table(cmp);
    const auto checks = ordering_checks(cmp);
    bool all = true;
    for (const auto& k : checks) all = all && k.passed;

    Sink sink(c.output);
    if (c.format == "csv") {
        write_csv(sink.stream(), t);
        for (const auto& k : checks) {
            std::cerr << (k.passed ? "PASS " : "FAIL ") << "t_u=" << format_number(k.t_u) << "  " << k.name << "  ("
                      << k.detail << ")\n";
        }
    } else {
        nlohmann::json j{{"table", table_json(t)}, {"summary", ordering_json(checks)}, {"generated_at", iso8601_now()}};
        sink.stream() << std::setw(2) << j << '\n';
    }
    return all ? 0 : 1;
}

int cmd_verify(const VerifyOptions& v) {
    verify::Options opt;
    opt.kappa = v.kappa;
    const auto outcomes = verify::run(opt, v.only);
    if (outcomes.empty()) throw UsageError("--only matched no check or group: '" + v.only + "'");
    int failed = 0;
    for (const auto& o : outcomes) {
        std::printf("%-4s  %-10s  %-34s  %7.2fs  %s\n", o.passed ? "PASS" : "FAIL", o.group.c_str(), o.name.c_str(),
                    o.seconds, o.detail.c_str());
        failed += o.passed ? 0 : 1;
    }
    std::printf("%zu checks, %d failed\n", outcomes.size(), failed);
    return failed == 0 ? 0 : 1;
}

void add_common(CLI::App* app, CommonOptions& c, bool grid) {
    app->add_option("--output,-o", c.output, "Write to this file instead of stdout");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--kappa", c.kappa, "Spectral-density prefactor (hbar^3/delta)");
    if (grid) {
        app->add_flag("--fast", c.fast, "Coarser grid (5 points per free parameter)");
        app->add_option("--threads", c.threads, "Worker threads (capped by QHE_THREADS)")->check(CLI::PositiveNumber);
    }
}

void add_grid(CLI::App* app, GridOptions& g) {
    app->add_option("--tu-min", g.tu_min, "Smallest bath-temperature cap T_U (delta/k_B)");
    app->add_option("--tu-max", g.tu_max, "Largest T_U (delta/k_B)");
    app->add_option("--tu-steps", g.tu_steps, "Number of T_U values");
    app->add_option("--Tc", g.seq_out_T_C, "Cold-bath temperature reported for seq-out (delta/k_B)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Qutrit heat engines charging a two-level quantum battery (natural units delta = hbar = k_B = 1)"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value file mirroring the flags; flags override it");

    CommonOptions common;
    RunOptions run;
    GridOptions sweep_grid;
    GridOptions compare_grid;
    compare_grid.tu_min = 20.0;
    compare_grid.tu_max = 50.0;
    compare_grid.tu_steps = 2;
    VerifyOptions ver;

    auto* run_cmd = app.add_subcommand("run", "Run one engine cycle (seq-frag: all cycles) and print its metrics");
    run_cmd->add_option("--engine", run.engine, "seq-out | seq-frag | sim-out | sim-frag")->required();
    run_cmd->add_option("--A", run.A, "Qutrit gap parameter A (delta)")->required();
    run_cmd->add_option("--Th", run.T_H, "Hot-bath temperature (delta/k_B)");
    run_cmd->add_option("--Tc", run.T_C, "Cold-bath temperature (delta/k_B)");
    run_cmd->add_option("--lambda", run.lambda, "Work-stroke phase omega_sb * t1 (sequential engines)");
    run_cmd->add_option("--omega-sb", run.omega_sb, "System-battery coupling (delta/hbar, simultaneous engines)");
    run_cmd->add_option("--t2", run.t2, "Combined-stroke duration (hbar/delta, simultaneous engines)");
    run_cmd->add_option("--n-cycles", run.n_cycles, "Cycles to run (seq-frag)");
    run_cmd->add_option("--dt", run.dt, "RK4 step (hbar/delta)");
    add_common(run_cmd, common, false);

    auto* sweep_cmd = app.add_subcommand("sweep", "Optimize the battery work for each T_U on a grid (CSV by default)");
    sweep_cmd->add_option("--engine", sweep_grid.engine, "seq-out | seq-frag | sim-out | sim-frag")->required();
    add_grid(sweep_cmd, sweep_grid);
    sweep_cmd->add_option("--eta-vs-tc", sweep_grid.eta_vs_tc, "seq-out: extra efficiency columns at these T_C")
        ->delimiter(',');
    add_common(sweep_cmd, common, true);

    auto* compare_cmd = app.add_subcommand("compare", "Sweep all four engines and check their ordering");
    add_grid(compare_cmd, compare_grid);
    add_common(compare_cmd, common, true);

    auto* verify_cmd = app.add_subcommand("verify", "Run the verification battery");
    verify_cmd->add_option("--only", ver.only, "Run one group (gksl, gibbs, oracle, appendix, properties) or check");
    verify_cmd->add_option("--kappa", ver.kappa, "Spectral-density prefactor used by the checks");

    // Table-producing commands default to CSV.
    for (auto* sub : {sweep_cmd, compare_cmd}) {
        sub->preparse_callback([&common](std::size_t) { common.format = "csv"; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "qhe: " << e.what() << '\n';
        return 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(common, run);
        if (sweep_cmd->parsed()) return cmd_sweep(common, sweep_grid);
        if (compare_cmd->parsed()) return cmd_compare(common, compare_grid);
        if (verify_cmd->parsed()) return cmd_verify(ver);
    } catch (const UsageError& e) {
        std::cerr << "qhe: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qhe: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
