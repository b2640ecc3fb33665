// optimize.hpp: bounded maximization of the battery work over engine
// parameters: a constraint-filtered coarse grid followed by Nelder-Mead
// refinement in normalized coordinates, plus T_U sweeps and the four-engine
// comparison built on top of it.

#pragma once

#include "qhe/engines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qhe {

struct Interval {
    double lo{0.0};
    double hi{0.0};

    double at(double u) const { return lo + u * (hi - lo); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class Param { A, lambda, omega_sb, T_H, T_C, t2 };

inline const char* to_string(Param p) {
    switch (p) {
        case Param::A: return "A";
        case Param::lambda: return "lambda";
        case Param::omega_sb: return "omega_sb";
        case Param::T_H: return "T_H";
        case Param::T_C: return "T_C";
        case Param::t2: return "t2";
    }
    return "?";
}

inline constexpr double kMinTemperature = 1e-3;
inline constexpr double kMinGap = 1e-3;

struct SearchSpace {
    Interval A{kMinGap, 50.0};
    Interval lambda{0.0, std::numbers::pi};
    Interval omega_sb{0.0, 25.0};
    Interval T_H{kMinTemperature, 50.0};
    Interval T_C{kMinTemperature, 50.0};
    Interval t2{0.0, 10.0};
    // The sequential out-and-out work does not depend on T_C, so that engine
    // reports its efficiency at this cold-bath temperature (capped at T_H).
    double seq_out_T_C{15.0};
    double kappa{1e-3};

    static SearchSpace bounded_by(double T_U) {
        SearchSpace s;
        s.set_upper_temperature(T_U);
        return s;
    }

    void set_upper_temperature(double T_U) {
        detail::require(std::isfinite(T_U) && T_U > kMinTemperature, "SearchSpace: T_U must exceed the temperature floor");
        T_H.hi = T_U;
        T_C.hi = T_U;
    }

    double upper_temperature() const { return T_H.hi; }

    const Interval& bounds(Param p) const {
        switch (p) {
            case Param::A: return A;
            case Param::lambda: return lambda;
            case Param::omega_sb: return omega_sb;
            case Param::T_H: return T_H;
            case Param::T_C: return T_C;
            case Param::t2: return t2;
        }
        throw std::domain_error("SearchSpace: unknown parameter");
    }

    void validate() const {
        for (auto p : {Param::A, Param::lambda, Param::omega_sb, Param::T_H, Param::T_C, Param::t2}) {
            const auto& b = bounds(p);
            detail::require(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo <= b.hi,
                            std::string("SearchSpace: bad bounds for ") + to_string(p));
        }
        detail::require(A.lo > 0.0, "SearchSpace: A must stay positive");
        detail::require(T_H.lo > 0.0 && T_C.lo > 0.0, "SearchSpace: temperatures must stay positive");
        detail::require(omega_sb.lo >= 0.0 && t2.lo >= 0.0, "SearchSpace: omega_sb and t2 must be >= 0");
        detail::require(seq_out_T_C > 0.0, "SearchSpace: seq_out_T_C must be positive");
    }
};

inline std::vector<Param> free_parameters(EngineKind kind) {
    switch (kind) {
        case EngineKind::SeqOut: return {Param::A, Param::lambda, Param::T_H};
        case EngineKind::SeqFrag: return {Param::A, Param::lambda, Param::T_H, Param::T_C};
        case EngineKind::SimOut:
        case EngineKind::SimFrag: return {Param::A, Param::omega_sb, Param::T_H, Param::T_C, Param::t2};
    }
    return {};
}

struct Budget {
    int grid_points{8};
    int simplex_iterations{200};
    int threads{1};

    static Budget standard() { return {}; }
    static Budget fast() { return {5, 200, 1}; }

    void validate() const {
        detail::require(grid_points >= 2, "Budget: need at least 2 grid points per dimension");
        detail::require(simplex_iterations >= 0, "Budget: negative simplex iterations");
        detail::require(threads >= 1, "Budget: threads must be >= 1");
    }
};

struct TracePoint {
    EngineParams params;
    double w_battery;
};

struct OptResult {
    EngineParams best_params;
    CycleMetrics best_metrics;
    long evaluations{0};
    std::vector<TracePoint> trace;
};

// ------------------------------ Nelder-Mead ---------------------------------

struct NelderMeadOptions {
    int max_iterations{200};
    double initial_step{0.1};
    double x_tol{1e-10};
    double f_tol{1e-15};
    double lower{0.0};
    double upper{1.0};
};

struct NelderMeadResult {
    std::vector<double> x;
    double f{0.0};
    int iterations{0};
    long evaluations{0};
    bool converged{false};
};

// Minimizes f over the box [lower, upper]^n; every trial point is clamped to
// the box before evaluation.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    detail::require(n >= 1, "nelder_mead: empty start point");
    auto clamp = [&](std::vector<double> x) {
        for (auto& xi : x) xi = std::clamp(xi, opt.lower, opt.upper);
        return x;
    };

    NelderMeadResult res;
    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        return f(x);
    };

    pts.push_back(clamp(std::move(x0)));
    vals.push_back(eval(pts[0]));
    for (std::size_t i = 0; i < n; ++i) {
        auto x = pts[0];
        x[i] += (x[i] + opt.initial_step <= opt.upper) ? opt.initial_step : -opt.initial_step;
        pts.push_back(clamp(std::move(x)));
        vals.push_back(eval(pts.back()));
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<double>> p2;
        std::vector<double> v2;
        for (auto i : order) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };

    auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
        return clamp(std::move(out));
    };

    sort_simplex();
    while (res.iterations < opt.max_iterations) {
        double spread = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[0][k]));
        }
        const double fspread = std::abs(vals[n] - vals[0]);
        if (spread <= opt.x_tol || fspread <= opt.f_tol * std::max(1.0, std::abs(vals[0]))) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
        }
        const auto reflected = combine(centroid, pts[n], -1.0);
        const double fr = eval(reflected);
        if (fr < vals[0]) {
            const auto expanded = combine(centroid, pts[n], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            const bool outside = fr < vals[n];
            const auto contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, pts[n], 0.5);
            const double fc = eval(contracted);
            if (fc < (outside ? fr : vals[n])) {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    pts[i] = combine(pts[0], pts[i], 0.5);
                    vals[i] = eval(pts[i]);
                }
            }
        }
        sort_simplex();
    }
    res.x = pts[0];
    res.f = vals[0];
    return res;
}

// ------------------------------ Objective -----------------------------------

namespace detail {

// Threads requested via QHE_THREADS cap any explicit request.
inline int effective_threads(int requested) {
    int n = std::max(1, requested);
    if (const char* env = std::getenv("QHE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// results[i] = f(i) for i in [0, count); slot assignment makes the output
// independent of the number of workers.
template <class F>
std::vector<double> parallel_evaluate(std::size_t count, F&& f, int threads) {
    std::vector<double> results(count);
    const int workers = std::min<int>(effective_threads(threads), static_cast<int>(std::max<std::size_t>(1, count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = f(i);
        return results;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count; i += static_cast<std::size_t>(workers)) {
                results[i] = f(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

class WorkObjective {
public:
    WorkObjective(EngineKind kind, const SearchSpace& space) : kind_(kind), space_(space), free_(free_parameters(kind)) {}

    std::size_t dims() const { return free_.size(); }
    const std::vector<Param>& free() const { return free_; }

    // Normalized coordinates to a feasible parameter set: T_C <- min(T_C, T_H), omega_sb <- min(omega_sb, A/2).
    EngineParams map(const std::vector<double>& u) const {
        EngineParams p;
        p.kind = kind_;
        p.kappa = space_.kappa;
        p.lambda = space_.lambda.lo;
        p.omega_sb = space_.omega_sb.lo;
        p.t2 = space_.t2.lo;
        p.T_C = space_.seq_out_T_C;
        for (std::size_t i = 0; i < free_.size(); ++i) {
            const double x = space_.bounds(free_[i]).at(std::clamp(u[i], 0.0, 1.0));
            switch (free_[i]) {
                case Param::A: p.A = x; break;
                case Param::lambda: p.lambda = x; break;
                case Param::omega_sb: p.omega_sb = x; break;
                case Param::T_H: p.T_H = x; break;
                case Param::T_C: p.T_C = x; break;
                case Param::t2: p.t2 = x; break;
            }
        }
        p.T_C = std::min(p.T_C, p.T_H);
        p.omega_sb = std::min(p.omega_sb, p.A / 2.0);
        return p;
    }

    // Grid feasibility is checked before any clamping.
    bool feasible_unclamped(const std::vector<double>& u) const {
        double a = 0, th = 0, tc = 0, w = 0;
        bool has_tc = false, has_w = false;
        for (std::size_t i = 0; i < free_.size(); ++i) {
            const double x = space_.bounds(free_[i]).at(u[i]);
            switch (free_[i]) {
                case Param::A: a = x; break;
                case Param::T_H: th = x; break;
                case Param::T_C: tc = x; has_tc = true; break;
                case Param::omega_sb: w = x; has_w = true; break;
                default: break;
            }
        }
        if (has_tc && tc > th) return false;
        if (has_w && w > a / 2.0) return false;
        return true;
    }

    std::vector<double> unmap(const EngineParams& p) const {
        std::vector<double> u(free_.size());
        for (std::size_t i = 0; i < free_.size(); ++i) {
            const auto& b = space_.bounds(free_[i]);
            double x = 0.0;
            switch (free_[i]) {
                case Param::A: x = p.A; break;
                case Param::lambda: x = p.lambda; break;
                case Param::omega_sb: x = p.omega_sb; break;
                case Param::T_H: x = p.T_H; break;
                case Param::T_C: x = p.T_C; break;
                case Param::t2: x = p.t2; break;
            }
            u[i] = b.hi > b.lo ? std::clamp((x - b.lo) / (b.hi - b.lo), 0.0, 1.0) : 0.0;
        }
        return u;
    }

    // Battery work; failed evaluations rank below everything.
    double work(const EngineParams& p) const {
        try {
            if (kind_ == EngineKind::SeqOut) return analytic_seq_out(p.A, p.T_H, p.T_C, p.lambda).w_battery;
            return run_engine(p).w_battery;
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

private:
    EngineKind kind_;
    SearchSpace space_;
    std::vector<Param> free_;
};

// Deterministic preference: more work, then the lexicographically smaller point.
inline bool better(double wa, const std::vector<double>& ua, double wb, const std::vector<double>& ub) {
    if (wa != wb) return wa > wb;
    return ua < ub;
}

}  // namespace detail

// Maximizes the battery work for one engine. `seeds` are extra candidate
// points (e.g. the optimum of a smaller feasible set) considered alongside the grid.
inline OptResult maximize_work(EngineKind kind, const SearchSpace& space, const Budget& budget,
                               const std::vector<EngineParams>& seeds = {}, bool record_trace = false) {
    space.validate();
    budget.validate();
    const detail::WorkObjective objective(kind, space);
    const std::size_t d = objective.dims();

    std::vector<std::vector<double>> candidates;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(budget.grid_points);
    for (std::size_t code = 0; code < total; ++code) {
        // first free parameter varies slowest, so index order is lexicographic
        std::vector<double> u(d);
        std::size_t rest = code;
        for (std::size_t i = d; i-- > 0;) {
            u[i] = static_cast<double>(rest % budget.grid_points) / (budget.grid_points - 1);
            rest /= budget.grid_points;
        }
        if (objective.feasible_unclamped(u)) candidates.push_back(std::move(u));
    }
    for (const auto& s : seeds) candidates.push_back(objective.unmap(s));
    if (candidates.empty()) throw std::domain_error("maximize_work: empty feasible set");

    OptResult out;
    const auto values = detail::parallel_evaluate(
        candidates.size(), [&](std::size_t i) { return objective.work(objective.map(candidates[i])); }, budget.threads);
    out.evaluations = static_cast<long>(candidates.size());
    if (record_trace) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            out.trace.push_back({objective.map(candidates[i]), values[i]});
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (detail::better(values[i], objective.unmap(objective.map(candidates[i])), values[best],
                           objective.unmap(objective.map(candidates[best])))) {
            best = i;
        }
    }
    if (!std::isfinite(values[best])) throw std::domain_error("maximize_work: no evaluable point in the search space");

    std::vector<double> best_u = objective.unmap(objective.map(candidates[best]));
    double best_w = values[best];

    auto neg_work = [&](const std::vector<double>& u) {
        const EngineParams p = objective.map(u);
        const double w = objective.work(p);
        if (record_trace) out.trace.push_back({p, w});
        return -w;
    };

    // Refinement with restarts from the incumbent while iterations remain.
    int remaining = budget.simplex_iterations;
    double step = 0.5 / (budget.grid_points - 1);
    while (remaining > 0) {
        NelderMeadOptions opt;
        opt.max_iterations = remaining;
        opt.initial_step = step;
        const auto nm = nelder_mead(neg_work, best_u, opt);
        out.evaluations += nm.evaluations;
        remaining -= std::max(1, nm.iterations);
        const double w = -nm.f;
        const auto u = objective.unmap(objective.map(nm.x));
        const bool improved = w > best_w + 1e-13 * std::max(1.0, std::abs(best_w));
        if (detail::better(w, u, best_w, best_u)) {
            best_w = w;
            best_u = u;
        }
        if (!improved) break;
        step = std::max(step * 0.25, 1e-4);
    }

    out.best_params = objective.map(best_u);
    out.best_metrics = run_engine(out.best_params);
    return out;
}

// ------------------------------- Sweeps -------------------------------------

struct SweepRow {
    double t_u;
    OptResult result;
};

// One optimization per T_U (ascending). Each row is seeded with the previous
// optimum, which stays feasible because the feasible sets are nested.
inline std::vector<SweepRow> sweep_TU(EngineKind kind, const std::vector<double>& t_u_grid, const SearchSpace& base,
                                      const Budget& budget) {
    detail::require(!t_u_grid.empty(), "sweep_TU: empty T_U grid");
    for (std::size_t i = 1; i < t_u_grid.size(); ++i) {
        detail::require(t_u_grid[i] > t_u_grid[i - 1], "sweep_TU: T_U grid must be strictly ascending");
    }
    std::vector<SweepRow> rows;
    for (double tu : t_u_grid) {
        SearchSpace space = base;
        space.set_upper_temperature(tu);
        std::vector<EngineParams> seeds;
        if (!rows.empty()) seeds.push_back(rows.back().result.best_params);
        rows.push_back({tu, maximize_work(kind, space, budget, seeds)});
    }
    return rows;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    detail::require(n >= 1, "linspace: need at least one point");
    if (n == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

struct Comparison {
    std::vector<double> t_u;
    std::map<EngineKind, std::vector<SweepRow>> sweeps;
};

inline Comparison compare_engines(const std::vector<double>& t_u_grid, const SearchSpace& base, const Budget& budget) {
    Comparison c;
    c.t_u = t_u_grid;
    for (auto k : kAllEngines) c.sweeps[k] = sweep_TU(k, t_u_grid, base, budget);
    return c;
}

struct OrderingCheck {
    std::string name;
    double t_u;
    bool passed;
    std::string detail;
};

// Work: SeqOut >= SeqFrag, SeqFrag within 15% of SimOut, SimOut >= SimFrag.
// Efficiency at the work optimum: SimFrag > SeqFrag > SimOut.
inline std::vector<OrderingCheck> ordering_checks(const Comparison& c, double work_match_tolerance = 0.15) {
    std::vector<OrderingCheck> out;
    for (std::size_t i = 0; i < c.t_u.size(); ++i) {
        auto w = [&](EngineKind k) { return c.sweeps.at(k)[i].result.best_metrics.w_battery; };
        auto eta = [&](EngineKind k) { return c.sweeps.at(k)[i].result.best_metrics.eta; };
        const double tu = c.t_u[i];
        auto add = [&](std::string name, bool ok, double a, double b) {
            out.push_back({std::move(name), tu, ok, std::to_string(a) + " vs " + std::to_string(b)});
        };
        add("W seq-out >= seq-frag", w(EngineKind::SeqOut) >= w(EngineKind::SeqFrag), w(EngineKind::SeqOut),
            w(EngineKind::SeqFrag));
        add("W seq-frag ~ sim-out", std::abs(w(EngineKind::SeqFrag) - w(EngineKind::SimOut)) <= work_match_tolerance * w(EngineKind::SimOut),
            w(EngineKind::SeqFrag), w(EngineKind::SimOut));
        add("W sim-out >= sim-frag", w(EngineKind::SimOut) >= w(EngineKind::SimFrag), w(EngineKind::SimOut),
            w(EngineKind::SimFrag));
        add("eta sim-frag > seq-frag", eta(EngineKind::SimFrag) > eta(EngineKind::SeqFrag), eta(EngineKind::SimFrag),
            eta(EngineKind::SeqFrag));
        add("eta seq-frag > sim-out", eta(EngineKind::SeqFrag) > eta(EngineKind::SimOut), eta(EngineKind::SeqFrag),
            eta(EngineKind::SimOut));
    }
    return out;
}

}  // namespace qhe
