// io.hpp: CSV and JSON serialization of engine runs, sweeps and comparisons.
// Numbers are written with 12 significant digits; JSON payloads carry the same
// rounded values so both formats parse back to identical tables.

#pragma once

#include "qhe/optimize.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qhe {

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline double round12(double x) { return std::stod(format_number(x)); }

inline std::string iso8601_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw std::out_of_range("Table: no column " + name);
    }

    double at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

inline bool operator==(const Table& a, const Table& b) { return a.columns == b.columns && a.rows == b.rows; }

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: missing header");
    t.columns = split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.columns.size()) throw std::runtime_error("read_csv: ragged row");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json table_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json row = nlohmann::json::array();
        for (double x : r) row.push_back(round12(x));
        rows.push_back(std::move(row));
    }
    return {{"columns", t.columns}, {"rows", std::move(rows)}};
}

inline Table table_from_json(const nlohmann::json& j) {
    Table t;
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) t.rows.push_back(r.get<std::vector<double>>());
    return t;
}

// ------------------------------ Engine runs ---------------------------------

inline nlohmann::json params_json(const EngineParams& p) {
    nlohmann::json j{{"A", round12(p.A)}, {"T_H", round12(p.T_H)}, {"T_C", round12(p.T_C)}, {"kappa", round12(p.kappa)}};
    if (is_sequential(p.kind)) {
        j["lambda"] = round12(p.lambda);
    } else {
        j["omega_sb"] = round12(p.omega_sb);
        j["t2"] = round12(p.t2);
    }
    if (p.kind == EngineKind::SeqFrag) j["n_cycles"] = p.n_cycles;
    return j;
}

inline nlohmann::json metrics_json(const CycleMetrics& m, EngineKind kind) {
    nlohmann::json j{{"q_hot", round12(m.q_hot)},
                     {"q_cold_stroke", round12(m.q_cold_stroke)},
                     {"q_total", round12(m.q_total)},
                     {"w_battery", round12(m.w_battery)},
                     {"pcg", round12(m.pcg)},
                     {"eta", round12(m.eta)},
                     {"closure", round12(m.closure)}};
    if (!is_sequential(kind)) j["q_cold_in_stroke1"] = round12(m.q_cold_in_stroke1);
    return j;
}

// `cycles` is only used for seq-frag; `metrics` holds the headline cycle.
inline nlohmann::json run_document(const EngineParams& p, const CycleMetrics& headline,
                                   const std::vector<CycleMetrics>& cycles = {}) {
    nlohmann::json j{{"engine", to_string(p.kind)},
                     {"params", params_json(p)},
                     {"metrics", metrics_json(headline, p.kind)}};
    if (!cycles.empty()) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : cycles) cs.push_back(metrics_json(c, p.kind));
        j["cycles"] = std::move(cs);
    }
    j["generated_at"] = iso8601_now();
    return j;
}

// -------------------------------- Sweeps ------------------------------------

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{"t_u",        "w_m",          "pcg",          "eta",
                                               "a_star",     "th_star",      "tc_star",      "lambda_star",
                                               "omega_sb_star", "t2_star",   "q_total"};
    return cols;
}

inline std::string eta_tc_column(double t_c) { return "eta_tc_" + format_number(t_c); }

// Parameters that do not apply to an engine are written as 0. The optional
// efficiency columns re-evaluate the seq-out optimum at each listed T_C (its
// work does not depend on T_C).
inline Table sweep_table(EngineKind kind, const std::vector<SweepRow>& rows, const std::vector<double>& eta_vs_tc = {}) {
    Table t;
    t.columns = sweep_columns();
    for (double tc : eta_vs_tc) t.columns.push_back(eta_tc_column(tc));
    for (const auto& r : rows) {
        const auto& p = r.result.best_params;
        const auto& m = r.result.best_metrics;
        const bool seq = is_sequential(kind);
        std::vector<double> row{r.t_u,           m.w_battery, m.pcg,       m.eta,
                                p.A,             p.T_H,       p.T_C,       seq ? p.lambda : 0.0,
                                seq ? 0.0 : p.omega_sb, seq ? 0.0 : p.t2, m.q_total};
        for (double tc : eta_vs_tc) {
            EngineParams q = p;
            q.T_C = tc;
            row.push_back(run_engine(q).eta);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline std::string engine_column_tag(EngineKind k) {
    std::string s = to_string(k);
    for (auto& c : s) {
        if (c == '-') c = '_';
    }
    return s;
}

inline Table comparison_table(const Comparison& c) {
    Table t;
    t.columns.push_back("t_u");
    for (auto k : kAllEngines) {
        const auto tag = engine_column_tag(k);
        t.columns.push_back("w_m_" + tag);
        t.columns.push_back("pcg_" + tag);
        t.columns.push_back("eta_" + tag);
    }
    for (std::size_t i = 0; i < c.t_u.size(); ++i) {
        std::vector<double> row{c.t_u[i]};
        for (auto k : kAllEngines) {
            const auto& m = c.sweeps.at(k).at(i).result.best_metrics;
            row.push_back(m.w_battery);
            row.push_back(m.pcg);
            row.push_back(m.eta);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json ordering_json(const std::vector<OrderingCheck>& checks) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : checks) {
        out.push_back({{"check", c.name}, {"t_u", round12(c.t_u)}, {"passed", c.passed}, {"detail", c.detail}});
    }
    return out;
}

}  // namespace qhe
