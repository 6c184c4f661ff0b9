#pragma once

// Parameter sweeps: run the engine over a grid of (value, scheme, seed)
// combinations and collect the headline post-burn-in averages.  Rows are
// emitted in deterministic order regardless of the worker count.

#include <atomic>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ucra/config.hpp"
#include "ucra/engine.hpp"

namespace ucra {

struct SweepSpec {
    std::string parameter; // pu_snr_db | sp_gain_avg_db | max_interference |
                           // max_capacity_loss | quantizer_levels
    std::vector<double> values;
    std::vector<Scheme> schemes;
    std::vector<std::uint64_t> seeds;
};

struct SweepRow {
    double value = 0.0;
    Scheme scheme = Scheme::APC;
    std::uint64_t seed = 0;
    double c2 = 0.0;
    double p1 = 0.0;   // mean over channels
    double eps1 = 0.0; // mean over channels
    double p2 = 0.0;   // mean over users
    bool feasible = true;
};

inline ScenarioConfig apply_sweep_value(ScenarioConfig cfg, const std::string& param,
                                        double v) {
    auto fill = [](std::vector<double>& vec, double x) {
        for (double& e : vec) e = x;
    };
    if (param == "pu_snr_db") {
        fill(cfg.pu_snr, std::pow(10.0, v / 10.0));
    } else if (param == "sp_gain_avg_db") {
        fill(cfg.sp_gain_avg, std::pow(10.0, v / 10.0));
    } else if (param == "max_interference") {
        fill(cfg.max_interference, v);
    } else if (param == "max_capacity_loss") {
        fill(cfg.max_cap_loss, v);
    } else if (param == "quantizer_levels") {
        cfg.sensing = SensingMode::Quantized;
        cfg.quantizer_levels = std::isinf(v) ? 0 : static_cast<int>(std::llround(v));
    } else {
        throw ConfigError("unknown sweep parameter '" + param + "'");
    }
    return cfg;
}

inline std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                                       int jobs = 1) {
    if (spec.values.empty() || spec.schemes.empty() || spec.seeds.empty())
        throw ConfigError("sweep needs at least one value, scheme and seed");
    struct Job {
        double value;
        Scheme scheme;
        std::uint64_t seed;
    };
    std::vector<Job> grid;
    for (double v : spec.values)
        for (Scheme s : spec.schemes)
            for (std::uint64_t seed : spec.seeds) grid.push_back({v, s, seed});

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            ScenarioConfig cfg = apply_sweep_value(base, spec.parameter, grid[i].value);
            cfg.scheme = grid[i].scheme;
            cfg.seed = grid[i].seed;
            RunResult r = run_engine(cfg);
            FeasibilityReport fr = feasibility(r.report, cfg);
            SweepRow& row = rows[i];
            row.value = grid[i].value;
            row.scheme = grid[i].scheme;
            row.seed = grid[i].seed;
            row.c2 = r.report.c2_avg;
            for (double x : r.report.p1_avg) row.p1 += x / r.report.p1_avg.size();
            row.eps1 = r.report.eps1_avg;
            for (double x : r.report.p2_avg) row.p2 += x / r.report.p2_avg.size();
            row.feasible = fr.feasible;
        }
    };
    int J = std::max(1, jobs);
    if (J == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < J; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::string& parameter,
                            const std::vector<SweepRow>& rows) {
    os << "parameter,value,scheme,seed,c2_avg,p1_avg,eps1_avg,p2_avg,feasible\n";
    for (const SweepRow& r : rows) {
        os << parameter << ',';
        if (std::isinf(r.value)) os << "inf";
        else os << r.value;
        os << ',' << to_string(r.scheme) << ',' << r.seed << ',' << r.c2 << ',' << r.p1
           << ',' << r.eps1 << ',' << r.p2 << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

} // namespace ucra
