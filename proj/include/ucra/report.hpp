#pragma once

// Output formats: per-slot CSV trace of running averages and multipliers,
// JSON run summary, plain-text constraint table, and an optional JSONL
// belief trace for debugging estimator behavior.

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ucra/beliefs.hpp"
#include "ucra/config.hpp"
#include "ucra/engine.hpp"

namespace ucra {

inline std::string trace_header(const ScenarioConfig& cfg) {
    std::ostringstream h;
    h << "slot,c2_avg";
    for (int m = 1; m <= cfg.num_sus; ++m) h << ",p2_avg_" << m;
    for (int k = 1; k <= cfg.num_channels; ++k) h << ",p1_avg_" << k;
    for (int k = 1; k <= cfg.num_channels; ++k) h << ",r1_avg_" << k;
    h << ",eps1_avg";
    for (int m = 1; m <= cfg.num_sus; ++m) h << ",pi_" << m;
    for (int k = 1; k <= cfg.num_channels; ++k) h << ",theta_" << k;
    for (int k = 1; k <= cfg.num_channels; ++k) h << ",rho_" << k;
    return h.str();
}

// Streams one row per slot; values are running averages from slot 0, so the
// trace shows convergence rather than instantaneous noise.
class TraceWriter {
public:
    TraceWriter(const std::string& path, const ScenarioConfig& cfg)
        : cfg_(&cfg), out_(path) {
        if (!out_) throw std::runtime_error("cannot open trace file '" + path + "'");
        out_ << trace_header(cfg) << '\n';
        out_ << std::setprecision(10);
    }

    void row(long long slot, const Accum& a, const DualState& d) {
        const ScenarioConfig& c = *cfg_;
        out_ << slot << ',' << (a.slots ? a.c2 / a.slots : 0.0);
        for (int m = 0; m < c.num_sus; ++m)
            out_ << ',' << (a.slots ? a.p2[m] / a.slots : 0.0);
        double eps_sum = 0.0;
        for (int k = 0; k < c.num_channels; ++k)
            out_ << ',' << (a.active[k] ? a.interf[k] / a.active[k] : 0.0);
        for (int k = 0; k < c.num_channels; ++k) {
            double full = pu_rate(c.pu_snr[k], 0.0);
            double r1 = a.active[k] ? a.pu_rate_sum[k] / a.active[k] : full;
            eps_sum += (1.0 - r1 / full) / c.num_channels;
            out_ << ',' << r1;
        }
        out_ << ',' << eps_sum;
        for (double v : d.mult.pi) out_ << ',' << v;
        for (double v : d.mult.theta) out_ << ',' << v;
        for (double v : d.mult.rho) out_ << ',' << v;
        out_ << '\n';
    }

private:
    const ScenarioConfig* cfg_;
    std::ofstream out_;
};

class BeliefTraceWriter {
public:
    explicit BeliefTraceWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open belief trace '" + path + "'");
    }

    void row(const BeliefState& b) {
        nlohmann::json j;
        j["slot"] = b.slot;
        j["q"] = b.activity_q;
        nlohmann::json su = nlohmann::json::array();
        for (const SuBelief& s : b.su) {
            if (s.point)
                su.push_back({{"family", "point"}, {"value", s.value}});
            else if (std::isinf(s.hi))
                su.push_back({{"family", "exp_tail"}, {"lo", s.lo}, {"mean", s.hbar}});
            else
                su.push_back({{"family", "exp_cell"}, {"lo", s.lo}, {"hi", s.hi},
                              {"mean", s.hbar}});
        }
        j["su"] = std::move(su);
        nlohmann::json sp = nlohmann::json::array();
        for (const SpBelief& s : b.sp) {
            if (s.point)
                sp.push_back({{"family", "point"}, {"value", s.value}});
            else
                sp.push_back({{"family", "gaussian"}, {"mu", {s.mu_re, s.mu_im}},
                              {"var", s.var}});
        }
        j["sp"] = std::move(sp);
        out_ << j.dump() << '\n';
    }

private:
    std::ofstream out_;
};

inline nlohmann::json summary_json(const ScenarioConfig& cfg, const RunResult& r,
                                   double strict_tol) {
    FeasibilityReport fr = feasibility(r.report, cfg, strict_tol);
    nlohmann::json j;
    j["scheme"] = to_string(cfg.scheme);
    j["csi_variant"] = to_string(cfg.csi);
    j["sensing"] = to_string(cfg.sensing);
    j["seed"] = cfg.seed;
    j["horizon"] = cfg.horizon;
    j["burn_in"] = r.burn_in;
    j["wall_seconds"] = r.wall_seconds;
    j["c2_avg"] = r.report.c2_avg;
    j["p2_avg"] = r.report.p2_avg;
    j["p1_avg"] = r.report.p1_avg;
    j["r1_avg"] = r.report.r1_avg;
    j["eps1"] = r.report.eps1;
    j["eps1_avg"] = r.report.eps1_avg;
    j["full"] = {{"c2_avg", r.full.c2_avg}, {"eps1_avg", r.full.eps1_avg}};
    j["multipliers"] = {{"pi", r.mult.pi}, {"theta", r.mult.theta}, {"rho", r.mult.rho}};
    nlohmann::json rows = nlohmann::json::array();
    for (const ConstraintRow& row : fr.rows)
        rows.push_back({{"name", row.name}, {"limit", row.limit},
                        {"realized", row.realized}, {"slack", row.slack},
                        {"violated", row.violated}});
    j["constraints"] = std::move(rows);
    j["feasible"] = fr.feasible;
    j["max_rel_violation"] = fr.max_rel_violation;
    j["warnings"] = {{"multiplier_clamp_hit", r.clamp_hit},
                     {"stationary_point_excess", r.stationary_excess}};
    return j;
}

inline void print_summary(std::ostream& os, const ScenarioConfig& cfg, const RunResult& r,
                          double strict_tol) {
    FeasibilityReport fr = feasibility(r.report, cfg, strict_tol);
    os << "scheme " << to_string(cfg.scheme) << "  csi " << to_string(cfg.csi)
       << "  sensing " << to_string(cfg.sensing) << "  seed " << cfg.seed
       << "  horizon " << cfg.horizon << " (burn-in " << r.burn_in << ")\n";
    os << std::fixed << std::setprecision(4);
    os << "sum capacity        " << r.report.c2_avg << " bit/s/Hz\n";
    os << "capacity loss       " << 100.0 * r.report.eps1_avg << " %\n";
    double p1 = 0.0, p2 = 0.0;
    for (double v : r.report.p1_avg) p1 += v / r.report.p1_avg.size();
    for (double v : r.report.p2_avg) p2 += v / r.report.p2_avg.size();
    os << "interference power  " << p1 << " (mean over channels)\n";
    os << "SU transmit power   " << p2 << " (mean over users)\n";
    os << "constraints         " << (fr.feasible ? "satisfied" : "VIOLATED")
       << "  (max relative violation " << 100.0 * fr.max_rel_violation << " %)\n";
    for (const ConstraintRow& row : fr.rows)
        if (row.violated)
            os << "  " << row.name << ": realized " << row.realized << " vs limit "
               << row.limit << '\n';
    if (r.clamp_hit) os << "warning: multiplier clamp hit during the run\n";
    if (r.stationary_excess > 0)
        os << "warning: " << r.stationary_excess
           << " point-CSI power searches had more than three stationary points\n";
}

} // namespace ucra
