#pragma once

// Slot-by-slot simulation: channel draw, sensing, belief update, power
// allocation, multiplier tracking, metric accumulation.  Two accumulator
// sets run side by side: one over the full horizon (drives per-slot
// traces), one starting after a burn-in of half the horizon (drives the
// reported averages, so cold-start transients don't contaminate them).
//
// Interference power and PU rate are averaged over the slots where the PU
// actually transmits; feasibility is always judged on ground truth, even
// when the allocator acted on beliefs.

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "ucra/allocator.hpp"
#include "ucra/beliefs.hpp"
#include "ucra/config.hpp"
#include "ucra/duals.hpp"
#include "ucra/model.hpp"

namespace ucra {

struct Accum {
    long long slots = 0;
    double c2 = 0.0;                     // weighted SU sum rate
    std::vector<double> p2;              // per SU: served power
    std::vector<double> interf;          // per channel: a * h1 * p
    std::vector<double> pu_rate_sum;     // per channel: a * r1(h1 p)
    std::vector<long long> active;       // per channel: PU-on slot count

    Accum() = default;
    Accum(int M, int K)
        : p2(M, 0.0), interf(K, 0.0), pu_rate_sum(K, 0.0), active(K, 0) {}

    void add(const CsiTrue& t, const Allocation& a, const ScenarioConfig& cfg) {
        ++slots;
        int K = cfg.num_channels;
        for (int k = 0; k < K; ++k) {
            int m = a.winner[k];
            double p = a.power[k];
            double x = 0.0;
            if (m >= 0) {
                int i = cfg.link(k, m);
                c2 += cfg.priority[m] * su_rate(t.su_gain[i], p);
                p2[m] += p;
                x = t.sp_gain[i] * p;
            }
            if (t.activity[k]) {
                ++active[k];
                interf[k] += x;
                pu_rate_sum[k] += pu_rate(cfg.pu_snr[k], x);
            }
        }
    }
};

struct Snapshot {
    long long slots = 0;
    double c2_avg = 0.0;
    std::vector<double> p2_avg;   // per SU
    std::vector<double> p1_avg;   // per channel, conditioned on PU activity
    std::vector<double> r1_avg;   // per channel, conditioned on PU activity
    std::vector<double> eps1;     // per channel capacity-loss fraction
    double eps1_avg = 0.0;
    std::vector<long long> active;
};

inline Snapshot snapshot(const Accum& a, const ScenarioConfig& cfg) {
    Snapshot s;
    s.slots = a.slots;
    int M = cfg.num_sus, K = cfg.num_channels;
    s.p2_avg.assign(M, 0.0);
    s.p1_avg.assign(K, 0.0);
    s.r1_avg.assign(K, 0.0);
    s.eps1.assign(K, 0.0);
    s.active = a.active;
    if (a.slots == 0) return s;
    s.c2_avg = a.c2 / a.slots;
    for (int m = 0; m < M; ++m) s.p2_avg[m] = a.p2[m] / a.slots;
    for (int k = 0; k < K; ++k) {
        double full = pu_rate(cfg.pu_snr[k], 0.0);
        if (a.active[k] > 0) {
            s.p1_avg[k] = a.interf[k] / a.active[k];
            s.r1_avg[k] = a.pu_rate_sum[k] / a.active[k];
        } else {
            s.r1_avg[k] = full; // PU never appeared: nothing was lost
        }
        s.eps1[k] = 1.0 - s.r1_avg[k] / full;
        s.eps1_avg += s.eps1[k] / K;
    }
    return s;
}

struct ConstraintRow {
    std::string name;
    double limit = 0.0;
    double realized = 0.0;
    double slack = 0.0; // limit - realized
    bool violated = false;
};

struct FeasibilityReport {
    std::vector<ConstraintRow> rows;
    bool feasible = true;
    double max_rel_violation = 0.0;
};

// Ground-truth averages against the configured limits.  rel_tol widens the
// limits multiplicatively before flagging a row.
inline FeasibilityReport feasibility(const Snapshot& s, const ScenarioConfig& cfg,
                                     double rel_tol = 0.0) {
    FeasibilityReport r;
    auto push = [&](std::string name, double limit, double realized) {
        ConstraintRow row;
        row.name = std::move(name);
        row.limit = limit;
        row.realized = realized;
        row.slack = limit - realized;
        if (!std::isinf(limit)) {
            double rel = (realized - limit) / std::max(limit, 1e-12);
            row.violated = rel > rel_tol;
            if (rel > 0.0) r.max_rel_violation = std::max(r.max_rel_violation, rel);
        }
        if (row.violated) r.feasible = false;
        r.rows.push_back(std::move(row));
    };
    for (int m = 0; m < cfg.num_sus; ++m)
        push("su_power[" + std::to_string(m) + "]", cfg.power_budget[m], s.p2_avg[m]);
    for (int k = 0; k < cfg.num_channels; ++k)
        push("interference[" + std::to_string(k) + "]", cfg.max_interference[k],
             s.p1_avg[k]);
    for (int k = 0; k < cfg.num_channels; ++k)
        push("capacity_loss[" + std::to_string(k) + "]", cfg.max_cap_loss[k], s.eps1[k]);
    return r;
}

struct RunResult {
    Snapshot full;    // averages over the whole horizon
    Snapshot report;  // averages after burn-in
    Multipliers mult; // final multipliers
    long long burn_in = 0;
    bool clamp_hit = false;
    int stationary_excess = 0;
    double wall_seconds = 0.0;
};

// Called after every slot with the running full-horizon accumulator.
using SlotObserver =
    std::function<void(long long slot, const Accum&, const DualState&, const BeliefState&)>;

inline RunResult run_engine(const ScenarioConfig& cfg, const SlotObserver& observer = {}) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();

    const int M = cfg.num_sus, K = cfg.num_channels;
    Rng chan_rng(cfg.seed);
    Rng sense_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    ChannelModel model(cfg, chan_rng);
    BeliefTracker tracker(cfg);
    BeliefState beliefs = tracker.initial();

    DualState duals = DualState::zeros(M, K);
    if (cfg.warm_start) {
        Rng calib_rng(cfg.seed ^ 0xc2b2ae3d27d4eb4fULL);
        duals.mult = offline_dual_calibrate(cfg, calib_rng);
    }
    SchemeFlags flags = scheme_flags(cfg.scheme);

    // Slot context skeleton; per-slot work only swaps gains and beliefs.
    SlotCtx ctx;
    ctx.amp_cap = cfg.amp_cap;
    ctx.ch.resize(K);
    for (int k = 0; k < K; ++k) {
        ctx.ch[k].gamma = cfg.pu_snr[k];
        ctx.ch[k].interf_limit = cfg.max_interference[k];
        ctx.ch[k].rate_floor = cfg.rate_floor(k);
        ctx.ch[k].links.resize(M);
        for (int m = 0; m < M; ++m) ctx.ch[k].links[m].beta = cfg.priority[m];
    }
    std::vector<GainDist> su_store(K * M), sp_store(K * M);
    // stationary SU dists, used whenever an SU belief is the whole prior
    std::vector<GainDist> prior_su(K * M);
    for (int i = 0; i < K * M; ++i)
        prior_su[i] = trunc_exp_dist(0.0, std::numeric_limits<double>::infinity(),
                                     cfg.su_gain_avg[i], cfg.quad_order);

    const long long N = cfg.horizon;
    const long long burn = N / 2;
    Accum full(M, K), post(M, K);
    int stationary_excess = 0;

    for (long long n = 0; n < N; ++n) {
        const CsiTrue& truth = n == 0 ? model.state() : model.step(chan_rng);
        CsiObservation obs = model.sense(sense_rng);
        beliefs = tracker.update(beliefs, obs, truth);

        for (int k = 0; k < K; ++k) {
            ctx.ch[k].q = beliefs.activity_q[k];
            for (int m = 0; m < M; ++m) {
                int i = cfg.link(k, m);
                const SuBelief& sb = beliefs.su[i];
                if (sb.point) {
                    su_store[i] = point_dist(sb.value);
                    ctx.ch[k].links[m].su = &su_store[i];
                } else if (sb.region >= 0) {
                    ctx.ch[k].links[m].su = &tracker.region_dist(k, m, sb.region);
                } else {
                    ctx.ch[k].links[m].su = &prior_su[i];
                }
                const SpBelief& pb = beliefs.sp[i];
                sp_store[i] = pb.point ? point_dist(pb.value)
                                       : gaussian_gain_dist(pb.mu_re, pb.mu_im, pb.var,
                                                            cfg.quad_order);
                ctx.ch[k].links[m].sp = &sp_store[i];
            }
        }

        Allocation alloc = allocate_slot(ctx, duals.mult, flags);
        stationary_excess += alloc.stationary_excess;
        dual_update(duals, ctx, alloc, cfg);

        full.add(truth, alloc, cfg);
        if (n >= burn) post.add(truth, alloc, cfg);
        if (observer) observer(n, full, duals, beliefs);
    }

    RunResult r;
    r.full = snapshot(full, cfg);
    r.report = snapshot(post, cfg);
    r.mult = duals.mult;
    r.burn_in = burn;
    r.clamp_hit = duals.clamp_hit;
    r.stationary_excess = stationary_excess;
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace ucra
