#pragma once

// Stochastic tracking of the long-term constraint multipliers.  Each slot
// applies a projected subgradient step driven by the realized allocation:
//
//   pi_m    <- [pi_m    - eta (budget_m - served power_m)]+
//   theta_k <- [theta_k - eta q_k (interference limit - E[h1] p)]+
//   rho_k   <- [rho_k   + eta q_k (rate floor - E[r1(h1 p)])]+
//
// Under perfect CSI the expectations collapse to the realized values and
// q_k to the true activity, making the updates subgradients of the dual;
// with beliefs they are the natural conditional-expectation surrogates.
// Multipliers are clamped above as a divergence guard (a hit is reported,
// not silently absorbed).

#include <cmath>
#include <vector>

#include "ucra/allocator.hpp"
#include "ucra/config.hpp"
#include "ucra/rng.hpp"

namespace ucra {

struct DualState {
    Multipliers mult;
    long long iter = 0; // completed updates, drives the diminishing schedule
    bool clamp_hit = false;

    static DualState zeros(int M, int K) {
        DualState d;
        d.mult.pi.assign(M, 0.0);
        d.mult.theta.assign(K, 0.0);
        d.mult.rho.assign(K, 0.0);
        return d;
    }
};

inline double step_size(double base, StepSchedule sched, long long iter) {
    if (sched == StepSchedule::Constant) return base;
    return base / std::sqrt(static_cast<double>(iter + 1));
}

namespace detail {

inline double project(double v, double clamp, bool& hit) {
    if (v < 0.0) return 0.0;
    if (v > clamp) {
        hit = true;
        return clamp;
    }
    return v;
}

} // namespace detail

// One slot of multiplier tracking; reads the same SlotCtx the allocator saw
// so belief expectations stay consistent between the two.
inline void dual_update(DualState& d, const SlotCtx& s, const Allocation& a,
                        const ScenarioConfig& cfg) {
    SchemeFlags f = scheme_flags(cfg.scheme);
    int K = static_cast<int>(s.ch.size());
    int M = static_cast<int>(d.mult.pi.size());

    double eta_pi = step_size(cfg.step_pi, cfg.step_schedule, d.iter);
    double eta_th = step_size(cfg.step_theta, cfg.step_schedule, d.iter);
    double eta_rho = step_size(cfg.step_rho, cfg.step_schedule, d.iter);

    std::vector<double> served(M, 0.0);
    for (int k = 0; k < K; ++k)
        if (a.winner[k] >= 0) served[a.winner[k]] += a.power[k];
    for (int m = 0; m < M; ++m)
        d.mult.pi[m] = detail::project(
            d.mult.pi[m] - eta_pi * (cfg.power_budget[m] - served[m]),
            cfg.mult_clamp, d.clamp_hit);

    for (int k = 0; k < K; ++k) {
        const ChannelCtx& c = s.ch[k];
        if (c.q <= 0.0) continue;
        int w = a.winner[k];
        double p = a.power[k];
        if (f.theta) {
            double interf = w >= 0 ? c.links[w].sp->mean * p : 0.0;
            d.mult.theta[k] = detail::project(
                d.mult.theta[k] - eta_th * c.q * (c.interf_limit - interf),
                cfg.mult_clamp, d.clamp_hit);
        }
        if (f.rho) {
            double rate = (w >= 0 && p > 0.0)
                              ? c.links[w].sp->expect(
                                    [&](double h) { return pu_rate(c.gamma, h * p); })
                              : pu_rate(c.gamma, 0.0);
            d.mult.rho[k] = detail::project(
                d.mult.rho[k] + eta_rho * c.q * (c.rate_floor - rate),
                cfg.mult_clamp, d.clamp_hit);
        }
    }
    ++d.iter;
}

// Offline dual ascent on Monte Carlo batches of stationary channel draws
// with perfect CSI.  Used to warm-start a run near the multiplier
// equilibrium; best effort, the online updates refine from there.
inline Multipliers offline_dual_calibrate(const ScenarioConfig& cfg, Rng& rng,
                                          std::vector<double>* infeasibility_trace = nullptr) {
    const int M = cfg.num_sus, K = cfg.num_channels;
    SchemeFlags f = scheme_flags(cfg.scheme);
    Multipliers mult;
    mult.pi.assign(M, 0.0);
    mult.theta.assign(K, 0.0);
    mult.rho.assign(K, 0.0);

    double p_on = cfg.stationary_active();
    std::vector<GainDist> su(K * M), sp(K * M);
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

    for (int t = 1; t <= cfg.calib_iters; ++t) {
        std::vector<double> g_pi(M, 0.0), g_th(K, 0.0), g_rho(K, 0.0);
        for (int n = 0; n < cfg.calib_samples; ++n) {
            for (int k = 0; k < K; ++k) {
                ctx.ch[k].q = rng.bernoulli(p_on) ? 1.0 : 0.0;
                for (int m = 0; m < M; ++m) {
                    int i = cfg.link(k, m);
                    double re = rng.normal(), im = rng.normal();
                    double h1 = (re * re + im * im) * cfg.sp_gain_avg[i] / 2.0;
                    double h2 = cfg.su_gain_fixed ? cfg.su_gain_avg[i]
                                                  : rng.exponential(cfg.su_gain_avg[i]);
                    su[i] = point_dist(h2);
                    sp[i] = point_dist(h1);
                    ctx.ch[k].links[m].su = &su[i];
                    ctx.ch[k].links[m].sp = &sp[i];
                }
            }
            Allocation a = allocate_slot(ctx, mult, f);
            for (int k = 0; k < K; ++k) {
                if (a.winner[k] >= 0) g_pi[a.winner[k]] += a.power[k];
                if (ctx.ch[k].q <= 0.0) continue;
                double x = a.winner[k] >= 0
                               ? ctx.ch[k].links[a.winner[k]].sp->value * a.power[k]
                               : 0.0;
                g_th[k] += ctx.ch[k].interf_limit - x;
                g_rho[k] += ctx.ch[k].rate_floor - pu_rate(ctx.ch[k].gamma, x);
            }
        }
        double eta = cfg.calib_step / std::sqrt(static_cast<double>(t));
        double inv = 1.0 / cfg.calib_samples;
        bool hit = false;
        double worst = 0.0;
        for (int m = 0; m < M; ++m) {
            double slack = cfg.power_budget[m] - g_pi[m] * inv;
            mult.pi[m] = detail::project(mult.pi[m] - eta * slack, 1e6, hit);
            worst = std::max(worst, -slack / cfg.power_budget[m]);
        }
        for (int k = 0; k < K; ++k) {
            if (f.theta) {
                double slack = g_th[k] * inv;
                mult.theta[k] = detail::project(mult.theta[k] - eta * slack, 1e6, hit);
                if (cfg.max_interference[k] > 0.0)
                    worst = std::max(worst, -slack / cfg.max_interference[k]);
            }
            if (f.rho) {
                double gap = g_rho[k] * inv; // positive when the floor is missed
                mult.rho[k] = detail::project(mult.rho[k] + eta * gap, 1e6, hit);
                if (ctx.ch[k].rate_floor > 0.0)
                    worst = std::max(worst, gap / ctx.ch[k].rate_floor);
            }
        }
        if (infeasibility_trace) infeasibility_trace->push_back(worst);
    }
    return mult;
}

} // namespace ucra
