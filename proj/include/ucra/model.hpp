#pragma once

// Ground-truth channel process and the sensing front end.
//
// Per slot and channel the PU is on or off (two-state Markov chain or iid).
// Each SU->PU link is a two-component Gauss-Markov process
//     g[n] = sqrt(corr) * g[n-1] + sqrt(1 - corr) * d[n]
// scaled so E||g||^2 equals the configured mean gain; the interference
// gain is ||g||^2.  SU->SU gains are iid exponential across slots.
//
// Draw order per slot is fixed (activities, then SP innovations, then SU
// gains) and the sensing noise uses its own stream, so runs with matched
// seeds see identical channels regardless of scheme or sensing model.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ucra/config.hpp"
#include "ucra/rng.hpp"

namespace ucra {

struct CsiTrue {
    long long slot = 0;
    std::vector<std::uint8_t> activity; // K
    std::vector<double> sp_re, sp_im;   // K*M link components
    std::vector<double> sp_gain;        // K*M  ||g||^2
    std::vector<double> su_gain;        // K*M
};

// What the secondary system observes in one slot.  Field validity depends
// on the sensing mode; flags mark the periodic measurements.
struct CsiObservation {
    long long slot = 0;
    std::vector<std::uint8_t> activity;  // exact PU state (modes that know it)
    std::vector<std::uint8_t> det_bit;   // detector output per channel
    bool act_fresh = false;              // detector ran this slot
    std::vector<double> su_gain;         // exact SU gains (unquantized modes)
    std::vector<int> su_region;          // quantizer cell per link
    std::vector<double> sp_re, sp_im;    // noisy SU->PU pilot components
    std::vector<double> sp_gain;         // exact SU->PU gains (other modes)
    bool sp_fresh = false;               // pilot measured this slot
};

// Equi-probable quantizer cell edges for an exponential gain of mean hbar:
// cell i covers [t[i-1], t[i]) with t[0] = 0 and t[L] = inf.
inline std::vector<double> quantizer_thresholds(double hbar, int levels) {
    if (levels < 1) throw std::invalid_argument("quantizer needs >= 1 level");
    if (hbar <= 0.0) throw std::invalid_argument("quantizer needs positive mean gain");
    std::vector<double> t(levels - 1);
    for (int i = 1; i < levels; ++i)
        t[i - 1] = -hbar * std::log(1.0 - static_cast<double>(i) / levels);
    return t;
}

inline int quantizer_region(const std::vector<double>& thresholds, double h) {
    int r = 0;
    while (r < static_cast<int>(thresholds.size()) && h >= thresholds[r]) ++r;
    return r;
}

class ChannelModel {
public:
    ChannelModel(const ScenarioConfig& cfg, Rng& rng) : cfg_(&cfg) {
        int K = cfg.num_channels, M = cfg.num_sus;
        state_.activity.resize(K);
        state_.sp_re.resize(K * M);
        state_.sp_im.resize(K * M);
        state_.sp_gain.resize(K * M);
        state_.su_gain.resize(K * M);
        if (cfg.sensing == SensingMode::Quantized) {
            int L = cfg.quantizer_levels;
            if (L >= 1) {
                thresholds_.resize(K * M);
                for (int i = 0; i < K * M; ++i)
                    thresholds_[i] = quantizer_thresholds(cfg.su_gain_avg[i], L);
            }
        }
        // stationary draw for slot 0
        double pa = cfg.stationary_active();
        for (int k = 0; k < K; ++k)
            state_.activity[k] = rng.bernoulli(pa) ? 1 : 0;
        for (int i = 0; i < K * M; ++i) {
            double sigma = std::sqrt(cfg.sp_gain_avg[i] / 2.0);
            state_.sp_re[i] = sigma * rng.normal();
            state_.sp_im[i] = sigma * rng.normal();
        }
        draw_su(rng);
        refresh_sp_gain();
        state_.slot = 0;
    }

    const CsiTrue& state() const { return state_; }

    // Advance the channel by one slot.
    const CsiTrue& step(Rng& rng) {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        for (int k = 0; k < K; ++k) {
            if (c.activity_model == ActivityModel::Iid) {
                state_.activity[k] = rng.bernoulli(c.activity_prob) ? 1 : 0;
            } else {
                double stay = state_.activity[k] ? c.p11 : c.p01;
                state_.activity[k] = rng.bernoulli(stay) ? 1 : 0;
            }
        }
        for (int i = 0; i < K * M; ++i) {
            double corr = c.sp_corr[i];
            double sigma = std::sqrt(c.sp_gain_avg[i] / 2.0);
            double a = std::sqrt(corr), b = std::sqrt(1.0 - corr);
            state_.sp_re[i] = a * state_.sp_re[i] + b * sigma * rng.normal();
            state_.sp_im[i] = a * state_.sp_im[i] + b * sigma * rng.normal();
        }
        draw_su(rng);
        refresh_sp_gain();
        ++state_.slot;
        return state_;
    }

    // Produce this slot's observation; sensing noise comes from its own
    // stream so the truth trajectory is invariant to the sensing mode.
    CsiObservation sense(Rng& rng) const {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        CsiObservation o;
        o.slot = state_.slot;
        switch (c.sensing) {
        case SensingMode::Perfect:
            o.activity = state_.activity;
            o.su_gain = state_.su_gain;
            o.sp_gain = state_.sp_gain;
            o.sp_re = state_.sp_re;
            o.sp_im = state_.sp_im;
            o.act_fresh = o.sp_fresh = true;
            break;
        case SensingMode::Quantized:
            o.activity = state_.activity;
            o.sp_gain = state_.sp_gain;
            o.sp_re = state_.sp_re;
            o.sp_im = state_.sp_im;
            o.act_fresh = o.sp_fresh = true;
            if (c.quantizer_levels >= 1) {
                o.su_region.resize(K * M);
                for (int i = 0; i < K * M; ++i)
                    o.su_region[i] = quantizer_region(thresholds_[i], state_.su_gain[i]);
            } else {
                o.su_gain = state_.su_gain; // L = inf degenerates to exact feedback
            }
            break;
        case SensingMode::Detector:
            o.su_gain = state_.su_gain;
            o.sp_gain = state_.sp_gain;
            o.sp_re = state_.sp_re;
            o.sp_im = state_.sp_im;
            o.sp_fresh = true;
            o.act_fresh = (state_.slot % c.activity_period) == 0;
            if (o.act_fresh) {
                o.det_bit.resize(K);
                for (int k = 0; k < K; ++k) {
                    double u = rng.uniform();
                    bool on = state_.activity[k];
                    o.det_bit[k] = on ? (u < c.p_md ? 0 : 1)  // missed detection
                                      : (u < c.p_fa ? 1 : 0); // false alarm
                }
            }
            break;
        case SensingMode::NoisyOutdated:
            o.activity = state_.activity;
            o.su_gain = state_.su_gain;
            o.act_fresh = true;
            o.sp_fresh = (state_.slot % c.sense_period) == 0;
            if (o.sp_fresh) {
                o.sp_re.resize(K * M);
                o.sp_im.resize(K * M);
                double sd = std::sqrt(c.meas_noise);
                for (int i = 0; i < K * M; ++i) {
                    o.sp_re[i] = state_.sp_re[i] + sd * rng.normal();
                    o.sp_im[i] = state_.sp_im[i] + sd * rng.normal();
                }
            }
            break;
        }
        return o;
    }

    const std::vector<double>& su_thresholds(int k, int m) const {
        return thresholds_[cfg_->link(k, m)];
    }

private:
    void draw_su(Rng& rng) {
        const ScenarioConfig& c = *cfg_;
        int n = c.num_channels * c.num_sus;
        for (int i = 0; i < n; ++i)
            state_.su_gain[i] = c.su_gain_fixed ? c.su_gain_avg[i]
                                                : rng.exponential(c.su_gain_avg[i]);
    }

    void refresh_sp_gain() {
        for (std::size_t i = 0; i < state_.sp_gain.size(); ++i)
            state_.sp_gain[i] = state_.sp_re[i] * state_.sp_re[i] +
                                state_.sp_im[i] * state_.sp_im[i];
    }

    const ScenarioConfig* cfg_;
    CsiTrue state_;
    std::vector<std::vector<double>> thresholds_; // per link, quantized mode
};

} // namespace ucra
