#pragma once

// Posterior tracking for imperfect CSI.  Per channel the PU activity is a
// Bernoulli belief q; per SU->PU link the two channel components carry a
// Gaussian posterior (Kalman-tracked under noisy/outdated pilots); per
// SU->SU link the gain is either known or confined to a quantizer cell of
// its exponential prior.
//
// Expectations over gain beliefs are evaluated by fixed-order quadrature:
// Gauss-Legendre inside finite quantizer cells, Gauss-Laguerre on the
// semi-infinite tail, and a Gauss-Legendre rule in the amplitude domain for
// the noncentral chi-square gain implied by a Gaussian component posterior.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ucra/config.hpp"
#include "ucra/model.hpp"
#include "ucra/quadrature.hpp"

namespace ucra {

struct SuBelief {
    bool point = true;
    double value = 0.0; // point mass
    int region = -1;    // quantizer cell, -1 when point
    double lo = 0.0;    // cell bounds; hi = inf on the tail cell
    double hi = 0.0;
    double hbar = 1.0;  // prior mean of the underlying exponential
};

struct SpBelief {
    bool point = true;
    double value = 0.0;              // point mass on the gain
    double mu_re = 0.0, mu_im = 0.0; // Gaussian posterior otherwise
    double var = 0.0;                // per-component variance
};

struct BeliefState {
    long long slot = -1;
    std::vector<double> activity_q; // K
    std::vector<SuBelief> su;       // K*M
    std::vector<SpBelief> sp;       // K*M
};

// P(PU on | detector bit) under stationary priors.
inline double activity_posterior(bool bit, double p_on, double p_fa, double p_md) {
    if (p_on < 0.0 || p_on > 1.0 || p_fa < 0.0 || p_fa > 1.0 || p_md < 0.0 || p_md > 1.0)
        throw std::invalid_argument("probabilities must lie in [0,1]");
    double p_off = 1.0 - p_on;
    if (bit) {
        double num = (1.0 - p_md) * p_on;
        double den = p_fa * p_off + num;
        return den > 0.0 ? num / den : p_on;
    }
    double num = p_md * p_on;
    double den = (1.0 - p_fa) * p_off + num;
    return den > 0.0 ? num / den : p_on;
}

// One step of the activity chain applied to a belief.
inline double activity_propagate(double q, double p11, double p01) {
    return q * p11 + (1.0 - q) * p01;
}

// Gauss-Markov time update of a component posterior.
inline void gm_predict(SpBelief& b, double corr, double hbar) {
    double a = std::sqrt(corr);
    b.mu_re *= a;
    b.mu_im *= a;
    b.var = corr * b.var + (1.0 - corr) * (hbar / 2.0);
}

// Measurement update with per-component pilot noise nu.
inline void kalman_correct(SpBelief& b, double obs_re, double obs_im, double nu) {
    double den = b.var + nu;
    if (den <= 0.0) throw std::invalid_argument("degenerate Kalman update");
    double g = b.var / den;
    b.mu_re += g * (obs_re - b.mu_re);
    b.mu_im += g * (obs_im - b.mu_im);
    b.var = b.var * nu / den;
}

inline double expected_sp_gain(const SpBelief& b) {
    if (b.point) return b.value;
    return b.mu_re * b.mu_re + b.mu_im * b.mu_im + 2.0 * b.var;
}

// Quadrature view of a scalar gain belief; weights sum to one.
struct GainDist {
    bool point = true;
    double value = 0.0;
    std::vector<double> x, w;
    double mean = 0.0;

    template <class F>
    double expect(F&& f) const {
        if (point) return f(value);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
        return s;
    }
};

inline GainDist point_dist(double v) {
    GainDist d;
    d.point = true;
    d.value = v;
    d.mean = v;
    return d;
}

// Exponential(hbar) restricted to [lo, hi); hi = inf uses the Laguerre rule
// (the truncated exponential is memoryless, so the tail is exact up to rule
// order).
inline GainDist trunc_exp_dist(double lo, double hi, double hbar, int order) {
    if (hbar <= 0.0) throw std::invalid_argument("exponential mean must be positive");
    if (!(hi > lo)) throw std::invalid_argument("empty gain region");
    GainDist d;
    d.point = false;
    d.x.resize(order);
    d.w.resize(order);
    if (std::isinf(hi)) {
        const QuadRule& q = gauss_laguerre(order);
        for (int i = 0; i < order; ++i) {
            d.x[i] = lo + hbar * q.x[i];
            d.w[i] = q.w[i];
        }
    } else {
        const QuadRule& q = gauss_legendre(order);
        double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
        for (int i = 0; i < order; ++i) {
            double x = mid + half * q.x[i];
            d.x[i] = x;
            d.w[i] = q.w[i] * std::exp(-x / hbar);
        }
    }
    double s = 0.0, m = 0.0;
    for (int i = 0; i < order; ++i) s += d.w[i];
    for (int i = 0; i < order; ++i) { d.w[i] /= s; m += d.w[i] * d.x[i]; }
    d.mean = m;
    return d;
}

// Gain ||g||^2 for g with independent N(mu_*, var) components: noncentral
// chi-square with two degrees of freedom, integrated in the amplitude
// domain where the density is the Rician bell.
inline GainDist gaussian_gain_dist(double mu_re, double mu_im, double var, int order) {
    double s = mu_re * mu_re + mu_im * mu_im;
    if (var < 0.0) throw std::invalid_argument("negative variance");
    if (var <= 1e-13 * std::max(1.0, s)) return point_dist(s + 2.0 * var);
    GainDist d;
    d.point = false;
    d.x.resize(order);
    d.w.resize(order);
    double r = std::sqrt(s), sd = std::sqrt(var);
    double lo = std::max(0.0, r - 9.0 * sd), hi = r + 9.0 * sd;
    const QuadRule& q = gauss_legendre(order);
    double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) {
        double t = mid + half * q.x[i];
        double dev = t - r;
        double pdf = (t / var) * std::exp(-dev * dev / (2.0 * var)) *
                     bessel_i0e(t * r / var);
        d.x[i] = t * t;
        d.w[i] = q.w[i] * pdf;
        sum += d.w[i];
    }
    for (int i = 0; i < order; ++i) d.w[i] /= sum;
    d.mean = s + 2.0 * var; // exact first moment
    return d;
}

inline GainDist dist_of(const SuBelief& b, int order) {
    return b.point ? point_dist(b.value) : trunc_exp_dist(b.lo, b.hi, b.hbar, order);
}

inline GainDist dist_of(const SpBelief& b, int order) {
    return b.point ? point_dist(b.value)
                   : gaussian_gain_dist(b.mu_re, b.mu_im, b.var, order);
}

// Turns the observation stream into the belief state the allocator sees,
// according to the configured CSI variant.
class BeliefTracker {
public:
    explicit BeliefTracker(const ScenarioConfig& cfg) : cfg_(&cfg) {
        int K = cfg.num_channels, M = cfg.num_sus;
        if (cfg.sensing == SensingMode::Quantized && cfg.quantizer_levels >= 1) {
            thresholds_.resize(K * M);
            region_dists_.resize(K * M);
            for (int i = 0; i < K * M; ++i) {
                thresholds_[i] = quantizer_thresholds(cfg.su_gain_avg[i], cfg.quantizer_levels);
                region_dists_[i].resize(cfg.quantizer_levels);
                for (int r = 0; r < cfg.quantizer_levels; ++r) {
                    double lo = r == 0 ? 0.0 : thresholds_[i][r - 1];
                    double hi = r == cfg.quantizer_levels - 1
                                    ? std::numeric_limits<double>::infinity()
                                    : thresholds_[i][r];
                    region_dists_[i][r] = trunc_exp_dist(lo, hi, cfg.su_gain_avg[i], cfg.quad_order);
                }
            }
        }
    }

    // Belief before any observation: stationary distributions.
    BeliefState initial() const {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        BeliefState b;
        b.slot = -1;
        b.activity_q.assign(K, c.stationary_active());
        b.su.resize(K * M);
        b.sp.resize(K * M);
        for (int i = 0; i < K * M; ++i) {
            b.su[i] = stationary_su(i);
            b.sp[i] = SpBelief{false, 0.0, 0.0, 0.0, c.sp_gain_avg[i] / 2.0};
        }
        return b;
    }

    BeliefState update(const BeliefState& prev, const CsiObservation& obs,
                       const CsiTrue& truth) const {
        switch (cfg_->csi) {
        case CsiVariant::Truth: return from_truth(truth);
        case CsiVariant::Observation: return from_observation(prev, obs);
        case CsiVariant::Prior: {
            BeliefState b = initial();
            b.slot = obs.slot;
            return b;
        }
        case CsiVariant::Optimal: break;
        }
        return posterior_update(prev, obs);
    }

    const GainDist& region_dist(int k, int m, int region) const {
        return region_dists_[cfg_->link(k, m)][region];
    }

    bool has_region_dists() const { return !region_dists_.empty(); }

private:
    SuBelief stationary_su(int link) const {
        SuBelief s;
        s.point = false;
        s.region = -1;
        s.lo = 0.0;
        s.hi = std::numeric_limits<double>::infinity();
        s.hbar = cfg_->su_gain_avg[link];
        return s;
    }

    BeliefState from_truth(const CsiTrue& t) const {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        BeliefState b;
        b.slot = t.slot;
        b.activity_q.resize(K);
        for (int k = 0; k < K; ++k) b.activity_q[k] = t.activity[k];
        b.su.resize(K * M);
        b.sp.resize(K * M);
        for (int i = 0; i < K * M; ++i) {
            b.su[i] = SuBelief{true, t.su_gain[i], -1, 0.0, 0.0, c.su_gain_avg[i]};
            b.sp[i] = SpBelief{true, t.sp_gain[i], 0.0, 0.0, 0.0};
        }
        return b;
    }

    // Point masses at the latest raw observation, held between sensing
    // instants.  Quantized SU feedback is reconstructed as the cell mean.
    BeliefState from_observation(const BeliefState& prev, const CsiObservation& o) const {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        BeliefState b;
        b.slot = o.slot;
        b.activity_q.resize(K);
        for (int k = 0; k < K; ++k) {
            if (c.sensing == SensingMode::Detector)
                b.activity_q[k] = o.act_fresh ? static_cast<double>(o.det_bit[k])
                                              : prev.activity_q[k];
            else
                b.activity_q[k] = o.activity[k];
        }
        b.su.resize(K * M);
        b.sp.resize(K * M);
        for (int k = 0; k < K; ++k) {
            for (int m = 0; m < M; ++m) {
                int i = c.link(k, m);
                if (!o.su_region.empty())
                    b.su[i] = SuBelief{true, region_dists_[i][o.su_region[i]].mean,
                                       -1, 0.0, 0.0, c.su_gain_avg[i]};
                else
                    b.su[i] = SuBelief{true, o.su_gain[i], -1, 0.0, 0.0, c.su_gain_avg[i]};
                if (c.sensing == SensingMode::NoisyOutdated) {
                    if (o.sp_fresh)
                        b.sp[i] = SpBelief{true, o.sp_re[i] * o.sp_re[i] + o.sp_im[i] * o.sp_im[i],
                                           0.0, 0.0, 0.0};
                    else
                        b.sp[i] = prev.sp[i];
                } else {
                    b.sp[i] = SpBelief{true, o.sp_gain[i], 0.0, 0.0, 0.0};
                }
            }
        }
        return b;
    }

    BeliefState posterior_update(const BeliefState& prev, const CsiObservation& o) const {
        const ScenarioConfig& c = *cfg_;
        int K = c.num_channels, M = c.num_sus;
        BeliefState b;
        b.slot = o.slot;
        b.activity_q.resize(K);
        for (int k = 0; k < K; ++k) {
            if (c.sensing == SensingMode::Detector) {
                if (o.act_fresh)
                    b.activity_q[k] = activity_posterior(o.det_bit[k], c.stationary_active(),
                                                         c.p_fa, c.p_md);
                else
                    b.activity_q[k] = c.activity_model == ActivityModel::Iid
                                          ? prev.activity_q[k]
                                          : activity_propagate(prev.activity_q[k], c.p11, c.p01);
            } else {
                b.activity_q[k] = o.activity[k];
            }
        }
        b.su.resize(K * M);
        b.sp.resize(K * M);
        for (int k = 0; k < K; ++k) {
            for (int m = 0; m < M; ++m) {
                int i = c.link(k, m);
                if (!o.su_region.empty()) {
                    int r = o.su_region[i];
                    const std::vector<double>& t = thresholds_[i];
                    SuBelief s;
                    s.point = false;
                    s.region = r;
                    s.lo = r == 0 ? 0.0 : t[r - 1];
                    s.hi = r == static_cast<int>(t.size())
                               ? std::numeric_limits<double>::infinity()
                               : t[r];
                    s.hbar = c.su_gain_avg[i];
                    b.su[i] = s;
                } else {
                    b.su[i] = SuBelief{true, o.su_gain[i], -1, 0.0, 0.0, c.su_gain_avg[i]};
                }
                if (c.sensing == SensingMode::NoisyOutdated) {
                    SpBelief s = prev.sp[i];
                    if (s.point) // cannot happen from this tracker, but stay safe
                        s = SpBelief{false, 0.0, 0.0, 0.0, c.sp_gain_avg[i] / 2.0};
                    gm_predict(s, c.sp_corr[i], c.sp_gain_avg[i]);
                    if (o.sp_fresh)
                        kalman_correct(s, o.sp_re[i], o.sp_im[i], c.meas_noise);
                    b.sp[i] = s;
                } else {
                    b.sp[i] = SpBelief{true, o.sp_gain[i], 0.0, 0.0, 0.0};
                }
            }
        }
        return b;
    }

    const ScenarioConfig* cfg_;
    std::vector<std::vector<double>> thresholds_;
    std::vector<std::vector<GainDist>> region_dists_;
};

} // namespace ucra
