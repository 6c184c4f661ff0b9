#pragma once

// Per-slot resource allocation.  For every (channel, user) pair the
// link-quality indicator
//
//   phi(p) = beta * E[r2(h2, p)] - pi * p - theta * q * E[h1] * p
//            + rho * q * E[r1(gamma, h1 * p)]
//
// is maximized over transmit power, where q is the activity belief and the
// expectations run over the gain beliefs (they collapse to the true gains
// under perfect CSI).  The channel then goes winner-takes-all to the user
// with the largest indicator, competing against a virtual idle user whose
// indicator is the PU term alone.
//
// phi is concave minus a decreasing term, so it can have interior local
// maxima (at most three stationary points under point beliefs).  Powers are
// found by bracketing the derivative on a log grid below the waterfilling
// upper bound and polishing each sign change by bisection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ucra/beliefs.hpp"
#include "ucra/config.hpp"
#include "ucra/rates.hpp"

namespace ucra {

struct Multipliers {
    std::vector<double> pi;    // per SU
    std::vector<double> theta; // per channel
    std::vector<double> rho;   // per channel
};

struct LinkCtx {
    double beta = 1.0;
    const GainDist* su = nullptr; // SU->SU gain belief
    const GainDist* sp = nullptr; // SU->PU gain belief
};

struct ChannelCtx {
    double gamma = 10.0;      // PU receive SNR
    double q = 0.0;           // activity belief E[a]
    double interf_limit = 0.0;
    double rate_floor = 0.0;
    std::vector<LinkCtx> links;
};

struct SlotCtx {
    std::vector<ChannelCtx> ch;
    double amp_cap = 100.0;
};

namespace detail {

// E[h / (1 + h p)] : derivative kernel of the SU rate term.
inline double mean_su_slope(const GainDist& d, double p) {
    if (d.point) return d.value / (1.0 + d.value * p);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t n = d.x.size(), i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += d.w[i] * d.x[i] / (1.0 + d.x[i] * p);
        s1 += d.w[i + 1] * d.x[i + 1] / (1.0 + d.x[i + 1] * p);
        s2 += d.w[i + 2] * d.x[i + 2] / (1.0 + d.x[i + 2] * p);
        s3 += d.w[i + 3] * d.x[i + 3] / (1.0 + d.x[i + 3] * p);
    }
    for (; i < n; ++i) s0 += d.w[i] * d.x[i] / (1.0 + d.x[i] * p);
    return (s0 + s1) + (s2 + s3);
}

// E[h / ((1 + h p + gamma) (1 + h p))] : derivative kernel of the PU term.
inline double mean_pu_slope(const GainDist& d, double p, double gamma) {
    if (d.point) {
        double x = 1.0 + d.value * p;
        return d.value / ((x + gamma) * x);
    }
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t n = d.x.size(), i = 0;
    for (; i + 4 <= n; i += 4) {
        double a0 = 1.0 + d.x[i] * p, a1 = 1.0 + d.x[i + 1] * p;
        double a2 = 1.0 + d.x[i + 2] * p, a3 = 1.0 + d.x[i + 3] * p;
        s0 += d.w[i] * d.x[i] / ((a0 + gamma) * a0);
        s1 += d.w[i + 1] * d.x[i + 1] / ((a1 + gamma) * a1);
        s2 += d.w[i + 2] * d.x[i + 2] / ((a2 + gamma) * a2);
        s3 += d.w[i + 3] * d.x[i + 3] / ((a3 + gamma) * a3);
    }
    for (; i < n; ++i) {
        double a = 1.0 + d.x[i] * p;
        s0 += d.w[i] * d.x[i] / ((a + gamma) * a);
    }
    return (s0 + s1) + (s2 + s3);
}

} // namespace detail

// Indicator value for one link at transmit power p.
inline double lqi(const LinkCtx& l, const ChannelCtx& c, double pi_m, double theta_k,
                  double rho_k, double p) {
    double v = l.beta * l.su->expect([&](double h) { return su_rate(h, p); });
    v -= pi_m * p;
    v -= theta_k * c.q * l.sp->mean * p;
    double rq = rho_k * c.q;
    if (rq != 0.0)
        v += rq * l.sp->expect([&](double h) { return pu_rate(c.gamma, h * p); });
    return v;
}

// d/dp of the indicator.
inline double lqi_dp(const LinkCtx& l, const ChannelCtx& c, double pi_m, double theta_k,
                     double rho_k, double p) {
    double v = l.beta * kLog2E * detail::mean_su_slope(*l.su, p);
    v -= pi_m + theta_k * c.q * l.sp->mean;
    double rq = rho_k * c.q;
    if (rq != 0.0)
        v -= rq * kLog2E * c.gamma * detail::mean_pu_slope(*l.sp, p, c.gamma);
    return v;
}

// Indicator of the virtual idle user: the PU runs uninterfered.
inline double lqi_idle(const ChannelCtx& c, double rho_k) {
    return rho_k * c.q * pu_rate(c.gamma, 0.0);
}

// Largest transmit power this link may use in this slot under the
// instantaneous protection rules of the scheme.
inline double peak_power(const LinkCtx& l, const ChannelCtx& c, const SchemeFlags& f,
                         double amp_cap) {
    double cap = amp_cap;
    if (c.q <= 0.0) return cap; // PU certainly absent: only the amplifier limits
    if (f.cap_interf && l.sp->mean > 1e-300)
        cap = std::min(cap, c.interf_limit / l.sp->mean);
    if (f.cap_closs && cap > 0.0) {
        double full = pu_rate(c.gamma, 0.0);
        if (c.rate_floor >= full) return 0.0;
        if (l.sp->point) {
            double h1 = l.sp->value;
            if (h1 > 1e-300) {
                double x = c.gamma / (std::exp2(c.rate_floor) - 1.0) - 1.0;
                cap = std::min(cap, std::max(0.0, x) / h1);
            }
        } else {
            // E[r1] is decreasing in p; tighten only if the floor binds at cap.
            auto served = [&](double p) {
                return l.sp->expect([&](double h) { return pu_rate(c.gamma, h * p); });
            };
            if (served(cap) < c.rate_floor) {
                double lo = 0.0, hi = cap;
                for (int it = 0; it < 100 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
                    double mid = 0.5 * (lo + hi);
                    (served(mid) >= c.rate_floor ? lo : hi) = mid;
                }
                cap = 0.5 * (lo + hi);
            }
        }
    }
    return cap;
}

struct PowerResult {
    double p = 0.0;
    double phi = 0.0;
    int interior_roots = 0;
};

// Maximize the indicator over [0, cap].
inline PowerResult optimize_power(const LinkCtx& l, const ChannelCtx& c, double pi_m,
                                  double theta_k, double rho_k, double cap) {
    PowerResult out;
    if (cap <= 0.0) {
        out.phi = lqi(l, c, pi_m, theta_k, rho_k, 0.0);
        return out;
    }
    double slope_cost = pi_m + theta_k * c.q * l.sp->mean;
    double bc = l.beta * kLog2E;
    double rq = rho_k * c.q;

    // Waterfilling point of the concave part upper-bounds the maximizer.
    double wf = slope_cost > 0.0
                    ? bc / slope_cost - 1.0 / l.su->mean
                    : std::numeric_limits<double>::infinity();
    if (wf <= 0.0) {
        out.phi = lqi(l, c, pi_m, theta_k, rho_k, 0.0);
        return out;
    }
    double hi = std::min(cap, wf);

    auto dphi = [&](double p) { return lqi_dp(l, c, pi_m, theta_k, rho_k, p); };

    if (rq == 0.0) {
        double p;
        if (l.su->point) {
            p = std::clamp(bc / slope_cost - 1.0 / l.su->value, 0.0, cap);
        } else if (dphi(hi) >= 0.0) {
            p = hi;
        } else {
            double lo = 0.0, up = hi;
            for (int it = 0; it < 200 && up - lo > 1e-15 * std::max(1.0, up); ++it) {
                double mid = 0.5 * (lo + up);
                (dphi(mid) > 0.0 ? lo : up) = mid;
            }
            p = 0.5 * (lo + up);
        }
        out.p = p;
        out.phi = lqi(l, c, pi_m, theta_k, rho_k, p);
        return out;
    }

    // Non-concave case: bracket derivative sign changes on a log grid over
    // (0, hi], polish each bracket, then compare stationary points against
    // the endpoints.
    constexpr int kGrid = 256;
    double candidates[kGrid + 4];
    int ncand = 0;
    candidates[ncand++] = 0.0;

    double prev_p = 0.0;
    double prev_d = dphi(0.0);
    const double ratio = std::pow(1e9, 1.0 / (kGrid - 1));
    double p = hi * 1e-9;
    for (int j = 0; j < kGrid; ++j, p *= ratio) {
        if (j == kGrid - 1) p = hi;
        double d = dphi(p);
        if ((prev_d > 0.0 && d <= 0.0) || (prev_d < 0.0 && d >= 0.0)) {
            double lo = prev_p, up = p, dlo = prev_d;
            for (int it = 0; it < 200 && up - lo > 1e-15 * std::max(1.0, up); ++it) {
                double mid = 0.5 * (lo + up);
                double dm = dphi(mid);
                if ((dlo > 0.0) == (dm > 0.0)) {
                    lo = mid;
                    dlo = dm;
                } else {
                    up = mid;
                }
            }
            candidates[ncand++] = 0.5 * (lo + up);
            ++out.interior_roots;
        }
        prev_p = p;
        prev_d = d;
        if (ncand >= kGrid + 3) break;
    }
    candidates[ncand++] = hi;

    double best_p = 0.0, best_phi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ncand; ++i) {
        double v = lqi(l, c, pi_m, theta_k, rho_k, candidates[i]);
        if (v > best_phi) {
            best_phi = v;
            best_p = candidates[i];
        }
    }
    out.p = best_p;
    out.phi = best_phi;
    return out;
}

struct Allocation {
    std::vector<int> winner;   // per channel; -1 = no SU transmits
    std::vector<double> power; // per channel, of the winner
    std::vector<double> phi;   // winning indicator value
    std::vector<double> phi_idle;
    int stationary_excess = 0; // point-belief links whose derivative had > 3 roots
};

// Optimal powers and winner-takes-all schedule for one slot.  A user
// displaces the virtual idle user only with a strictly larger indicator at
// positive power (a zero-power maximizer ties the idle indicator by
// construction); ties between users go to the lowest index.
inline Allocation allocate_slot(const SlotCtx& s, const Multipliers& mult,
                                const SchemeFlags& flags) {
    int K = static_cast<int>(s.ch.size());
    Allocation a;
    a.winner.assign(K, -1);
    a.power.assign(K, 0.0);
    a.phi.assign(K, 0.0);
    a.phi_idle.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        const ChannelCtx& c = s.ch[k];
        double rho_k = flags.rho ? mult.rho[k] : 0.0;
        double theta_k = flags.theta ? mult.theta[k] : 0.0;
        double idle = lqi_idle(c, rho_k);
        a.phi_idle[k] = idle;
        double best = idle;
        int win = -1;
        double win_p = 0.0;
        for (int m = 0; m < static_cast<int>(c.links.size()); ++m) {
            const LinkCtx& l = c.links[m];
            double cap = peak_power(l, c, flags, s.amp_cap);
            PowerResult r = optimize_power(l, c, mult.pi[m], theta_k, rho_k, cap);
            if (l.su->point && l.sp->point && r.interior_roots > 3)
                ++a.stationary_excess;
            if (r.p > 0.0 && r.phi > best) {
                best = r.phi;
                win = m;
                win_p = r.p;
            }
        }
        a.winner[k] = win;
        a.power[k] = win_p;
        a.phi[k] = best;
    }
    return a;
}

} // namespace ucra
