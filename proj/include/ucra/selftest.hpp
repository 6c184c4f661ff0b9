#pragma once

// Independent numerical oracles for the core solvers.  Each check builds
// its expected answer by a method that shares no code with the path under
// test (dense grid search, exhaustive enumeration, grid Bayes, plain Monte
// Carlo, finite differences) and reports the worst deviation seen.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ucra/allocator.hpp"
#include "ucra/beliefs.hpp"
#include "ucra/rates.hpp"
#include "ucra/rng.hpp"

namespace ucra {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace oracle {

// Four-term indicator evaluated from scratch (point beliefs).
inline double phi_point(double beta, double h2, double h1, double a, double gamma,
                        double pi, double theta, double rho, double p) {
    return beta * std::log2(1.0 + h2 * p) - pi * p - theta * a * h1 * p +
           rho * a * std::log2(1.0 + gamma / (1.0 + h1 * p));
}

struct PowerInstance {
    double beta, h2, h1, a, gamma, pi, theta, rho, cap;
};

inline PowerInstance random_power_instance(Rng& rng) {
    auto logu = [&](double lo, double hi) {
        return lo * std::exp(rng.uniform() * std::log(hi / lo));
    };
    PowerInstance s;
    s.beta = 0.5 + 1.5 * rng.uniform();
    s.h2 = logu(0.05, 10.0);
    s.h1 = logu(0.05, 10.0);
    s.a = rng.bernoulli(0.9) ? 1.0 : 0.0;
    s.gamma = logu(1.0, 100.0);
    s.pi = logu(0.02, 5.0);
    s.theta = rng.bernoulli(0.75) ? 2.0 * rng.uniform() : 0.0;
    s.rho = rng.bernoulli(0.75) ? 3.0 * rng.uniform() : 0.0;
    s.cap = logu(0.1, 50.0);
    return s;
}

inline PowerResult solve_instance(const PowerInstance& s, GainDist& su, GainDist& sp,
                                  ChannelCtx& c, LinkCtx& l) {
    su = point_dist(s.h2);
    sp = point_dist(s.h1);
    c.gamma = s.gamma;
    c.q = s.a;
    l.beta = s.beta;
    l.su = &su;
    l.sp = &sp;
    return optimize_power(l, c, s.pi, s.theta, s.rho, s.cap);
}

} // namespace oracle

// Power search vs dense uniform grid on [0, cap].
inline CheckResult check_power_vs_grid(int instances, int grid, std::uint64_t seed,
                                       double tol = 1e-8) {
    Rng rng(seed);
    double worst = -1.0;
    int over3 = 0;
    GainDist su, sp;
    ChannelCtx c;
    LinkCtx l;
    for (int i = 0; i < instances; ++i) {
        oracle::PowerInstance s = oracle::random_power_instance(rng);
        PowerResult r = oracle::solve_instance(s, su, sp, c, l);
        if (r.interior_roots > 3) ++over3;
        double best = -1e300;
        for (int j = 0; j <= grid; ++j) {
            double p = s.cap * j / grid;
            best = std::max(best, oracle::phi_point(s.beta, s.h2, s.h1, s.a, s.gamma,
                                                    s.pi, s.theta, s.rho, p));
        }
        double ours = oracle::phi_point(s.beta, s.h2, s.h1, s.a, s.gamma, s.pi, s.theta,
                                        s.rho, r.p);
        worst = std::max(worst, best - ours);
    }
    CheckResult out;
    out.name = "power search vs dense grid";
    out.pass = worst <= tol && over3 == 0;
    std::ostringstream d;
    d << "max phi gap " << worst << " over " << instances << " instances (tol " << tol
      << "), " << over3 << " with >3 stationary points";
    out.detail = d.str();
    return out;
}

// Winner selection vs exhaustive enumeration with the published tie rule.
inline CheckResult check_schedule_vs_enumeration(int instances, std::uint64_t seed) {
    Rng rng(seed);
    int mismatches = 0;
    for (int i = 0; i < instances; ++i) {
        int M = 1 + static_cast<int>(rng.uniform() * 5.0);
        SlotCtx ctx;
        ctx.amp_cap = 100.0;
        ctx.ch.resize(1);
        ChannelCtx& c = ctx.ch[0];
        c.gamma = 1.0 + 30.0 * rng.uniform();
        c.q = rng.bernoulli(0.7) ? 1.0 : 0.0;
        c.interf_limit = 0.15;
        c.rate_floor = 0.5 * pu_rate(c.gamma, 0.0);
        std::vector<GainDist> su(M), sp(M);
        c.links.resize(M);
        Multipliers mult;
        mult.theta.assign(1, rng.uniform());
        mult.rho.assign(1, 2.0 * rng.uniform());
        mult.pi.resize(M);
        for (int m = 0; m < M; ++m) {
            su[m] = point_dist(0.05 * std::exp(rng.uniform() * std::log(200.0)));
            sp[m] = point_dist(0.05 * std::exp(rng.uniform() * std::log(200.0)));
            c.links[m].beta = 0.5 + 1.5 * rng.uniform();
            c.links[m].su = &su[m];
            c.links[m].sp = &sp[m];
            mult.pi[m] = 0.05 * std::exp(rng.uniform() * std::log(100.0));
        }
        SchemeFlags flags = scheme_flags(Scheme::APC);
        Allocation a = allocate_slot(ctx, mult, flags);

        // enumeration: recompute every user's optimum, then apply the rule
        // "idle unless someone strictly beats the idle indicator at p > 0;
        // ties between users go to the lowest index"
        double idle = lqi_idle(c, mult.rho[0]);
        int winner = -1;
        double best = idle;
        for (int m = 0; m < M; ++m) {
            double cap = peak_power(c.links[m], c, flags, ctx.amp_cap);
            PowerResult r = optimize_power(c.links[m], c, mult.pi[m], mult.theta[0],
                                           mult.rho[0], cap);
            if (r.p > 0.0 && r.phi > best) {
                best = r.phi;
                winner = m;
            }
        }
        if (winner != a.winner[0]) ++mismatches;
    }
    CheckResult out;
    out.name = "winner selection vs enumeration";
    out.pass = mismatches == 0;
    out.detail = std::to_string(mismatches) + " mismatches over " +
                 std::to_string(instances) + " instances";
    return out;
}

// With no PU term the optimum is plain waterfilling in closed form.
inline CheckResult check_waterfilling_closed_form(int instances, std::uint64_t seed,
                                                  double tol = 1e-12) {
    Rng rng(seed);
    double worst = 0.0;
    GainDist su, sp;
    ChannelCtx c;
    LinkCtx l;
    for (int i = 0; i < instances; ++i) {
        oracle::PowerInstance s = oracle::random_power_instance(rng);
        s.rho = 0.0;
        PowerResult r = oracle::solve_instance(s, su, sp, c, l);
        double denom = s.pi + s.theta * s.a * s.h1;
        double expect = std::clamp(s.beta * kLog2E / denom - 1.0 / s.h2, 0.0, s.cap);
        worst = std::max(worst, std::abs(r.p - expect));
    }
    CheckResult out;
    out.name = "waterfilling closed form";
    out.pass = worst <= tol;
    std::ostringstream d;
    d << "max |p - closed form| " << worst << " (tol " << tol << ")";
    out.detail = d.str();
    return out;
}

// Kalman measurement update vs Bayes rule on a dense grid (per component).
inline CheckResult check_kalman_vs_grid(int cases, std::uint64_t seed, double tol = 1e-6) {
    Rng rng(seed);
    double worst = 0.0;
    const int G = 20000;
    std::vector<double> post(G + 1);
    for (int i = 0; i < cases; ++i) {
        double var_prior = 0.01 + 2.0 * rng.uniform();
        double nu = 0.01 + 2.0 * rng.uniform();
        double mu_prior = -3.0 + 6.0 * rng.uniform();
        double obs = mu_prior + (-4.0 + 8.0 * rng.uniform());

        SpBelief b{false, 0.0, mu_prior, 0.0, var_prior};
        kalman_correct(b, obs, 0.0, nu);

        double span = 12.0 * std::sqrt(var_prior + nu);
        double lo = std::min(mu_prior, obs) - span, hi = std::max(mu_prior, obs) + span;
        double dx = (hi - lo) / G;
        double norm = 0.0;
        for (int g = 0; g <= G; ++g) {
            double x = lo + g * dx;
            double lp = -(x - mu_prior) * (x - mu_prior) / (2.0 * var_prior) -
                        (obs - x) * (obs - x) / (2.0 * nu);
            post[g] = std::exp(lp);
            norm += post[g] * dx;
        }
        double kl = 0.0;
        for (int g = 0; g <= G; ++g) {
            double x = lo + g * dx;
            double p = post[g] / norm;
            if (p < 1e-300) continue;
            double lq = -0.5 * std::log(2.0 * 3.14159265358979323846 * b.var) -
                        (x - b.mu_re) * (x - b.mu_re) / (2.0 * b.var);
            kl += p * (std::log(p) - lq) * dx;
        }
        worst = std::max(worst, std::abs(kl));
    }
    CheckResult out;
    out.name = "Kalman update vs grid Bayes";
    out.pass = worst <= tol;
    std::ostringstream d;
    d << "max |KL| " << worst << " over " << cases << " cases (tol " << tol << ")";
    out.detail = d.str();
    return out;
}

// Quadrature expectations vs plain Monte Carlo.
inline CheckResult check_quadrature_vs_mc(long long samples, std::uint64_t seed,
                                          double tol = 0.005) {
    Rng rng(seed);
    double worst = 0.0;
    auto funcs = [](int which, double h) {
        switch (which) {
        case 0: return h;
        case 1: return su_rate(h, 0.7);
        default: return pu_rate(10.0, h * 0.7);
        }
    };

    { // truncated exponential cells, L = 4, mean 1
        double hbar = 1.0;
        std::vector<double> thr = quantizer_thresholds(hbar, 4);
        std::vector<double> sum(4 * 3, 0.0);
        std::vector<long long> cnt(4, 0);
        for (long long n = 0; n < samples; ++n) {
            double h = rng.exponential(hbar);
            int r = quantizer_region(thr, h);
            ++cnt[r];
            for (int f = 0; f < 3; ++f) sum[r * 3 + f] += funcs(f, h);
        }
        for (int r = 0; r < 4; ++r) {
            double lo = r == 0 ? 0.0 : thr[r - 1];
            double hi = r == 3 ? std::numeric_limits<double>::infinity() : thr[r];
            GainDist d = trunc_exp_dist(lo, hi, hbar, 64);
            for (int f = 0; f < 3; ++f) {
                double mc = sum[r * 3 + f] / cnt[r];
                double q = d.expect([&](double h) { return funcs(f, h); });
                worst = std::max(worst, std::abs(q - mc) / std::max(std::abs(mc), 1e-9));
            }
        }
    }

    { // Gaussian component posteriors -> noncentral chi-square gains
        struct Case { double re, im, var; };
        Case cases[3] = {{1.0, 0.0, 0.25}, {0.6, 0.8, 0.1}, {0.0, 0.0, 0.5}};
        for (const Case& cs : cases) {
            GainDist d = gaussian_gain_dist(cs.re, cs.im, cs.var, 64);
            double sd = std::sqrt(cs.var);
            double sum[3] = {0.0, 0.0, 0.0};
            for (long long n = 0; n < samples; ++n) {
                double a = cs.re + sd * rng.normal();
                double b = cs.im + sd * rng.normal();
                double h = a * a + b * b;
                for (int f = 0; f < 3; ++f) sum[f] += funcs(f, h);
            }
            for (int f = 0; f < 3; ++f) {
                double mc = sum[f] / samples;
                double q = d.expect([&](double h) { return funcs(f, h); });
                worst = std::max(worst, std::abs(q - mc) / std::max(std::abs(mc), 1e-9));
            }
        }
    }
    CheckResult out;
    out.name = "belief expectations vs Monte Carlo";
    out.pass = worst <= tol;
    std::ostringstream d;
    d << "max relative gap " << worst << " (tol " << tol << ", " << samples
      << " samples)";
    out.detail = d.str();
    return out;
}

// Analytic rate/indicator derivatives vs central differences.
inline CheckResult check_derivatives_vs_fd(std::uint64_t seed, double tol = 1e-6) {
    Rng rng(seed);
    double worst = 0.0;
    auto rel = [&](double got, double want) {
        return std::abs(got - want) / std::max(std::abs(want), 1e-6);
    };
    for (int i = 0; i < 200; ++i) {
        double h = 0.05 + 5.0 * rng.uniform();
        double p = 0.01 + 3.0 * rng.uniform();
        double g = 1.0 + 30.0 * rng.uniform();
        double e = 1e-6 * std::max(1.0, p);
        worst = std::max(worst, rel(su_rate_dp(h, p),
                                    (su_rate(h, p + e) - su_rate(h, p - e)) / (2 * e)));
        double x = h * p;
        double ex = 1e-6 * std::max(1.0, x);
        worst = std::max(worst, rel(pu_rate_dx(g, x),
                                    (pu_rate(g, x + ex) - pu_rate(g, x - ex)) / (2 * ex)));
    }
    // indicator derivative, both point and belief paths
    GainDist su_d = trunc_exp_dist(0.3, 1.7, 1.0, 64);
    GainDist sp_d = gaussian_gain_dist(0.6, 0.8, 0.2, 64);
    GainDist su_p = point_dist(2.0), sp_p = point_dist(0.7);
    for (int pt = 0; pt < 2; ++pt) {
        ChannelCtx c;
        c.gamma = 10.0;
        c.q = 0.8;
        LinkCtx l;
        l.beta = 1.3;
        l.su = pt ? &su_p : &su_d;
        l.sp = pt ? &sp_p : &sp_d;
        for (int i = 0; i < 50; ++i) {
            double p = 0.02 + 2.0 * rng.uniform();
            double e = 1e-6;
            double fd = (lqi(l, c, 0.4, 0.3, 0.9, p + e) - lqi(l, c, 0.4, 0.3, 0.9, p - e)) /
                        (2 * e);
            worst = std::max(worst, rel(lqi_dp(l, c, 0.4, 0.3, 0.9, p), fd));
        }
    }
    CheckResult out;
    out.name = "derivatives vs finite differences";
    out.pass = worst <= tol;
    std::ostringstream d;
    d << "max relative gap " << worst << " (tol " << tol << ")";
    out.detail = d.str();
    return out;
}

inline std::vector<CheckResult> run_selftests(bool quick) {
    std::vector<CheckResult> out;
    out.push_back(check_power_vs_grid(quick ? 120 : 1000, quick ? 20000 : 100000, 20210901));
    out.push_back(check_schedule_vs_enumeration(quick ? 100 : 400, 20210902));
    out.push_back(check_waterfilling_closed_form(quick ? 200 : 500, 20210903));
    out.push_back(check_kalman_vs_grid(100, 20210904));
    out.push_back(check_quadrature_vs_mc(quick ? 200000 : 1000000, 20210905));
    out.push_back(check_derivatives_vs_fd(20210906));
    return out;
}

} // namespace ucra
