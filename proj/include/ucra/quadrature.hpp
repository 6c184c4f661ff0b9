#pragma once

// Fixed-order Gaussian quadrature rules plus the scaled Bessel function
// needed when integrating against the noncentral chi-square gain density.
// Nodes are computed once per order by Newton iteration on the orthogonal
// polynomial recurrences and cached.

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace ucra {

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

inline QuadRule compute_gauss_legendre(int n) {
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    const double pi = 3.14159265358979323846;
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

inline QuadRule compute_gauss_laguerre(int n) {
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            z = 3.0 / (1.0 + 2.4 * n);
        } else if (i == 1) {
            z += 15.0 / (1.0 + 2.5 * n);
        } else {
            double ai = i - 1;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - r.x[i - 2]);
        }
        double pp = 0.0, p2 = 0.0;
        for (int it = 0; it < 200; ++it) {
            double p1 = 1.0;
            p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (p1 - p2) / z;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-14 * std::max(1.0, z)) break;
        }
        r.x[i] = z;
        r.w[i] = -1.0 / (pp * n * p2);
    }
    return r;
}

} // namespace detail

// Nodes/weights for \int_{-1}^{1} f(x) dx.
inline const QuadRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

// Nodes/weights for \int_0^\infty f(x) e^{-x} dx.
inline const QuadRule& gauss_laguerre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, detail::compute_gauss_laguerre(n)).first;
    return it->second;
}

// exp(-x) * I0(x) for x >= 0.  Rational fits good to ~2e-7 relative error,
// which sits far below the quadrature tolerances used on top of it; the
// scaled form avoids the overflow of I0 itself for large arguments.
inline double bessel_i0e(double x) {
    if (x < 0.0) x = -x;
    if (x <= 3.75) {
        double t = x / 3.75;
        double t2 = t * t;
        double i0 = 1.0 + t2 * (3.5156229 + t2 * (3.0899424 + t2 * (1.2067492 +
                    t2 * (0.2659732 + t2 * (0.0360768 + t2 * 0.0045813)))));
        return i0 * std::exp(-x);
    }
    double t = 3.75 / x;
    double p = 0.39894228 + t * (0.01328592 + t * (0.00225319 + t * (-0.00157565 +
               t * (0.00916281 + t * (-0.02057706 + t * (0.02635537 +
               t * (-0.01647633 + t * 0.00392377)))))));
    return p / std::sqrt(x);
}

} // namespace ucra
