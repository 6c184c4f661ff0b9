#pragma once

// Instantaneous rate expressions shared by the allocator, the dual updates
// and the metrics.  Gains and powers are noise-normalized, rates in bit/s/Hz.

#include <cmath>

namespace ucra {

inline constexpr double kLog2E = 1.4426950408889634074; // log2(e)

// Secondary link rate at channel gain h and transmit power p.
inline double su_rate(double h, double p) {
    return std::log2(1.0 + h * p);
}

// d/dp su_rate(h, p)
inline double su_rate_dp(double h, double p) {
    return kLog2E * h / (1.0 + h * p);
}

// Primary link rate at receive SNR gamma when hit by interference power x.
inline double pu_rate(double gamma, double x) {
    return std::log2(1.0 + gamma / (1.0 + x));
}

// d/dx pu_rate(gamma, x)
inline double pu_rate_dx(double gamma, double x) {
    return -kLog2E * gamma / ((1.0 + x + gamma) * (1.0 + x));
}

} // namespace ucra
