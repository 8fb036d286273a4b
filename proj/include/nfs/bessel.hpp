// bessel.hpp - Bessel function of the first kind, order one
#pragma once

#include <cmath>
#include <numbers>

namespace nfs {

namespace detail {

// Ascending series sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!).
// At x = 12 the largest term is ~4e3, so cancellation costs ~1e-12 absolute.
inline double bessel_j1_series(double x) {
    const double h = 0.5 * x;
    const double h2 = h * h;
    double term = h;
    double sum = h;
    for (int k = 0; k < 200; ++k) {
        term *= -h2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && k > 2) break;
    }
    return sum;
}

// Hankel asymptotic expansion J1(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi),
// chi = x - 3 pi / 4, truncated at the smallest term.
inline double bessel_j1_asymptotic(double x) {
    constexpr double mu = 4.0;  // 4 nu^2
    double p = 1.0, q = 0.0;
    double a = 1.0;             // a_k / x^k
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) / (8.0 * k * x);
        const double mag = std::abs(a);
        if (mag > last) break;
        last = mag;
        const int r = k % 4;  // sign pattern: +Q, -P, -Q, +P
        if (r == 1) q += a;
        else if (r == 2) p -= a;
        else if (r == 3) q -= a;
        else p += a;
        if (mag < 1e-17) break;
    }
    const double chi = x - 0.75 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// J1(x); absolute error below 1e-10 on [0, 1e3]. Odd in x.
inline double bessel_j1(double x) {
    if (x < 0.0) return -bessel_j1(-x);
    if (x < 12.0) return detail::bessel_j1_series(x);
    return detail::bessel_j1_asymptotic(x);
}

}  // namespace nfs
