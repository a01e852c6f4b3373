#pragma once

// Cylinder functions J0, J1, Y0, Y1 for real positive arguments, integer-order
// families, and first-kind Hankel functions built from them. Power series in
// long double below the crossover, Hankel's asymptotic modulus/phase expansion
// above it; J_n families use Miller's normalized downward recurrence, Y_n the
// (stable) upward recurrence.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"

namespace tdlsm {

namespace bessel_detail {

inline constexpr double series_cut = 14.0;

struct PQ {
    double p, q;
};

// Asymptotic auxiliary sums: P collects even-index coefficients, Q odd-index,
// with a_{k+1} = a_k (4nu^2 - (2k+1)^2) / (8(k+1)).
inline PQ hankel_pq(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    long double ak_over_xk = 1.0L;
    long double p = 0.0L, q = 0.0L;
    long double prev = 1e30L;
    for (int k = 0; k <= 40; ++k) {
        const long double c = ak_over_xk;
        if (std::abs((double)c) > std::abs((double)prev)) break; // divergence onset
        switch (k % 4) {
            case 0: p += c; break;
            case 1: q += c; break;
            case 2: p -= c; break;
            default: q -= c; break;
        }
        if (std::abs((double)c) < 1e-18) break;
        prev = c;
        const double odd = 2.0 * k + 1.0;
        ak_over_xk *= (mu - odd * odd) / (8.0 * (k + 1)) / x;
    }
    return {(double)p, (double)q};
}

inline double j0_series(double x) {
    const long double q = (long double)x * x / 4.0L;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m <= 80; ++m) {
        term *= -q / ((long double)m * m);
        sum += term;
        if (std::abs((double)term) < 1e-20 * std::abs((double)sum) && m > 4) break;
    }
    return (double)sum;
}

inline double j1_series(double x) {
    const long double q = (long double)x * x / 4.0L;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m <= 80; ++m) {
        term *= -q / ((long double)m * (m + 1));
        sum += term;
        if (std::abs((double)term) < 1e-20 * std::abs((double)sum) && m > 4) break;
    }
    return (double)(sum * x / 2.0L);
}

inline double y0_series(double x) {
    const long double q = (long double)x * x / 4.0L;
    long double term = 1.0L, sum = 0.0L, harmonic = 0.0L;
    for (int m = 1; m <= 80; ++m) {
        term *= -q / ((long double)m * m);
        harmonic += 1.0L / m;
        sum -= term * harmonic; // (-1)^{m+1} H_m q^m/(m!)^2
        if (std::abs((double)term) < 1e-20 && m > 4) break;
    }
    const long double lead = (std::log((long double)x / 2.0L) + (long double)euler_gamma) * j0_series(x);
    return (double)((2.0L / pi) * (lead + sum));
}

inline double y1_series(double x) {
    const long double q = (long double)x * x / 4.0L;
    // sum_k (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1} / (k! (k+1)!)
    long double base = (long double)x / 2.0L, hk = 0.0L, hk1 = 1.0L;
    long double sum = base * (hk + hk1);
    for (int k = 1; k <= 80; ++k) {
        base *= -q / ((long double)k * (k + 1));
        hk += 1.0L / k;
        hk1 += 1.0L / (k + 1);
        sum += base * (hk + hk1);
        if (std::abs((double)base) < 1e-20 && k > 4) break;
    }
    const long double lead = (std::log((long double)x / 2.0L) + (long double)euler_gamma) * j1_series(x);
    return (double)((2.0L / pi) * lead - 2.0L / (pi * (long double)x) - sum / pi);
}

} // namespace bessel_detail

inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x < bessel_detail::series_cut) return bessel_detail::j0_series(x);
    const auto [p, q] = bessel_detail::hankel_pq(0, x);
    const double w = x - 0.25 * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::cos(w) - q * std::sin(w));
}

inline double bessel_y0(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_y0: argument must be positive");
    if (x < bessel_detail::series_cut) return bessel_detail::y0_series(x);
    const auto [p, q] = bessel_detail::hankel_pq(0, x);
    const double w = x - 0.25 * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::sin(w) + q * std::cos(w));
}

inline double bessel_j1(double x) {
    const double ax = std::abs(x);
    double r;
    if (ax < bessel_detail::series_cut) {
        r = bessel_detail::j1_series(ax);
    } else {
        const auto [p, q] = bessel_detail::hankel_pq(1, ax);
        const double w = ax - 0.75 * pi;
        r = std::sqrt(2.0 / (pi * ax)) * (p * std::cos(w) - q * std::sin(w));
    }
    return x < 0.0 ? -r : r;
}

inline double bessel_y1(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_y1: argument must be positive");
    if (x < bessel_detail::series_cut) return bessel_detail::y1_series(x);
    const auto [p, q] = bessel_detail::hankel_pq(1, x);
    const double w = x - 0.75 * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::sin(w) + q * std::cos(w));
}

inline cplx hankel1_0(double x) { return {bessel_j0(x), bessel_y0(x)}; }
inline cplx hankel1_1(double x) { return {bessel_j1(x), bessel_y1(x)}; }

// J_0..J_nmax by Miller's algorithm: downward recurrence from a start order
// above both nmax and x, normalized with J_0 + 2 sum_k J_{2k} = 1. Rescales
// on the way down so intermediate values never overflow.
inline std::vector<double> bessel_jn_all(int nmax, double x) {
    if (nmax < 0) throw std::invalid_argument("bessel_jn_all: negative order");
    std::vector<double> out(nmax + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double ax = std::abs(x);
    // The downward seed contaminates order n by roughly (J_s Y_n)/(Y_s J_n)
    // for start order s. Two regimes: relative accuracy at orders near nmax
    // needs s well above nmax (the sqrt(40 n) margin), and for s near the
    // turning point the decay factor (e x / 2s)^{2s} must reach the double
    // roundoff floor.
    int start = std::max(nmax + 1 + (int)std::sqrt(40.0 * (nmax + 1)), (int)ax + 2);
    while (2.0 * start * std::log(2.0 * start / (2.718281828459045 * ax)) < 42.0) start += 2;
    if (start % 2) ++start;
    double jp = 0.0, jc = 1e-30, norm = 0.0;
    for (int k = start; k >= 1; --k) {
        double jm = (2.0 * k / ax) * jc - jp;
        jp = jc;
        jc = jm;
        if (k - 1 <= nmax) out[k - 1] = jc;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jc;
        if (std::abs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for (double& o : out) o *= 1e-250;
        }
    }
    norm += jc; // adds J_0 contribution
    for (double& o : out) o /= norm;
    if (x < 0.0)
        for (int k = 1; k <= nmax; k += 2) out[k] = -out[k];
    return out;
}

// Y_0..Y_nmax by upward recurrence (dominant solution, stable). Throws if an
// order overflows before nmax is reached.
inline std::vector<double> bessel_yn_all(int nmax, double x) {
    if (nmax < 0) throw std::invalid_argument("bessel_yn_all: negative order");
    if (!(x > 0.0)) throw std::domain_error("bessel_yn_all: argument must be positive");
    std::vector<double> out(nmax + 1);
    out[0] = bessel_y0(x);
    if (nmax >= 1) out[1] = bessel_y1(x);
    for (int k = 1; k < nmax; ++k) {
        out[k + 1] = (2.0 * k / x) * out[k] - out[k - 1];
        if (!std::isfinite(out[k + 1])) throw std::overflow_error("bessel_yn_all: order too high for argument");
    }
    return out;
}

inline std::vector<cplx> hankel1_all(int nmax, double x) {
    const auto j = bessel_jn_all(nmax, x);
    const auto y = bessel_yn_all(nmax, x);
    std::vector<cplx> h(nmax + 1);
    for (int k = 0; k <= nmax; ++k) h[k] = {j[k], y[k]};
    return h;
}

} // namespace tdlsm
