#pragma once

// Band-pass excitation pulse, its Fourier spectrum, and its autocorrelation.
// The transform convention throughout the toolkit is
//     f_hat(k) = integral e^{ikt} f(t) dt,
// so spectra of real signals are Hermitian: f_hat(-k) = conj(f_hat(k)).
// Spectrum and autocorrelation are computed by panel quadrature (not FFT)
// because downstream frequency plans need values at arbitrary off-lattice k.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "tdlsm/common.hpp"
#include "tdlsm/quadrature.hpp"

namespace tdlsm {

// chi(t) = sin(omega t) exp(-alpha (t - t0)^2). Defaults reproduce the
// toolkit's reference experiments: center frequency 4, width 1.6, delay 3.
struct Pulse {
    double omega = 4.0;
    double alpha = 1.6;
    double t0 = 3.0;

    friend bool operator==(const Pulse&, const Pulse&) = default;

    double operator()(double t) const {
        const double d = t - t0;
        return std::sin(omega * t) * std::exp(-alpha * d * d);
    }

    double derivative(double t) const {
        const double d = t - t0;
        const double env = std::exp(-alpha * d * d);
        return (omega * std::cos(omega * t) - 2.0 * alpha * d * std::sin(omega * t)) * env;
    }

    // Envelope drops below 1e-18 of its peak outside [lo, hi]; quadratures
    // over the pulse restrict to this interval.
    double support_halfwidth() const { return std::sqrt(41.45 / alpha); }
    double support_lo() const { return t0 - support_halfwidth(); }
    double support_hi() const { return t0 + support_halfwidth(); }
};

// One-off spectrum evaluation at arbitrary k.
inline cplx pulse_spectrum_at(const Pulse& chi, double k) {
    return integrate_adaptive<cplx>(
        [&](double t) { return std::exp(cplx(0.0, k * t)) * chi(t); }, chi.support_lo(), chi.support_hi(), 1e-12,
        1e-14);
}

// Frequency-domain description of the pulse: peak magnitude/location and the
// band where |chi_hat| stays above eps_band * peak.
struct Spectrum {
    Pulse chi;
    double eps_band = 1e-6;
    double peak = 0.0;      // max_k |chi_hat(k)|, k >= 0
    double peak_k = 0.0;
    double band_lo = 0.0;   // smallest k >= 0 with |chi_hat| >= eps_band * peak
    double band_hi = 0.0;   // largest such k

    cplx operator()(double k) const { return pulse_spectrum_at(chi, k); }
};

inline Spectrum make_spectrum(const Pulse& chi, double eps_band = 1e-6) {
    if (!(eps_band > 0.0 && eps_band < 1.0)) throw std::invalid_argument("make_spectrum: eps_band out of (0,1)");
    Spectrum sp;
    sp.chi = chi;
    sp.eps_band = eps_band;

    // Coarse scan for the peak; the magnitude is smooth with a single
    // dominant lobe near the center frequency, Gaussian halfwidth sqrt(4 alpha ln(1/eps)).
    const double k_hi_scan = chi.omega + std::sqrt(4.0 * chi.alpha * 45.0);
    const double dk = 0.01;
    for (double k = 0.0; k <= k_hi_scan; k += dk) {
        const double m = std::abs(sp(k));
        if (m > sp.peak) {
            sp.peak = m;
            sp.peak_k = k;
        }
    }
    if (!(sp.peak > 0.0)) throw std::runtime_error("make_spectrum: vanishing spectrum");
    // Refine the peak by golden-section around the scan maximum.
    {
        double a = std::max(0.0, sp.peak_k - dk), b = sp.peak_k + dk;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - gr * (b - a), d = a + gr * (b - a);
        for (int it = 0; it < 80; ++it) {
            if (std::abs(sp(c)) > std::abs(sp(d))) b = d; else a = c;
            c = b - gr * (b - a);
            d = a + gr * (b - a);
        }
        sp.peak_k = 0.5 * (a + b);
        sp.peak = std::abs(sp(sp.peak_k));
    }

    const double thresh = sp.eps_band * sp.peak;
    // Band edges by scan + bisection. The magnitude can dip near k = 0; the
    // band is the outermost interval where it clears the threshold.
    double lo = 0.0;
    if (std::abs(sp(0.0)) < thresh) {
        double k = 0.0;
        while (k < sp.peak_k && std::abs(sp(k)) < thresh) k += dk;
        double a = k - dk, b = k;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (a + b);
            (std::abs(sp(mid)) < thresh ? a : b) = mid;
        }
        lo = 0.5 * (a + b);
    }
    double k = sp.peak_k;
    while (std::abs(sp(k)) >= thresh) k += dk;
    double a = k - dk, b = k;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        (std::abs(sp(mid)) >= thresh ? a : b) = mid;
    }
    sp.band_lo = lo;
    sp.band_hi = 0.5 * (a + b);
    return sp;
}

// Autocorrelation chi_tilde(t) = integral chi(tau) chi(tau - t) dtau,
// evaluated on demand by Gauss-Legendre quadrature over the overlap of the
// two supports. Even in t; clamped to zero beyond the effective lag support.
struct Autocorrelation {
    Pulse chi;
    double lag_support = 0.0; // chi_tilde below ~1e-9 of chi_tilde(0) outside [-lag_support, lag_support]
    double at_zero = 0.0;

    double operator()(double t) const {
        const double a = std::abs(t);
        if (a >= lag_support) return 0.0;
        const double lo = std::max(chi.support_lo(), chi.support_lo() + t);
        const double hi = std::min(chi.support_hi(), chi.support_hi() + t);
        if (hi <= lo) return 0.0;
        static const GaussRule rule = gauss_legendre(48);
        // Two panels resolve the oscillatory integrand (<= ~14 cycles) well
        // below 1e-12 relative; fixed panel count keeps evaluation cheap and
        // bit-deterministic for the millions of calls the imaging stage makes.
        const double mid = 0.5 * (lo + hi);
        double s = integrate_panel(rule, [&](double tau) { return chi(tau) * chi(tau - t); }, lo, mid);
        s += integrate_panel(rule, [&](double tau) { return chi(tau) * chi(tau - t); }, mid, hi);
        return s;
    }
};

inline Autocorrelation make_autocorrelation(const Pulse& chi) {
    Autocorrelation ac;
    ac.chi = chi;
    // Envelope of chi_tilde is exp(-alpha t^2 / 2) up to an O(1) bracket.
    ac.lag_support = std::sqrt(2.0 * 20.8 / chi.alpha);
    ac.at_zero = ac(0.0);
    if (!(ac.at_zero > 0.0)) throw std::runtime_error("make_autocorrelation: vanishing pulse energy");
    return ac;
}

} // namespace tdlsm
