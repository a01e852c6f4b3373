#pragma once

// Minimal iterative radix-2 FFT plus the zero-extended cross-correlation
// built on it. Hand-rolled rather than linked: the transform stays
// bit-reproducible across platforms and thread counts, and the sizes here
// (a few thousand samples) never justify a tuned library.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"

namespace tdlsm {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline void fft_inplace(std::vector<cplx>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_inplace: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const cplx step(std::cos(ang), std::sin(ang));
        for (std::size_t base = 0; base < n; base += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[base + j];
                const cplx v = a[base + j + len / 2] * w;
                a[base + j] = u + v;
                a[base + j + len / 2] = u - v;
                w *= step;
            }
        }
    }
    if (inverse)
        for (cplx& z : a) z /= static_cast<double>(n);
}

// Full cross-correlation with zero extension:
//   out[i] = sum_n b(n) a(n + s),  s = i - (len(b) - 1),
// so out has length len(a) + len(b) - 1 and lag 0 sits at index len(b) - 1.
inline std::vector<double> correlate_full(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("correlate_full: empty input");
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t P = next_pow2(out_len);
    std::vector<cplx> fa(P, cplx(0.0, 0.0)), fb(P, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fft_inplace(fa);
    fft_inplace(fb);
    for (std::size_t i = 0; i < P; ++i) fa[i] *= std::conj(fb[i]);
    fft_inplace(fa, true);
    std::vector<double> out(out_len);
    const std::ptrdiff_t lb = static_cast<std::ptrdiff_t>(b.size());
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i) - (lb - 1);
        const std::size_t idx = static_cast<std::size_t>((s + static_cast<std::ptrdiff_t>(P)) % static_cast<std::ptrdiff_t>(P));
        out[i] = fa[idx].real();
    }
    return out;
}

} // namespace tdlsm
