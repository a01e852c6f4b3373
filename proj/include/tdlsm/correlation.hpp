#pragma once

// Passive imaging kernel: cross-correlate total-field records over the
// source ring, difference neighbouring lags, average over sources, and
// subtract the incident correlation term. What remains approximates the
// antisymmetrized scattered field between the two receiver sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"
#include "tdlsm/fft.hpp"
#include "tdlsm/parallel.hpp"
#include "tdlsm/synthesis.hpp"

namespace tdlsm {

enum class CorrelationPath { Direct, Fft };

// phi(2 n' dt, x_j, y_m; z_l) on lags n' = -(N+1)..(N+1). The padding lags
// +-(N+1) are pinned to zero so the lag difference below stays in range at
// the window ends.
struct CrossCorrelation {
    double dt = 0.0;
    int N = 0;
    std::size_t nx = 0, ny = 0, nsrc = 0;
    std::vector<double> v; // (lag, j, m, l) row-major, lag index n' + N + 1

    std::size_t lag_count() const { return 2 * static_cast<std::size_t>(N) + 3; }
    std::size_t size() const { return lag_count() * nx * ny * nsrc; }
    std::size_t idx(std::size_t li, std::size_t j, std::size_t m, std::size_t l) const {
        return ((li * nx + j) * ny + m) * nsrc + l;
    }
    double lag(int np, std::size_t j, std::size_t m, std::size_t l) const {
        return v[idx(static_cast<std::size_t>(np + N + 1), j, m, l)];
    }
};

// phi(2n' dt) = sum_n u_y(n dt) u_x((2n' + n) dt) dt over the overlap of the
// two records; both paths evaluate exactly this sum.
inline CrossCorrelation cross_correlate(const PulsedFieldSet& at_x, const PulsedFieldSet& at_y, const TimeGrid& grid,
                                        CorrelationPath path = CorrelationPath::Fft, int threads = 1) {
    const std::size_t nt = static_cast<std::size_t>(grid.samples());
    if (at_x.times.size() != nt || at_y.times.size() != nt || at_x.data.nt != nt || at_y.data.nt != nt)
        throw std::invalid_argument("cross_correlate: records do not share the time grid");
    const std::vector<double> ref = grid.record_times();
    for (std::size_t n = 0; n < nt; ++n)
        if (std::abs(at_x.times[n] - ref[n]) > 1e-12 || std::abs(at_y.times[n] - ref[n]) > 1e-12)
            throw std::invalid_argument("cross_correlate: records do not share the time grid");
    if (at_x.data.ns != at_y.data.ns || at_x.data.ns == 0)
        throw std::invalid_argument("cross_correlate: source ensembles differ");

    CrossCorrelation out;
    out.dt = grid.dt;
    out.N = grid.N;
    out.nx = at_x.data.nr;
    out.ny = at_y.data.nr;
    out.nsrc = at_x.data.ns;
    out.v.assign(out.size(), 0.0);

    const int N = grid.N;
    if (path == CorrelationPath::Direct) {
        parallel_for(out.nsrc, threads, [&](std::size_t l) {
            for (int np = -N; np <= N; ++np) {
                const int n1 = std::max(0, -2 * np);
                const int n2 = std::min(2 * N, 2 * (N - np));
                for (std::size_t j = 0; j < out.nx; ++j)
                    for (std::size_t m = 0; m < out.ny; ++m) {
                        double acc = 0.0;
                        for (int n = n1; n <= n2; ++n)
                            acc += at_y.data.at(static_cast<std::size_t>(n), m, l) *
                                   at_x.data.at(static_cast<std::size_t>(2 * np + n), j, l);
                        out.v[out.idx(static_cast<std::size_t>(np + N + 1), j, m, l)] = acc * grid.dt;
                    }
            }
        });
        return out;
    }

    // FFT path: one forward transform per record, then a pointwise product
    // and inverse transform per receiver pair. Padding to P >= 4N + 1 keeps
    // the circular shifts out of the used lag range.
    const std::size_t P = next_pow2(4 * static_cast<std::size_t>(N) + 1);
    parallel_for(out.nsrc, threads, [&](std::size_t l) {
        std::vector<std::vector<cplx>> xh(out.nx, std::vector<cplx>(P, 0.0));
        std::vector<std::vector<cplx>> yh(out.ny, std::vector<cplx>(P, 0.0));
        for (std::size_t j = 0; j < out.nx; ++j) {
            for (std::size_t n = 0; n < nt; ++n) xh[j][n] = at_x.data.at(n, j, l);
            fft_inplace(xh[j]);
        }
        for (std::size_t m = 0; m < out.ny; ++m) {
            for (std::size_t n = 0; n < nt; ++n) yh[m][n] = at_y.data.at(n, m, l);
            fft_inplace(yh[m]);
        }
        std::vector<cplx> prod(P);
        for (std::size_t j = 0; j < out.nx; ++j)
            for (std::size_t m = 0; m < out.ny; ++m) {
                for (std::size_t i = 0; i < P; ++i) prod[i] = xh[j][i] * std::conj(yh[m][i]);
                fft_inplace(prod, true);
                for (int np = -N; np <= N; ++np) {
                    const std::size_t wrapped = static_cast<std::size_t>(2 * np + static_cast<int>(P)) % P;
                    out.v[out.idx(static_cast<std::size_t>(np + N + 1), j, m, l)] = prod[wrapped].real() * grid.dt;
                }
            }
    });
    return out;
}

// Scaling applied to the source-averaged lag difference. Unnormalized keeps
// the plain difference as summed; PerLagStep divides it by the 2 dt lag
// spacing; Matched doubles that again, which is the normalization that makes
// the correlation part cancel the incident term in free space and line up
// with the antisymmetrized scattered field otherwise.
enum class KernelScaling { Unnormalized, PerLagStep, Matched };

inline double kernel_scale_factor(KernelScaling scaling, double dt) {
    switch (scaling) {
        case KernelScaling::Unnormalized: return 1.0;
        case KernelScaling::PerLagStep: return 1.0 / (2.0 * dt);
        default: return 1.0 / dt;
    }
}

struct CorrelationKernel {
    double dt = 0.0;
    int N = 0;
    std::size_t nx = 0, ny = 0;
    KernelScaling scaling = KernelScaling::Unnormalized;
    Tensor3 c; // (lag index n' + N, j, m), lags 2 n' dt for n' = -N..N

    // Zero beyond the recorded lag range, where no data constrains it.
    double lag(int np, std::size_t j, std::size_t m) const {
        if (np < -N || np > N) return 0.0;
        return c.at(static_cast<std::size_t>(np + N), j, m);
    }
};

inline CorrelationKernel assemble_kernel(const CrossCorrelation& correlations,
                                         const IncidentCorrelationTerm& incident, double source_radius,
                                         KernelScaling scaling = KernelScaling::Unnormalized) {
    if (correlations.nsrc == 0) throw std::invalid_argument("assemble_kernel: correlation set has no sources");
    if (!(source_radius > 0.0)) throw std::invalid_argument("assemble_kernel: source radius must be positive");
    const int N = correlations.N;
    const std::size_t nlag = 2 * static_cast<std::size_t>(N) + 1;
    if (incident.lags.size() != nlag || incident.phi.nr != correlations.nx || incident.phi.ns != correlations.ny)
        throw std::invalid_argument("assemble_kernel: incident term shape mismatch");
    for (std::size_t i = 0; i < nlag; ++i)
        if (std::abs(incident.lags[i] - 2.0 * (static_cast<double>(i) - N) * correlations.dt) > 1e-12)
            throw std::invalid_argument("assemble_kernel: incident term lag grid mismatch");

    const double front =
        -pi * source_radius / static_cast<double>(correlations.nsrc) * kernel_scale_factor(scaling, correlations.dt);

    CorrelationKernel out;
    out.dt = correlations.dt;
    out.N = N;
    out.nx = correlations.nx;
    out.ny = correlations.ny;
    out.scaling = scaling;
    out.c = Tensor3(nlag, correlations.nx, correlations.ny);
    for (int np = -N; np <= N; ++np)
        for (std::size_t j = 0; j < correlations.nx; ++j)
            for (std::size_t m = 0; m < correlations.ny; ++m) {
                double acc = 0.0;
                for (std::size_t l = 0; l < correlations.nsrc; ++l)
                    acc += correlations.lag(np + 1, j, m, l) - correlations.lag(np - 1, j, m, l);
                out.c.at(static_cast<std::size_t>(np + N), j, m) = front * acc -
                                                                   incident.phi.at(static_cast<std::size_t>(np + N), j, m) +
                                                                   incident.phi.at(static_cast<std::size_t>(N - np), j, m);
            }
    return out;
}

} // namespace tdlsm
