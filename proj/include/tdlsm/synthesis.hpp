#pragma once

// Time-domain datasets out of fixed-frequency solves. A pulsed field is the
// inverse transform of chi_hat(k) u_hat(k, x; y) over the retained band,
//   u(t) = (1/pi) Re sum_j w_j e^{-i k_j t} a(k_j) u_hat(k_j) dk,
// with a = chi_hat for chi-pulsed kinds and |chi_hat|^2 for the
// autocorrelation pulse. Sampling the spectrum at spacing dk = 2 pi / T_pad
// periodizes the true field with period T_pad; the slow cylindrical wake
// therefore leaks a small wrap-around ripple that shrinks like 1/T_pad
// (measured in the tests, controlled by the pad factor).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdlsm/common.hpp"
#include "tdlsm/geometry.hpp"
#include "tdlsm/helmholtz.hpp"
#include "tdlsm/parallel.hpp"
#include "tdlsm/pulse.hpp"
#include "tdlsm/rng.hpp"

namespace tdlsm {

// Recording window [0, T] with T = 2 N dt; operator lags live on the even
// multiples 2 n' dt, n' = -N..N.
struct TimeGrid {
    double dt = 0.1;
    int N = 200;

    double T() const { return 2.0 * N * dt; }
    int samples() const { return 2 * N + 1; }

    std::vector<double> record_times() const {
        std::vector<double> t(samples());
        for (int n = 0; n < samples(); ++n) t[n] = n * dt;
        return t;
    }
    std::vector<double> lag_times() const {
        std::vector<double> t(samples());
        for (int np = -N; np <= N; ++np) t[np + N] = 2.0 * np * dt;
        return t;
    }
};

inline TimeGrid make_time_grid(double dt, int N) {
    if (!(dt > 0.0) || N < 1) throw std::invalid_argument("make_time_grid: need dt > 0 and N >= 1");
    return TimeGrid{dt, N};
}

// Uniform frequency lattice k_j = j dk, dk = 2 pi / T_pad, restricted to the
// band where the pulse has spectral content. k = 0 is always dropped (the
// cylindrical fundamental solution is singular there).
struct FrequencyPlan {
    double dk = 0.0;
    double t_pad = 0.0;
    double spectrum_peak = 0.0;
    std::vector<double> k;
    std::vector<double> w; // trapezoid weights
    std::vector<cplx> chi_hat;
};

inline FrequencyPlan plan_frequencies(const Spectrum& sp, const TimeGrid& grid, double pad_factor = 2.0) {
    if (!(pad_factor >= 2.0)) throw std::invalid_argument("plan_frequencies: pad factor must be >= 2");
    FrequencyPlan plan;
    plan.t_pad = pad_factor * grid.T();
    plan.dk = 2.0 * pi / plan.t_pad;
    plan.spectrum_peak = sp.peak;
    const double thresh = sp.eps_band * sp.peak;
    const int jmax = static_cast<int>(std::ceil(sp.band_hi / plan.dk)) + 1;
    for (int j = 1; j <= jmax; ++j) {
        const double k = j * plan.dk;
        const cplx a = sp(k);
        if (std::abs(a) < thresh) continue;
        plan.k.push_back(k);
        plan.chi_hat.push_back(a);
    }
    if (plan.k.empty()) throw std::invalid_argument("plan_frequencies: no frequencies in band");
    plan.w.assign(plan.k.size(), 1.0);
    plan.w.back() = 0.5;
    return plan;
}

enum class FieldKind { TotalChi, ScatteredChi, TotalChiTilde, ScatteredChiTilde };

inline bool is_total(FieldKind k) { return k == FieldKind::TotalChi || k == FieldKind::TotalChiTilde; }
inline bool uses_autocorrelation(FieldKind k) {
    return k == FieldKind::TotalChiTilde || k == FieldKind::ScatteredChiTilde;
}
inline const char* field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::TotalChi: return "total_chi";
        case FieldKind::ScatteredChi: return "scattered_chi";
        case FieldKind::TotalChiTilde: return "total_chi_tilde";
        default: return "scattered_chi_tilde";
    }
}

struct PulsedFieldSet {
    FieldKind kind = FieldKind::TotalChi;
    std::vector<double> times;
    Tensor3 data; // (time, receiver, source)
    double noise_level = 0.0;
    std::uint64_t noise_seed = 0;
};

namespace synth_detail {

// out(t, r, s) = (1/pi) Re sum_j E(t, j) F(j, r*ns + s); columns are
// independent, so the parallel split cannot change any result.
inline Tensor3 inverse_transform(const Eigen::MatrixXcd& E, const Eigen::MatrixXcd& F, std::size_t nr,
                                 std::size_t ns, int threads) {
    Tensor3 out(static_cast<std::size_t>(E.rows()), nr, ns);
    parallel_for(nr * ns, threads, [&](std::size_t col) {
        const Eigen::VectorXcd prod = E * F.col(static_cast<Eigen::Index>(col));
        for (Eigen::Index n = 0; n < prod.size(); ++n)
            out.at(static_cast<std::size_t>(n), col / ns, col % ns) = prod(n).real();
    });
    return out;
}

inline Eigen::MatrixXcd synthesis_weights(const FrequencyPlan& plan, const std::vector<double>& times,
                                          bool autocorr_pulse) {
    Eigen::MatrixXcd E(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(plan.k.size()));
    for (std::size_t j = 0; j < plan.k.size(); ++j) {
        const cplx amp = autocorr_pulse ? cplx(std::norm(plan.chi_hat[j]), 0.0) : plan.chi_hat[j];
        const cplx scale = amp * (plan.w[j] * plan.dk / pi);
        for (std::size_t n = 0; n < times.size(); ++n)
            E(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
                scale * std::exp(cplx(0.0, -plan.k[j] * times[n]));
    }
    return E;
}

} // namespace synth_detail

// Solves the scene at every retained frequency (one factorization per k_j,
// all sources sharing it) and synthesizes the requested field kind on the
// given sample times.
inline PulsedFieldSet synthesize_dataset(const Scene& scene, const FrequencyPlan& plan,
                                         const std::vector<Vec2>& receivers, const std::vector<Vec2>& sources,
                                         const std::vector<double>& times, FieldKind kind, int bie_nodes = 128,
                                         int threads = 1) {
    if (receivers.empty() || sources.empty() || times.empty())
        throw std::invalid_argument("synthesize_dataset: empty receivers, sources, or times");
    const std::size_t nf = plan.k.size(), nr = receivers.size(), ns = sources.size();

    Eigen::MatrixXcd F(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nr * ns));
    parallel_for(nf, threads, [&](std::size_t j) {
        const BiePanelization pan = assemble_bie(scene, plan.k[j], bie_nodes);
        const auto solves = solve_point_sources(pan, sources);
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t r = 0; r < nr; ++r)
                F(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r * ns + s)) =
                    is_total(kind) ? solves[s].total(receivers[r]) : solves[s].scattered(receivers[r]);
    });

    PulsedFieldSet out;
    out.kind = kind;
    out.times = times;
    out.data = synth_detail::inverse_transform(synth_detail::synthesis_weights(plan, times, uses_autocorrelation(kind)),
                                               F, nr, ns, threads);
    return out;
}

// Incident-field correlation term Phi(t, p; q): the autocorrelation pulse
// radiated between measurement points through free space.
struct IncidentCorrelationTerm {
    std::vector<double> lags;
    Tensor3 phi; // (lag, p, q)
};

inline IncidentCorrelationTerm incident_correlation(const FrequencyPlan& plan, const std::vector<Vec2>& ps,
                                                    const std::vector<Vec2>& qs, const std::vector<double>& lags,
                                                    int threads = 1) {
    if (ps.empty() || qs.empty() || lags.empty())
        throw std::invalid_argument("incident_correlation: empty points or lags");
    for (const Vec2& p : ps)
        for (const Vec2& q : qs)
            if (!(dist(p, q) > 0.0)) throw std::invalid_argument("incident_correlation: coincident pair");

    const std::size_t nf = plan.k.size(), np = ps.size(), nq = qs.size();
    Eigen::MatrixXcd F(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(np * nq));
    parallel_for(nf, threads, [&](std::size_t j) {
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = 0; q < nq; ++q)
                F(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p * nq + q)) =
                    green(plan.k[j], ps[p], qs[q]);
    });

    IncidentCorrelationTerm out;
    out.lags = lags;
    out.phi = synth_detail::inverse_transform(synth_detail::synthesis_weights(plan, lags, true), F, np, nq, threads);
    return out;
}

// Multiplicative uniform noise u -> u + delta (2 mu - 1) |u|, mu ~ U[0,1]
// drawn per sample in storage order from a stream derived from (seed, tag).
inline PulsedFieldSet add_noise(const PulsedFieldSet& in, double delta, std::uint64_t seed,
                                const std::string& tag = "noise") {
    if (!(delta >= 0.0)) throw std::invalid_argument("add_noise: negative noise level");
    PulsedFieldSet out = in;
    if (delta == 0.0) return out;
    out.noise_level = delta;
    out.noise_seed = seed;
    Rng rng(derive_seed(seed, tag));
    for (double& u : out.data.v) u += delta * (2.0 * rng.uniform01() - 1.0) * std::abs(u);
    return out;
}

} // namespace tdlsm
