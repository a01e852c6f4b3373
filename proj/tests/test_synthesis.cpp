#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tdlsm/quadrature.hpp"
#include "tdlsm/synthesis.hpp"

using namespace tdlsm;

namespace {

// Independent time-domain reference: convolution of a causal cylindrical
// monopole with a signal f supported on [flo, inf),
//   (f * G)(t) = (1/2pi) int_0^vmax f(t - r cosh v) dv.
template <typename F>
double causal_monopole(F&& f, double flo, double t, double r) {
    if (t - flo <= r) return 0.0;
    const double vmax = std::acosh((t - flo) / r);
    return (0.5 / pi) *
           integrate_adaptive<double>([&](double v) { return f(t - r * std::cosh(v)); }, 0.0, vmax, 1e-11, 1e-13);
}

Scene free_space() { return build_scene({}, MeasurementSpec{}); }

struct PeakInfo {
    double value = 0.0;
    double time = 0.0;
};

PeakInfo trace_peak(const PulsedFieldSet& u, std::size_t r, std::size_t s) {
    PeakInfo p;
    for (std::size_t n = 0; n < u.times.size(); ++n) {
        const double v = std::abs(u.data.at(n, r, s));
        if (v > p.value) {
            p.value = v;
            p.time = u.times[n];
        }
    }
    return p;
}

} // namespace

TEST_CASE("Time grid exposes the recording window and lag lattice") {
    const TimeGrid grid = make_time_grid(0.1, 200);
    REQUIRE(grid.T() == Catch::Approx(40.0));
    REQUIRE(grid.samples() == 401);

    const auto rec = grid.record_times();
    REQUIRE(rec.size() == 401);
    REQUIRE(rec.front() == 0.0);
    REQUIRE(rec.back() == Catch::Approx(40.0));
    REQUIRE(rec[1] == Catch::Approx(0.1));

    const auto lags = grid.lag_times();
    REQUIRE(lags.size() == 401);
    REQUIRE(lags.front() == Catch::Approx(-40.0));
    REQUIRE(lags[200] == 0.0);
    REQUIRE(lags.back() == Catch::Approx(40.0));
    REQUIRE(lags[201] - lags[200] == Catch::Approx(0.2));

    REQUIRE_THROWS_AS(make_time_grid(0.0, 200), std::invalid_argument);
    REQUIRE_THROWS_AS(make_time_grid(0.1, 0), std::invalid_argument);
}

TEST_CASE("Frequency planning samples the pulse band on the padded lattice") {
    const Spectrum sp = make_spectrum(Pulse{});
    const TimeGrid grid{0.1, 200};
    const FrequencyPlan plan = plan_frequencies(sp, grid, 2.0);

    REQUIRE(plan.t_pad == Catch::Approx(80.0));
    REQUIRE(plan.dk == Catch::Approx(2.0 * pi / 80.0).epsilon(1e-15));
    REQUIRE(plan.k.size() == 170); // with the default pulse and window

    // k = 0 is never retained and the lattice is k_j = j dk.
    REQUIRE(plan.k.front() >= plan.dk - 1e-15);
    const double thresh = sp.eps_band * sp.peak;
    for (std::size_t j = 0; j < plan.k.size(); ++j) {
        const double ratio = plan.k[j] / plan.dk;
        REQUIRE(std::abs(ratio - std::round(ratio)) < 1e-9);
        REQUIRE(std::abs(plan.chi_hat[j]) >= thresh);
        REQUIRE(std::abs(plan.chi_hat[j] - sp(plan.k[j])) < 1e-14);
    }

    // Trapezoid closure: unit weights except the half weight at the band end.
    for (std::size_t j = 0; j + 1 < plan.w.size(); ++j) REQUIRE(plan.w[j] == 1.0);
    REQUIRE(plan.w.back() == 0.5);

    REQUIRE_THROWS_AS(plan_frequencies(sp, grid, 1.5), std::invalid_argument);

    Spectrum empty = sp;
    empty.peak = 1e12; // retention threshold above everything
    REQUIRE_THROWS_AS(plan_frequencies(empty, grid, 2.0), std::invalid_argument);
}

TEST_CASE("Free-space pulse echo matches the causal monopole reference") {
    const Pulse chi;
    const TimeGrid grid{0.1, 200};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(chi), grid, 16.0);
    const Scene fs = free_space();
    const Vec2 src{1.0, 1.0}, rec{3.0, 1.0}; // distance 2

    const auto u = synthesize_dataset(fs, plan, {rec}, {src}, grid.record_times(), FieldKind::TotalChi);
    REQUIRE(u.data.nt == 401);
    REQUIRE(u.data.nr == 1);
    REQUIRE(u.data.ns == 1);

    const PeakInfo peak = trace_peak(u, 0, 0);
    REQUIRE(peak.value > 0.05);
    // The pulse peaks at t = 3, so the echo peaks one travel time later.
    REQUIRE(std::abs(peak.time - 5.0) <= grid.dt + 1e-12);

    double maxdiff = 0.0;
    for (std::size_t n = 0; n < u.times.size(); n += 5)
        maxdiff = std::max(maxdiff,
                           std::abs(u.data.at(n, 0, 0) - causal_monopole(chi, chi.support_lo(), u.times[n], 2.0)));
    REQUIRE(maxdiff / peak.value < 2.5e-3); // wrap-around ripple at pad 16, measured 1.2e-3
}

TEST_CASE("Band periodization ripple shrinks as the pad factor grows") {
    const Pulse chi;
    const TimeGrid grid{0.1, 200};
    const Spectrum sp = make_spectrum(chi);
    const Scene fs = free_space();
    const Vec2 src{1.0, 1.0}, far{11.0, 1.0}; // distance 10
    const auto times = grid.record_times();
    const double arrival = 10.0 + chi.support_lo();

    auto ripple = [&](double pad) {
        const auto u = synthesize_dataset(fs, plan_frequencies(sp, grid, pad), {far}, {src}, times,
                                          FieldKind::TotalChi);
        double peak = 0.0, pre = 0.0;
        for (std::size_t n = 0; n < times.size(); ++n) {
            peak = std::max(peak, std::abs(u.data.at(n, 0, 0)));
            if (times[n] < arrival - 0.5) pre = std::max(pre, std::abs(u.data.at(n, 0, 0)));
        }
        return pre / peak;
    };

    const double at_production = ripple(2.0);
    const double at_fine = ripple(16.0);
    REQUIRE(at_production < 1.5e-2); // measured 8.5e-3 at the default pad
    REQUIRE(at_fine < 4e-3);         // measured 2.0e-3
    REQUIRE(at_fine < at_production);
}

TEST_CASE("Synthesized energy matches the band energy") {
    const TimeGrid grid{0.1, 200};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(Pulse{}), grid, 16.0);
    const Vec2 src{1.0, 1.0}, rec{3.0, 1.0};
    const auto u = synthesize_dataset(free_space(), plan, {rec}, {src}, grid.record_times(), FieldKind::TotalChi);

    double e_time = 0.0;
    for (std::size_t n = 0; n < u.times.size(); ++n) e_time += u.data.at(n, 0, 0) * u.data.at(n, 0, 0) * grid.dt;

    double e_band = 0.0;
    for (std::size_t j = 0; j < plan.k.size(); ++j)
        e_band += std::norm(plan.chi_hat[j] * green(plan.k[j], rec, src)) * plan.w[j] * plan.dk / pi;

    // The recording window cuts the slow cylindrical tail, so the match is
    // limited by the truncated tail energy (measured 1.0e-3 at pad 16).
    REQUIRE(std::abs(e_time - e_band) / e_band < 2e-3);
}

TEST_CASE("Doubling the padded period only moves samples by the ripple") {
    const TimeGrid grid{0.1, 200};
    const Spectrum sp = make_spectrum(Pulse{});
    const Scene fs = free_space();
    const Vec2 src{1.0, 1.0}, rec{3.0, 1.0};
    const auto times = grid.record_times();

    auto refine_delta = [&](double pad) {
        const auto u1 = synthesize_dataset(fs, plan_frequencies(sp, grid, pad), {rec}, {src}, times,
                                           FieldKind::TotalChi);
        const auto u2 = synthesize_dataset(fs, plan_frequencies(sp, grid, 2.0 * pad), {rec}, {src}, times,
                                           FieldKind::TotalChi);
        double d = 0.0, peak = 0.0;
        for (std::size_t n = 0; n < times.size(); ++n) {
            d = std::max(d, std::abs(u1.data.at(n, 0, 0) - u2.data.at(n, 0, 0)));
            peak = std::max(peak, std::abs(u2.data.at(n, 0, 0)));
        }
        return d / peak;
    };

    const double coarse = refine_delta(2.0);
    const double fine = refine_delta(16.0);
    REQUIRE(fine < coarse);   // first-order decay of the wrap-around image
    REQUIRE(fine < 1.2e-3);   // measured 5.5e-4
    REQUIRE(coarse < 6e-3);   // measured 3.3e-3 at the default pad
}

TEST_CASE("Scattered field synthesis is causal and arrives on time") {
    const Pulse chi;
    const TimeGrid grid{0.1, 200};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(chi), grid, 16.0);
    const Scene sc = build_scene({make_disk({1.0, 1.0}, 1.0 / 3.0)}, MeasurementSpec{});
    const Vec2 src{3.5, 1.0}, rec{1.0, 3.5};

    const auto us = synthesize_dataset(sc, plan, {rec}, {src}, grid.record_times(), FieldKind::ScatteredChi, 64);
    const PeakInfo peak = trace_peak(us, 0, 0);

    // Shortest source -> boundary -> receiver path, plus the pulse peak delay.
    const double path = 2.0 * (2.5 - 1.0 / 3.0);
    REQUIRE(std::abs(peak.time - (path + 3.0)) < 0.5);

    const double onset = path + chi.support_lo();
    double pre = 0.0;
    for (std::size_t n = 0; n < us.times.size(); ++n)
        if (us.times[n] < onset - 0.5) pre = std::max(pre, std::abs(us.data.at(n, 0, 0)));
    REQUIRE(pre / peak.value < 6e-3); // measured 3.0e-3 at pad 16
}

TEST_CASE("Free space has no scattered component") {
    const TimeGrid grid{0.1, 50};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(Pulse{}), grid, 2.0);
    const auto u = synthesize_dataset(free_space(), plan, {{3.0, 1.0}, {1.0, 3.0}}, {{1.0, 1.0}},
                                      grid.record_times(), FieldKind::ScatteredChi);
    for (const double v : u.data.v) REQUIRE(v == 0.0);
}

TEST_CASE("Autocorrelation-pulsed total field reduces to the incident correlation term") {
    const TimeGrid grid{0.1, 50};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(Pulse{}), grid, 2.0);
    const std::vector<Vec2> ps = {{3.0, 1.0}, {1.0, 3.0}};
    const std::vector<Vec2> qs = {{1.0, 1.0}};
    const auto lags = grid.record_times();

    const auto u = synthesize_dataset(free_space(), plan, ps, qs, lags, FieldKind::TotalChiTilde);
    const auto phi = incident_correlation(plan, ps, qs, lags);
    for (std::size_t n = 0; n < lags.size(); ++n)
        for (std::size_t p = 0; p < ps.size(); ++p) REQUIRE(u.data.at(n, p, 0) == phi.phi.at(n, p, 0));
}

TEST_CASE("Incident correlation matches the autocorrelation monopole reference") {
    const Pulse chi;
    const TimeGrid grid{0.1, 200};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(chi), grid, 16.0);
    const Autocorrelation ac = make_autocorrelation(chi);
    const std::vector<double> lags = {0.0, 1.0, 2.4, 4.0, -3.0};

    const Vec2 q{1.0, 1.0};
    double prev_scale = 1e30;
    for (const double r : {1.0, 2.0, 4.0}) {
        const Vec2 p{1.0 + r, 1.0};
        const auto term = incident_correlation(plan, {p}, {q}, lags);
        double maxdiff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < lags.size(); ++i) {
            const double ref = causal_monopole(ac, -ac.lag_support, lags[i], r);
            maxdiff = std::max(maxdiff, std::abs(term.phi.at(i, 0, 0) - ref));
            scale = std::max(scale, std::abs(ref));
        }
        REQUIRE(maxdiff / scale < 5e-4); // measured 2.4e-4 at pad 16

        // Cylindrical spreading: the term weakens with separation.
        REQUIRE(scale < prev_scale);
        prev_scale = scale;
    }
}

TEST_CASE("Incident correlation is symmetric in the two measurement points") {
    const TimeGrid grid{0.1, 50};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(Pulse{}), grid, 2.0);
    const std::vector<Vec2> ps = {{3.0, 1.0}, {0.5, 2.0}};
    const std::vector<Vec2> qs = {{1.0, 1.0}, {2.0, 2.5}};
    const std::vector<double> lags = {-1.0, 0.0, 0.7, 3.1};

    const auto fwd = incident_correlation(plan, ps, qs, lags);
    const auto rev = incident_correlation(plan, qs, ps, lags);
    for (std::size_t i = 0; i < lags.size(); ++i)
        for (std::size_t p = 0; p < ps.size(); ++p)
            for (std::size_t q = 0; q < qs.size(); ++q)
                REQUIRE(fwd.phi.at(i, p, q) == rev.phi.at(i, q, p));

    REQUIRE_THROWS_AS(incident_correlation(plan, ps, {{3.0, 1.0}}, lags), std::invalid_argument);
    REQUIRE_THROWS_AS(incident_correlation(plan, {}, qs, lags), std::invalid_argument);
    REQUIRE_THROWS_AS(incident_correlation(plan, ps, qs, {}), std::invalid_argument);
}

TEST_CASE("Synthesis results do not depend on the thread count") {
    const TimeGrid grid{0.1, 50};
    const FrequencyPlan plan = plan_frequencies(make_spectrum(Pulse{}), grid, 2.0);
    const Scene sc = build_scene({make_disk({1.0, 1.0}, 1.0 / 3.0)}, MeasurementSpec{});
    const std::vector<Vec2> recs = {{3.0, 1.0}, {1.0, 3.0}};
    const std::vector<Vec2> srcs = {{3.5, 1.0}, {1.0, -1.5}};

    const auto a = synthesize_dataset(sc, plan, recs, srcs, grid.record_times(), FieldKind::TotalChi, 64, 1);
    const auto b = synthesize_dataset(sc, plan, recs, srcs, grid.record_times(), FieldKind::TotalChi, 64, 4);
    REQUIRE(a.data.v.size() == b.data.v.size());
    for (std::size_t i = 0; i < a.data.v.size(); ++i) REQUIRE(a.data.v[i] == b.data.v[i]);

    REQUIRE_THROWS_AS(synthesize_dataset(sc, plan, {}, srcs, grid.record_times(), FieldKind::TotalChi),
                      std::invalid_argument);
}

TEST_CASE("Multiplicative noise stays within its level and is reproducible") {
    PulsedFieldSet u;
    u.times = {0.0, 0.1, 0.2};
    u.data = Tensor3(3, 2, 1);
    u.data.v = {1.5, -2.0, 0.0, 3.0, -0.25, 0.125};

    const auto same = add_noise(u, 0.0, 7);
    REQUIRE(same.data.v == u.data.v);
    REQUIRE(same.noise_level == 0.0);

    const double delta = 0.05;
    const auto noisy = add_noise(u, delta, 7);
    REQUIRE(noisy.noise_level == delta);
    bool any_changed = false;
    for (std::size_t i = 0; i < u.data.v.size(); ++i) {
        REQUIRE(std::abs(noisy.data.v[i] - u.data.v[i]) <= delta * std::abs(u.data.v[i]) + 1e-18);
        any_changed = any_changed || noisy.data.v[i] != u.data.v[i];
    }
    REQUIRE(any_changed);
    REQUIRE(noisy.data.v[2] == 0.0); // silent samples stay silent

    const auto again = add_noise(u, delta, 7);
    REQUIRE(again.data.v == noisy.data.v);
    const auto other_seed = add_noise(u, delta, 8);
    REQUIRE(other_seed.data.v != noisy.data.v);
    const auto other_tag = add_noise(u, delta, 7, "noise-b");
    REQUIRE(other_tag.data.v != noisy.data.v);

    REQUIRE_THROWS_AS(add_noise(u, -0.1, 7), std::invalid_argument);
}
