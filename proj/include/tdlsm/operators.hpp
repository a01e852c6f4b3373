#pragma once

// Imaging operators: dense block-Toeplitz matrices acting on time-and-station
// densities. Row (k, j) is time 2(k-N) dt at station x_j, column (h, m) is
// time 2(h-N) dt at station y_m (both on the symmetric lag grid), and the
// entry is 2 K(2(k-h) dt, x_j; y_m) dt dy for a lag kernel K. The passive
// kernel comes from the correlation module, the active ones from
// scattered-field synthesis on the lag grid.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"
#include "tdlsm/correlation.hpp"
#include "tdlsm/parallel.hpp"
#include "tdlsm/pulse.hpp"
#include "tdlsm/synthesis.hpp"

namespace tdlsm {

enum class OperatorKind { Correlation, NearField, Antisymmetrized };

inline const char* operator_kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::Correlation: return "C";
        case OperatorKind::NearField: return "N";
        default: return "I";
    }
}

struct ImagingOperator {
    OperatorKind kind = OperatorKind::NearField;
    int N = 0; // time rows k = 0..2N
    std::size_t nx = 0, ny = 0;
    double dt = 0.0, dy = 0.0;
    Eigen::MatrixXd A;

    std::size_t rows() const { return (2 * static_cast<std::size_t>(N) + 1) * nx; }
    std::size_t cols() const { return (2 * static_cast<std::size_t>(N) + 1) * ny; }
};

namespace op_detail {

// kval(d, j, m) is the kernel at lag 2 d dt, zero-extended by the caller.
template <typename K>
Eigen::MatrixXd toeplitz_assemble(int N, std::size_t nx, std::size_t ny, double factor, bool antisymmetrize,
                                  const K& kval, int threads) {
    const int steps = 2 * N + 1;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(steps * static_cast<int>(nx)),
                      static_cast<Eigen::Index>(steps * static_cast<int>(ny)));
    parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t hcol) {
        const int h = static_cast<int>(hcol);
        for (std::size_t m = 0; m < ny; ++m) {
            const Eigen::Index col = static_cast<Eigen::Index>(hcol * ny + m);
            for (int k = 0; k < steps; ++k)
                for (std::size_t j = 0; j < nx; ++j) {
                    double e = factor * kval(k - h, j, m);
                    if (antisymmetrize) e -= factor * kval(h - k, j, m);
                    A(static_cast<Eigen::Index>(static_cast<std::size_t>(k) * nx + j), col) = e;
                }
        }
    });
    return A;
}

} // namespace op_detail

inline ImagingOperator assemble_operator(const CorrelationKernel& kernel, double dy, int threads = 1) {
    if (!(dy > 0.0)) throw std::invalid_argument("assemble_operator: station weight must be positive");
    ImagingOperator out;
    out.kind = OperatorKind::Correlation;
    out.N = kernel.N;
    out.nx = kernel.nx;
    out.ny = kernel.ny;
    out.dt = kernel.dt;
    out.dy = dy;
    out.A = op_detail::toeplitz_assemble(
        kernel.N, kernel.nx, kernel.ny, 2.0 * kernel.dt * dy, false,
        [&](int d, std::size_t j, std::size_t m) { return kernel.lag(d, j, m); }, threads);
    return out;
}

// Active-data operators from scattered autocorrelation-pulsed records on the
// lag grid. The antisymmetrized kind subtracts the time-flipped entry inside
// the same assembly pass, so it equals the near-field matrix minus its flip
// bit for bit.
inline ImagingOperator assemble_operator(const PulsedFieldSet& active, const TimeGrid& grid, OperatorKind kind,
                                         double dy, int threads = 1) {
    if (kind == OperatorKind::Correlation)
        throw std::invalid_argument("assemble_operator: correlation operators are built from a correlation kernel");
    if (!(dy > 0.0)) throw std::invalid_argument("assemble_operator: station weight must be positive");
    if (active.kind != FieldKind::ScatteredChiTilde)
        throw std::invalid_argument("assemble_operator: active records must be scattered autocorrelation fields");
    const std::size_t nlag = 2 * static_cast<std::size_t>(grid.N) + 1;
    if (active.times.size() != nlag || active.data.nt != nlag)
        throw std::invalid_argument("assemble_operator: active records not on the lag grid");
    for (std::size_t i = 0; i < nlag; ++i)
        if (std::abs(active.times[i] - 2.0 * (static_cast<double>(i) - grid.N) * grid.dt) > 1e-12)
            throw std::invalid_argument("assemble_operator: active records not on the lag grid");

    const int N = grid.N;
    ImagingOperator out;
    out.kind = kind;
    out.N = N;
    out.nx = active.data.nr;
    out.ny = active.data.ns;
    out.dt = grid.dt;
    out.dy = dy;
    out.A = op_detail::toeplitz_assemble(
        N, out.nx, out.ny, 2.0 * grid.dt * dy, kind == OperatorKind::Antisymmetrized,
        [&](int d, std::size_t j, std::size_t m) {
            if (d < -N || d > N) return 0.0;
            return active.data.at(static_cast<std::size_t>(d + N), j, m);
        },
        threads);
    return out;
}

// Sampled point-source signature: the autocorrelation pulse delayed by the
// travel time to each station, carrying the monopole amplitude as printed in
// the reference scheme (a 3D factor; see test_function_synthesized for the
// cylindrical-wave alternative).
struct TestFunction {
    Vec2 z{};
    double tau = 0.0;
    int N = 0;
    std::size_t nx = 0;
    double dt = 0.0;
    Eigen::MatrixXd g; // (2N+1) x J

    Eigen::VectorXd flattened() const {
        Eigen::VectorXd out(g.rows() * g.cols());
        for (Eigen::Index k = 0; k < g.rows(); ++k)
            for (Eigen::Index j = 0; j < g.cols(); ++j) out(k * g.cols() + j) = g(k, j);
        return out;
    }
};

inline TestFunction test_function(Vec2 z, double tau, const Autocorrelation& ac, const std::vector<Vec2>& receivers,
                                  const TimeGrid& grid) {
    if (receivers.empty()) throw std::invalid_argument("test_function: no receivers");
    TestFunction out;
    out.z = z;
    out.tau = tau;
    out.N = grid.N;
    out.nx = receivers.size();
    out.dt = grid.dt;
    out.g.resize(2 * grid.N + 1, static_cast<Eigen::Index>(receivers.size()));
    for (std::size_t j = 0; j < receivers.size(); ++j) {
        const double r = dist(z, receivers[j]);
        if (r < 1e-9) throw std::invalid_argument("test_function: sampling point coincides with a receiver");
        for (int k = 0; k <= 2 * grid.N; ++k)
            out.g(k, static_cast<Eigen::Index>(j)) = ac(2.0 * (k - grid.N) * grid.dt - tau - r) / (4.0 * pi * r);
    }
    return out;
}

// Cylindrical-wave alternative: the autocorrelation pulse actually radiated
// from z through the plane, synthesized over the retained band.
inline TestFunction test_function_synthesized(Vec2 z, double tau, const FrequencyPlan& plan,
                                              const std::vector<Vec2>& receivers, const TimeGrid& grid) {
    if (receivers.empty()) throw std::invalid_argument("test_function: no receivers");
    std::vector<double> times(2 * static_cast<std::size_t>(grid.N) + 1);
    for (std::size_t k = 0; k < times.size(); ++k)
        times[k] = 2.0 * (static_cast<double>(k) - grid.N) * grid.dt - tau;
    const IncidentCorrelationTerm term = incident_correlation(plan, receivers, {z}, times);

    TestFunction out;
    out.z = z;
    out.tau = tau;
    out.N = grid.N;
    out.nx = receivers.size();
    out.dt = grid.dt;
    out.g.resize(2 * grid.N + 1, static_cast<Eigen::Index>(receivers.size()));
    for (int k = 0; k <= 2 * grid.N; ++k)
        for (std::size_t j = 0; j < receivers.size(); ++j)
            out.g(k, static_cast<Eigen::Index>(j)) = term.phi.at(static_cast<std::size_t>(k), j, 0);
    return out;
}

} // namespace tdlsm
