#pragma once

// Ratio-truncated SVD of an imaging operator and the indicator map built
// from per-point least-squares solves. Retention keeps every singular value
// within the ratio rho of the largest; the indicator is the reciprocal
// norm of the truncated solution, which spikes inside the obstacle where
// the point-source signature is (nearly) in the operator range.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tdlsm/geometry.hpp"
#include "tdlsm/operators.hpp"
#include "tdlsm/parallel.hpp"
#include "tdlsm/pulse.hpp"

namespace tdlsm {

struct TruncatedSvd {
    OperatorKind kind = OperatorKind::NearField;
    double rho = 0.005;
    int keep = 0;           // P
    Eigen::VectorXd sigma;  // retained singular values, nonincreasing
    Eigen::MatrixXd U, V;   // rows x P and cols x P
    double sigma1 = 0.0;
};

inline TruncatedSvd truncated_svd(const ImagingOperator& op, double rho = 0.005) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("truncated_svd: retention ratio outside (0, 1]");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(op.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw std::runtime_error("truncated_svd: decomposition failed");
    const Eigen::VectorXd& s = svd.singularValues();
    if (!(s.size() > 0) || !(s(0) > 0.0)) throw std::invalid_argument("truncated_svd: operator is zero");

    int keep = 0;
    while (keep < s.size() && s(keep) / s(0) >= rho) ++keep;

    TruncatedSvd out;
    out.kind = op.kind;
    out.rho = rho;
    out.keep = keep;
    out.sigma = s.head(keep);
    out.U = svd.matrixU().leftCols(keep);
    out.V = svd.matrixV().leftCols(keep);
    out.sigma1 = s(0);
    return out;
}

struct SampleSolution {
    Eigen::VectorXd g;
    double indicator = 0.0;
    bool orthogonal = false; // test function had no component in the retained range
};

inline SampleSolution solve_sample(const TruncatedSvd& svd, const Eigen::VectorXd& rhs) {
    if (rhs.size() != svd.U.rows()) throw std::invalid_argument("solve_sample: test function length mismatch");
    SampleSolution out;
    const Eigen::VectorXd coeff = svd.U.transpose() * rhs;
    out.g = svd.V * (coeff.array() / svd.sigma.array()).matrix();
    const double norm = out.g.norm();
    if (norm == 0.0) {
        out.indicator = std::numeric_limits<double>::infinity();
        out.orthogonal = true;
    } else {
        out.indicator = 1.0 / norm;
    }
    return out;
}

inline SampleSolution solve_sample(const TruncatedSvd& svd, const TestFunction& tf) {
    return solve_sample(svd, tf.flattened());
}

struct IndicatorMap {
    SamplingGrid grid;
    OperatorKind kind = OperatorKind::NearField;
    double tau = 0.0;
    std::vector<double> values; // same layout as the grid mask; masked points 0
    double max_value = 0.0;

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }
};

inline IndicatorMap indicator_map(const TruncatedSvd& svd, const SamplingGrid& grid, double tau,
                                  const Autocorrelation& ac, const std::vector<Vec2>& receivers,
                                  const TimeGrid& time_grid, int threads = 1) {
    const std::size_t npts = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    if (npts == 0) throw std::invalid_argument("indicator_map: empty sampling grid");

    IndicatorMap out;
    out.grid = grid;
    out.kind = svd.kind;
    out.tau = tau;
    out.values.assign(npts, 0.0);

    parallel_for(npts, threads, [&](std::size_t p) {
        const int ix = static_cast<int>(p % static_cast<std::size_t>(grid.nx));
        const int iy = static_cast<int>(p / static_cast<std::size_t>(grid.nx));
        if (!grid.unmasked(ix, iy)) return;
        const TestFunction tf = test_function(grid.point(ix, iy), tau, ac, receivers, time_grid);
        out.values[p] = solve_sample(svd, tf).indicator;
    });

    out.max_value = 0.0;
    for (const double v : out.values)
        if (v > out.max_value) out.max_value = v;
    return out;
}

} // namespace tdlsm
