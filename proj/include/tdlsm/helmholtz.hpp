#pragma once

// Exterior Dirichlet scattering at a fixed wavenumber in 2D. The scattered
// field is represented as a combined double/single layer (coupling eta = k)
// so the collocation system stays well conditioned across the whole pulse
// band, including interior resonances of the obstacle. Discretization is the
// classical spectrally accurate Nystroem scheme for smooth closed curves:
// kernels are split into an analytic part times ln(4 sin^2((t-tau)/2)) plus a
// smooth remainder, and the log factor is integrated with its dedicated
// trigonometric weights.
//
// A separation-of-variables series for a circular obstacle serves as the
// independent oracle the solver is validated against.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdlsm/bessel.hpp"
#include "tdlsm/common.hpp"
#include "tdlsm/geometry.hpp"

namespace tdlsm {

// Outgoing 2D fundamental solution (i/4) H0^(1)(k|x-y|).
inline cplx green(double k, Vec2 x, Vec2 y) {
    if (!(k > 0.0)) throw std::invalid_argument("green: wavenumber must be positive");
    const double r = dist(x, y);
    if (!(r > 0.0)) throw std::invalid_argument("green: coincident points");
    return cplx(0.0, 0.25) * hankel1_0(k * r);
}

enum class BieKind { CombinedField, SingleLayerOnly };

// Weight integrating f(tau) ln(4 sin^2((t-tau)/2)) dtau over [0, 2pi) against
// the trigonometric interpolant of f on P uniform nodes; d = t - t_j.
inline double kress_log_weight(int P, double d) {
    double s = 0.0;
    for (int m = 1; m < P / 2; ++m) s += std::cos(m * d) / m;
    return -(4.0 * pi / P) * s - (4.0 * pi / (static_cast<double>(P) * P)) * std::cos(0.5 * P * d);
}

namespace bie_detail {

// Double-layer kernel with the surface Jacobian folded in:
// (ik/4) H1(kr) <x - y(tau), nu(tau)> |y'(tau)| / r, nu|y'| = (y2', -y1').
inline cplx dlp_kernel(double k, Vec2 x, Vec2 yj, Vec2 tangj) {
    const double r = dist(x, yj);
    const double cross = (x.x - yj.x) * tangj.y - (x.y - yj.y) * tangj.x;
    return cplx(0.0, 0.25 * k) * hankel1_1(k * r) * (cross / r);
}

inline cplx slp_kernel(double k, Vec2 x, Vec2 yj, double jacj) {
    return cplx(0.0, 0.25) * hankel1_0(k * dist(x, yj)) * jacj;
}

// Coefficients of ln(4 sin^2((t-tau)/2)) in the kernel splits.
inline double dlp_log_part(double k, Vec2 x, Vec2 yj, Vec2 tangj) {
    const double r = dist(x, yj);
    const double cross = (x.x - yj.x) * tangj.y - (x.y - yj.y) * tangj.x;
    return -(k / (4.0 * pi)) * bessel_j1(k * r) * (cross / r);
}

inline double slp_log_part(double k, Vec2 x, Vec2 yj, double jacj) {
    return -(1.0 / (4.0 * pi)) * bessel_j0(k * dist(x, yj)) * jacj;
}

} // namespace bie_detail

struct BiePanelization {
    struct CurveNodes {
        BoundaryCurve curve;
        int offset = 0;                 // first row/column in the global system
        std::vector<Vec2> pos, tang;    // x(t_j), x'(t_j)
        std::vector<Vec2> pos_half;     // x(t_j + pi/P), collocation-free points
        std::vector<double> jac;        // |x'(t_j)|
    };

    double k = 0.0, eta = 0.0;
    BieKind kind = BieKind::CombinedField;
    int n = 0; // nodes per curve
    std::vector<CurveNodes> curves;
    std::vector<double> log_w;       // kress_log_weight at d = 2 pi m / n
    std::vector<double> log_w_half;  // ... at d = pi (2m + 1) / n
    std::vector<double> interp_half; // trigonometric interpolation to t + pi/n
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    double cond_estimate = 0.0;

    int total_nodes() const { return static_cast<int>(curves.size()) * n; }
};

inline BiePanelization assemble_bie(const Scene& scene, double k, int n, BieKind kind = BieKind::CombinedField) {
    if (!(k > 0.0)) throw std::invalid_argument("assemble_bie: wavenumber must be positive");
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("assemble_bie: node count must be even and >= 8");

    BiePanelization pan;
    pan.k = k;
    pan.eta = (kind == BieKind::CombinedField) ? k : 0.0;
    pan.kind = kind;
    pan.n = n;

    for (const BoundaryCurve& c : scene.obstacles) {
        BiePanelization::CurveNodes cn;
        cn.curve = c;
        cn.offset = static_cast<int>(pan.curves.size()) * n;
        cn.pos.resize(n);
        cn.tang.resize(n);
        cn.pos_half.resize(n);
        cn.jac.resize(n);
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * pi * j / n;
            cn.pos[j] = c.point(t);
            cn.tang[j] = c.deriv(t);
            cn.jac[j] = norm(cn.tang[j]);
            cn.pos_half[j] = c.point(t + pi / n);
        }
        pan.curves.push_back(std::move(cn));
    }
    if (pan.curves.empty()) return pan; // free space: nothing to factor

    pan.log_w.resize(n);
    pan.log_w_half.resize(n);
    pan.interp_half.resize(n);
    for (int m = 0; m < n; ++m) {
        pan.log_w[m] = kress_log_weight(n, 2.0 * pi * m / n);
        const double dh = pi * (2.0 * m + 1.0) / n;
        pan.log_w_half[m] = kress_log_weight(n, dh);
        pan.interp_half[m] = (1.0 / n) * std::sin(0.5 * n * dh) / std::tan(0.5 * dh);
    }

    const int ntot = pan.total_nodes();
    const double tw = 2.0 * pi / n; // trapezoid weight for smooth parts
    Eigen::MatrixXcd A(ntot, ntot);
    for (const auto& ca : pan.curves) {
        for (int i = 0; i < n; ++i) {
            const int gi = ca.offset + i;
            for (const auto& cb : pan.curves) {
                for (int j = 0; j < n; ++j) {
                    const int gj = cb.offset + j;
                    cplx K, S;
                    if (ca.offset != cb.offset) {
                        // Different curves never touch: kernels are smooth.
                        K = bie_detail::dlp_kernel(k, ca.pos[i], cb.pos[j], cb.tang[j]) * tw;
                        S = bie_detail::slp_kernel(k, ca.pos[i], cb.pos[j], cb.jac[j]) * tw;
                    } else if (i == j) {
                        const double t = 2.0 * pi * i / n;
                        const Vec2 d2 = ca.curve.deriv2(t);
                        const double jc = ca.jac[i];
                        const double dlp_diag = (d2.x * ca.tang[i].y - d2.y * ca.tang[i].x) / (4.0 * pi * jc * jc);
                        const cplx slp_diag =
                            (cplx(0.0, 0.25) - (euler_gamma + std::log(0.5 * k * jc)) / (2.0 * pi)) * jc;
                        K = dlp_diag * tw;
                        S = pan.log_w[0] * bie_detail::slp_log_part(k, ca.pos[i], ca.pos[i], jc) + slp_diag * tw;
                    } else {
                        const double dd = 2.0 * pi * (i - j) / n;
                        const double lt = std::log(4.0 * std::sin(0.5 * dd) * std::sin(0.5 * dd));
                        const double rl = pan.log_w[(i - j + n) % n];
                        const double l1 = bie_detail::dlp_log_part(k, ca.pos[i], cb.pos[j], cb.tang[j]);
                        const double m1 = bie_detail::slp_log_part(k, ca.pos[i], cb.pos[j], cb.jac[j]);
                        const cplx l2 = bie_detail::dlp_kernel(k, ca.pos[i], cb.pos[j], cb.tang[j]) - l1 * lt;
                        const cplx m2 = bie_detail::slp_kernel(k, ca.pos[i], cb.pos[j], cb.jac[j]) - m1 * lt;
                        K = rl * l1 + tw * l2;
                        S = rl * m1 + tw * m2;
                    }
                    if (kind == BieKind::CombinedField) {
                        A(gi, gj) = K - cplx(0.0, 1.0) * pan.eta * S;
                        if (gi == gj) A(gi, gj) += 0.5;
                    } else {
                        A(gi, gj) = S;
                    }
                }
            }
        }
    }

    pan.lu.compute(A);
    const auto du = pan.lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = du.maxCoeff(), dmin = du.minCoeff();
    pan.cond_estimate = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (!(pan.cond_estimate < 1e13))
        throw std::runtime_error("assemble_bie: collocation system numerically singular (condition estimate " +
                                 std::to_string(pan.cond_estimate) + ")");
    return pan;
}

// A solved point-source problem. Holds its own copy of the node data, so it
// stays valid after the panelization is gone and is safe for concurrent
// evaluation at many points.
struct FrequencySolve {
    double k = 0.0, eta = 0.0;
    BieKind kind = BieKind::CombinedField;
    Vec2 source;
    std::vector<Vec2> pos, tang;
    std::vector<double> jac;
    double weight = 0.0; // 2 pi / n
    std::vector<cplx> psi;

    cplx scattered(Vec2 x) const {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < pos.size(); ++j) {
            if (!(dist(x, pos[j]) > 1e-12))
                throw std::invalid_argument("FrequencySolve: evaluation point touches the boundary");
            if (kind == BieKind::CombinedField)
                acc += (bie_detail::dlp_kernel(k, x, pos[j], tang[j]) -
                        cplx(0.0, 1.0) * eta * bie_detail::slp_kernel(k, x, pos[j], jac[j])) *
                       psi[j];
            else
                acc += bie_detail::slp_kernel(k, x, pos[j], jac[j]) * psi[j];
        }
        return weight * acc;
    }

    cplx total(Vec2 x) const { return scattered(x) + green(k, x, source); }
};

inline std::vector<FrequencySolve> solve_point_sources(const BiePanelization& pan, const std::vector<Vec2>& ys) {
    for (const Vec2& y : ys)
        for (const auto& cn : pan.curves)
            if (cn.curve.contains(y)) throw std::invalid_argument("solve_point_sources: source inside an obstacle");

    const int ntot = pan.total_nodes();
    Eigen::MatrixXcd rhs(ntot, static_cast<int>(ys.size()));
    for (int s = 0; s < static_cast<int>(ys.size()); ++s)
        for (const auto& cn : pan.curves)
            for (int j = 0; j < pan.n; ++j) rhs(cn.offset + j, s) = -green(pan.k, cn.pos[j], ys[s]);
    Eigen::MatrixXcd dens;
    if (ntot > 0) dens = pan.lu.solve(rhs);

    std::vector<FrequencySolve> out;
    out.reserve(ys.size());
    for (int s = 0; s < static_cast<int>(ys.size()); ++s) {
        FrequencySolve f;
        f.k = pan.k;
        f.eta = pan.eta;
        f.kind = pan.kind;
        f.source = ys[s];
        f.weight = pan.n > 0 ? 2.0 * pi / pan.n : 0.0;
        for (const auto& cn : pan.curves) {
            f.pos.insert(f.pos.end(), cn.pos.begin(), cn.pos.end());
            f.tang.insert(f.tang.end(), cn.tang.begin(), cn.tang.end());
            f.jac.insert(f.jac.end(), cn.jac.begin(), cn.jac.end());
        }
        f.psi.resize(ntot);
        for (int j = 0; j < ntot; ++j) f.psi[j] = dens(j, s);
        out.push_back(std::move(f));
    }
    return out;
}

inline FrequencySolve solve_point_source(const BiePanelization& pan, Vec2 y) {
    return solve_point_sources(pan, {y})[0];
}

// Relative Dirichlet residual max |u^scat + G(., source)| / max |G(., source)|
// sampled at the half-offset points between collocation nodes. These points
// take no part in the solve, so the residual is a genuine accuracy measure,
// not the linear-system residual.
inline double boundary_residual(const BiePanelization& pan, const FrequencySolve& f) {
    if (pan.curves.empty()) return 0.0;
    const int n = pan.n;
    const double tw = 2.0 * pi / n;
    double worst = 0.0, scale = 0.0;
    for (const auto& ca : pan.curves) {
        for (int i = 0; i < n; ++i) {
            const Vec2 xh = ca.pos_half[i];
            cplx scat(0.0, 0.0);
            // Trigonometric interpolation of the density to the half point
            // (the exterior double-layer jump contributes psi/2 there).
            if (pan.kind == BieKind::CombinedField) {
                cplx psih(0.0, 0.0);
                for (int j = 0; j < n; ++j) psih += pan.interp_half[(i - j + n) % n] * f.psi[ca.offset + j];
                scat += 0.5 * psih;
            }
            for (const auto& cb : pan.curves) {
                for (int j = 0; j < n; ++j) {
                    const cplx pj = f.psi[cb.offset + j];
                    if (ca.offset != cb.offset) {
                        cplx val = bie_detail::slp_kernel(pan.k, xh, cb.pos[j], cb.jac[j]) * tw;
                        if (pan.kind == BieKind::CombinedField)
                            val = bie_detail::dlp_kernel(pan.k, xh, cb.pos[j], cb.tang[j]) * tw -
                                  cplx(0.0, 1.0) * pan.eta * val;
                        scat += val * pj;
                    } else {
                        const double dh = pi * (2.0 * (i - j) + 1.0) / n;
                        const double lt = std::log(4.0 * std::sin(0.5 * dh) * std::sin(0.5 * dh));
                        const double rl = pan.log_w_half[(i - j + n) % n];
                        const double m1 = bie_detail::slp_log_part(pan.k, xh, cb.pos[j], cb.jac[j]);
                        const cplx m2 = bie_detail::slp_kernel(pan.k, xh, cb.pos[j], cb.jac[j]) - m1 * lt;
                        cplx val = rl * m1 + tw * m2;
                        if (pan.kind == BieKind::CombinedField) {
                            const double l1 = bie_detail::dlp_log_part(pan.k, xh, cb.pos[j], cb.tang[j]);
                            const cplx l2 = bie_detail::dlp_kernel(pan.k, xh, cb.pos[j], cb.tang[j]) - l1 * lt;
                            val = (rl * l1 + tw * l2) - cplx(0.0, 1.0) * pan.eta * val;
                        }
                        scat += val * pj;
                    }
                }
            }
            const cplx inc = green(pan.k, xh, f.source);
            worst = std::max(worst, std::abs(scat + inc));
            scale = std::max(scale, std::abs(inc));
        }
    }
    return worst / scale;
}

// Scattered field of a sound-soft disk for a point source at y, evaluated at
// x, by the circular-harmonics series. Terms are grouped so no intermediate
// Hankel product overflows: (J_m(ka)/H_m(ka)) H_m(k r_x) stays bounded
// because r_x >= a.
inline cplx disk_oracle(Vec2 center, double radius, double k, Vec2 x, Vec2 y) {
    if (!(radius > 0.0) || !(k > 0.0)) throw std::invalid_argument("disk_oracle: need positive radius and wavenumber");
    const double rx = dist(x, center), ry = dist(y, center);
    if (rx < radius - 1e-12 || ry < radius - 1e-12)
        throw std::invalid_argument("disk_oracle: points must lie outside the disk");
    const double dphi = std::atan2(x.y - center.y, x.x - center.x) - std::atan2(y.y - center.y, y.x - center.x);

    // Largest order before Y_m(k * radius) (the smallest argument, hence the
    // largest magnitudes) would overflow the upward recurrence.
    const double za = k * radius;
    int cap = 200;
    for (int m = 2; m <= 200; ++m) {
        if (std::lgamma(m) + m * std::log(2.0 / za) - std::log(pi) > 560.0) {
            cap = m - 1;
            break;
        }
    }

    const auto J = bessel_jn_all(cap, za);
    const auto Ha = hankel1_all(cap, za);
    const auto Hx = hankel1_all(cap, k * rx);
    const auto Hy = hankel1_all(cap, k * ry);

    cplx sum = (J[0] / Ha[0]) * Hx[0] * Hy[0];
    const double settle = k * std::max(rx, ry); // oscillatory range: no decay yet
    int small_streak = 0;
    for (int m = 1; m <= cap; ++m) {
        cplx term = J[m] / Ha[m];
        term *= Hx[m];
        term *= Hy[m];
        term *= 2.0 * std::cos(m * dphi);
        sum += term;
        if (m > settle) {
            small_streak = (std::abs(term) < 1e-14 * std::abs(sum)) ? small_streak + 1 : 0;
            if (small_streak >= 2) return cplx(0.0, -0.25) * sum;
        }
    }
    throw std::runtime_error("disk_oracle: series did not converge within " + std::to_string(cap) + " terms");
}

} // namespace tdlsm
