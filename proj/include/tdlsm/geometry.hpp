#pragma once

// Scene geometry: smooth closed obstacle boundaries, the measurement rings,
// the sampling lattice, and the randomized far source ring.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"
#include "tdlsm/rng.hpp"

namespace tdlsm {

enum class CurveKind { Ellipse, Kite, Disk };

// Parametric closed curve x(theta), theta in [0, 2pi), counterclockwise,
// with analytic first and second derivatives (the boundary solver needs
// curvature information on the diagonal).
struct BoundaryCurve {
    CurveKind kind = CurveKind::Disk;
    Vec2 center{0.0, 0.0};
    double rx = 1.0;  // ellipse/disk radius (x semi-axis for ellipse)
    double ry = 1.0;  // ellipse y semi-axis
    double kite = 0.0; // coefficient of the cos(2 theta) term

    Vec2 point(double th) const {
        switch (kind) {
            case CurveKind::Ellipse: return {center.x + rx * std::cos(th), center.y + ry * std::sin(th)};
            case CurveKind::Kite:
                return {center.x + rx * std::cos(th) + kite * std::cos(2.0 * th), center.y + ry * std::sin(th)};
            default: return {center.x + rx * std::cos(th), center.y + rx * std::sin(th)};
        }
    }

    Vec2 deriv(double th) const {
        switch (kind) {
            case CurveKind::Ellipse: return {-rx * std::sin(th), ry * std::cos(th)};
            case CurveKind::Kite:
                return {-rx * std::sin(th) - 2.0 * kite * std::sin(2.0 * th), ry * std::cos(th)};
            default: return {-rx * std::sin(th), rx * std::cos(th)};
        }
    }

    Vec2 deriv2(double th) const {
        switch (kind) {
            case CurveKind::Ellipse: return {-rx * std::cos(th), -ry * std::sin(th)};
            case CurveKind::Kite:
                return {-rx * std::cos(th) - 4.0 * kite * std::cos(2.0 * th), -ry * std::sin(th)};
            default: return {-rx * std::cos(th), -rx * std::sin(th)};
        }
    }

    // Winding-number containment test against a fine polyline of the curve.
    bool contains(Vec2 p, int samples = 720) const {
        double w = 0.0;
        Vec2 prev = point(0.0) - p;
        for (int i = 1; i <= samples; ++i) {
            const Vec2 cur = point(2.0 * pi * i / samples) - p;
            w += std::atan2(prev.x * cur.y - prev.y * cur.x, prev.x * cur.x + prev.y * cur.y);
            prev = cur;
        }
        return std::abs(w) > pi;
    }
};

inline BoundaryCurve make_ellipse(Vec2 center, double rx, double ry) {
    if (!(rx > 0.0 && ry > 0.0)) throw std::invalid_argument("make_ellipse: semi-axes must be positive");
    BoundaryCurve c;
    c.kind = CurveKind::Ellipse;
    c.center = center;
    c.rx = rx;
    c.ry = ry;
    return c;
}

inline BoundaryCurve make_kite(Vec2 center, double rx, double kite_coeff, double ry) {
    if (!(rx > 0.0 && ry > 0.0)) throw std::invalid_argument("make_kite: semi-axes must be positive");
    BoundaryCurve c;
    c.kind = CurveKind::Kite;
    c.center = center;
    c.rx = rx;
    c.ry = ry;
    c.kite = kite_coeff;
    return c;
}

inline BoundaryCurve make_disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_disk: radius must be positive");
    BoundaryCurve c;
    c.kind = CurveKind::Disk;
    c.center = center;
    c.rx = radius;
    return c;
}

// Receiver layout: `count` equiangular stations on rings about `center`,
// angles -pi + 2pi (i-1)/count for i = 1..count. Station i sits on ring
// (i-1) mod rings. Even stations form the x-ring (imaging receivers), odd
// stations the y-ring (correlation test sources). An optional angular sector
// keeps only stations strictly inside it.
struct MeasurementSpec {
    Vec2 center{1.0, 1.0};
    std::vector<double> ring_radii{2.5};
    int count = 30;
    std::optional<std::pair<double, double>> aperture; // open sector (lo, hi)

    friend bool operator==(const MeasurementSpec&, const MeasurementSpec&) = default;
};

struct MeasurementSet {
    std::vector<Vec2> x; // imaging receivers (even stations)
    std::vector<Vec2> y; // correlation test sources (odd stations)
    std::vector<double> x_angles, y_angles;
};

inline MeasurementSet make_receivers(const MeasurementSpec& spec) {
    if (spec.count < 2 || spec.count % 2 != 0)
        throw std::invalid_argument("make_receivers: station count must be even and >= 2");
    if (spec.ring_radii.empty()) throw std::invalid_argument("make_receivers: no rings");
    for (double r : spec.ring_radii)
        if (!(r > 0.0)) throw std::invalid_argument("make_receivers: ring radius must be positive");
    MeasurementSet set;
    for (int i = 1; i <= spec.count; ++i) {
        const double angle = -pi + 2.0 * pi * (i - 1) / spec.count;
        if (spec.aperture) {
            const auto [lo, hi] = *spec.aperture;
            if (!(angle > lo + 1e-12 && angle < hi - 1e-12)) continue;
        }
        const double r = spec.ring_radii[(i - 1) % spec.ring_radii.size()];
        const Vec2 p{spec.center.x + r * std::cos(angle), spec.center.y + r * std::sin(angle)};
        if (i % 2 == 0) {
            set.x.push_back(p);
            set.x_angles.push_back(angle);
        } else {
            set.y.push_back(p);
            set.y_angles.push_back(angle);
        }
    }
    if (set.x.empty() || set.y.empty()) throw std::invalid_argument("make_receivers: aperture leaves a ring empty");
    return set;
}

struct Scene {
    std::vector<BoundaryCurve> obstacles; // may be empty (free space)
    MeasurementSpec measurement;
};

// Validates that every obstacle stays strictly inside the innermost
// measurement ring and that obstacles do not touch each other.
inline Scene build_scene(std::vector<BoundaryCurve> obstacles, MeasurementSpec meas) {
    const int samples = 1024;
    double ring_min = meas.ring_radii.empty() ? 0.0 : meas.ring_radii[0];
    for (double r : meas.ring_radii) ring_min = std::min(ring_min, r);
    for (const auto& c : obstacles) {
        for (int i = 0; i < samples; ++i) {
            const Vec2 p = c.point(2.0 * pi * i / samples);
            if (!(dist(p, meas.center) < ring_min - 1e-9))
                throw std::invalid_argument("build_scene: obstacle reaches the measurement ring");
        }
        for (int i = 0; i < samples; ++i) {
            const Vec2 d = c.deriv(2.0 * pi * i / samples);
            if (!(norm(d) > 1e-12)) throw std::invalid_argument("build_scene: degenerate boundary parametrization");
        }
    }
    for (std::size_t a = 0; a + 1 < obstacles.size(); ++a)
        for (std::size_t b = a + 1; b < obstacles.size(); ++b) {
            double dmin = 1e300;
            for (int i = 0; i < 256; ++i)
                for (int j = 0; j < 256; ++j)
                    dmin = std::min(dmin, dist(obstacles[a].point(2.0 * pi * i / 256),
                                               obstacles[b].point(2.0 * pi * j / 256)));
            bool crossing = false;
            for (int i = 0; i < 256 && !crossing; ++i)
                crossing = obstacles[a].contains(obstacles[b].point(2.0 * pi * i / 256)) ||
                           obstacles[b].contains(obstacles[a].point(2.0 * pi * i / 256));
            if (crossing || !(dmin > 1e-6)) throw std::invalid_argument("build_scene: obstacles touch");
        }
    Scene s;
    s.obstacles = std::move(obstacles);
    s.measurement = std::move(meas);
    return s;
}

inline bool scene_contains(const Scene& s, Vec2 p) {
    for (const auto& c : s.obstacles)
        if (c.contains(p)) return true;
    return false;
}

// Axis-aligned lattice of spacing h covering the sampling disk; points at
// distance >= radius from the center are masked and render as zero.
struct SamplingGrid {
    Vec2 center{1.0, 1.0};
    double radius = 2.2;
    double h = 0.04;
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> mask; // 1 = inside sampling disk (row-major, y-major rows)

    Vec2 point(int ix, int iy) const {
        return {center.x - radius + ix * h, center.y - radius + iy * h};
    }
    bool unmasked(int ix, int iy) const { return mask[static_cast<std::size_t>(iy) * nx + ix] != 0; }
};

inline SamplingGrid make_sampling_grid(Vec2 center, double radius, double h) {
    if (!(radius > 0.0) || !(h > 0.0)) throw std::invalid_argument("make_sampling_grid: radius and h must be positive");
    if (h > radius) throw std::invalid_argument("make_sampling_grid: spacing exceeds the sampling radius");
    SamplingGrid g;
    g.center = center;
    g.radius = radius;
    g.h = h;
    g.nx = static_cast<int>(std::floor(2.0 * radius / h + 1e-9)) + 1;
    g.ny = g.nx;
    g.mask.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            if (dist(g.point(ix, iy), center) < radius) g.mask[static_cast<std::size_t>(iy) * g.nx + ix] = 1;
    return g;
}

// Randomized emission ring: L sources on the circle of radius R about the
// origin at angles (2pi/L)(l - 1 + beta_l), beta_l ~ U[0, beta], drawn in
// source order from a dedicated sub-stream of the run seed.
struct RandomSourceSet {
    double R = 20.0;
    double beta = 0.1;
    std::uint64_t seed = 0;
    std::vector<double> angles;
    std::vector<Vec2> points;
};

inline RandomSourceSet draw_sources(int L, double R, double beta, std::uint64_t seed) {
    if (L < 1) throw std::invalid_argument("draw_sources: need at least one source");
    if (!(R > 0.0)) throw std::invalid_argument("draw_sources: radius must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("draw_sources: beta out of [0,1]");
    RandomSourceSet s;
    s.R = R;
    s.beta = beta;
    s.seed = seed;
    Rng rng(derive_seed(seed, "sources"));
    s.angles.reserve(L);
    s.points.reserve(L);
    for (int l = 1; l <= L; ++l) {
        const double jitter = beta * rng.uniform01();
        const double th = (2.0 * pi / L) * (l - 1 + jitter);
        s.angles.push_back(th);
        s.points.push_back({R * std::cos(th), R * std::sin(th)});
    }
    return s;
}

} // namespace tdlsm
