#pragma once

// Shared small value types used across the toolkit.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdlsm {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Dense rank-3 array stored row-major as (time, receiver, source); this is
// also the on-disk layout of field records.
struct Tensor3 {
    std::size_t nt = 0, nr = 0, ns = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(std::size_t t, std::size_t r, std::size_t s) : nt(t), nr(r), ns(s), v(t * r * s, 0.0) {}

    double& at(std::size_t t, std::size_t r, std::size_t s) { return v[(t * nr + r) * ns + s]; }
    double at(std::size_t t, std::size_t r, std::size_t s) const { return v[(t * nr + r) * ns + s]; }
    std::size_t size() const { return v.size(); }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace tdlsm
