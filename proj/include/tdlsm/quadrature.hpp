#pragma once

// Gauss-Legendre quadrature with panel subdivision. Nodes and weights are
// computed once per order by Newton iteration on the Legendre polynomial,
// which is deterministic and accurate to machine precision.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tdlsm/common.hpp"

namespace tdlsm {

struct GaussRule {
    std::vector<double> nodes;   // on (-1, 1)
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Evaluate P_n(x) and P_n'(x) by upward recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

template <typename F>
double integrate_panel(const GaussRule& rule, F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(c + h * rule.nodes[i]);
    return h * sum;
}

template <typename F>
cplx integrate_panel_c(const GaussRule& rule, F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(c + h * rule.nodes[i]);
    return h * sum;
}

// Integrate by splitting [a, b] into uniform panels and doubling the panel
// count until two successive refinements agree to rtol (relative to the
// larger magnitude, with an absolute floor). Throws if no convergence.
template <typename Value, typename F>
Value integrate_adaptive(F&& f, double a, double b, double rtol, double afloor = 1e-300) {
    static const GaussRule rule = gauss_legendre(16);
    Value prev{};
    bool have_prev = false;
    for (int panels = 1; panels <= 4096; panels *= 2) {
        Value sum{};
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = a + p * h, hi = (p + 1 == panels) ? b : a + (p + 1) * h;
            const double c = 0.5 * (lo + hi), hh = 0.5 * (hi - lo);
            Value part{};
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                part += rule.weights[i] * f(c + hh * rule.nodes[i]);
            sum += hh * part;
        }
        if (have_prev) {
            const double scale = std::max(std::abs(prev), std::abs(sum));
            if (std::abs(sum - prev) <= std::max(rtol * scale, afloor)) return sum;
        }
        prev = sum;
        have_prev = true;
    }
    throw std::runtime_error("integrate_adaptive: quadrature did not stabilize");
}

} // namespace tdlsm
