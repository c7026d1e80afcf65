#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace qdd::detail {

struct SimplexOptions {
    int max_iterations = 500;
    double x_tolerance = 1e-10;  // relative simplex spread per coordinate
    double f_tolerance = 0.0;    // absolute objective spread (0 = ignore)
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Bounded Nelder-Mead simplex search. Candidate points are clamped into the
/// box, so minima on a bound (e.g. damping pinned at zero) are reachable.
/// Deterministic given identical inputs.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                 std::vector<double> x0, const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 const std::vector<double>& initial_step,
                                 const SimplexOptions& options = {}) {
    const std::size_t n = x0.size();
    auto clamp = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    };
    clamp(x0);

    std::vector<std::vector<double>> vertex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        vertex[i + 1][i] += initial_step[i];
        clamp(vertex[i + 1]);
        // A step clamped back onto x0 would collapse the simplex; retreat.
        if (vertex[i + 1][i] == x0[i]) {
            vertex[i + 1][i] -= initial_step[i];
            clamp(vertex[i + 1]);
        }
    }
    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i <= n; ++i) value[i] = objective(vertex[i]);

    SimplexResult result;
    constexpr double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        // Order vertices by objective, best first.
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        {
            std::vector<std::vector<double>> v2(n + 1);
            std::vector<double> f2(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                v2[i] = vertex[order[i]];
                f2[i] = value[order[i]];
            }
            vertex.swap(v2);
            value.swap(f2);
        }

        result.iterations = iter + 1;
        // Convergence: coordinate spread relative to scale, plus optional
        // objective spread.
        bool tight = true;
        for (std::size_t i = 0; i < n && tight; ++i) {
            double lo = vertex[0][i], hi = vertex[0][i];
            for (std::size_t k = 1; k <= n; ++k) {
                lo = std::min(lo, vertex[k][i]);
                hi = std::max(hi, vertex[k][i]);
            }
            const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
            if ((hi - lo) > options.x_tolerance * scale) tight = false;
        }
        if (options.f_tolerance > 0.0 && (value[n] - value[0]) > options.f_tolerance) tight = false;
        if (tight) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += vertex[k][i] / double(n);

        auto along = [&](double coeff) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = centroid[i] + coeff * (centroid[i] - vertex[n][i]);
            clamp(x);
            return x;
        };

        std::vector<double> xr = along(reflect);
        const double fr = objective(xr);
        if (fr < value[0]) {
            std::vector<double> xe = along(expand);
            const double fe = objective(xe);
            if (fe < fr) {
                vertex[n] = std::move(xe);
                value[n] = fe;
            } else {
                vertex[n] = std::move(xr);
                value[n] = fr;
            }
            continue;
        }
        if (fr < value[n - 1]) {
            vertex[n] = std::move(xr);
            value[n] = fr;
            continue;
        }
        // Contract toward the better of worst/reflected.
        if (fr < value[n]) {
            std::vector<double> xc = along(contract);
            const double fc = objective(xc);
            if (fc <= fr) {
                vertex[n] = std::move(xc);
                value[n] = fc;
                continue;
            }
        } else {
            std::vector<double> xc = along(-contract);
            const double fc = objective(xc);
            if (fc < value[n]) {
                vertex[n] = std::move(xc);
                value[n] = fc;
                continue;
            }
        }
        // Shrink toward the best vertex.
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i)
                vertex[k][i] = vertex[0][i] + shrink * (vertex[k][i] - vertex[0][i]);
            clamp(vertex[k]);
            value[k] = objective(vertex[k]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (value[i] < value[best]) best = i;
    result.x = vertex[best];
    result.f = value[best];
    return result;
}

}  // namespace qdd::detail
