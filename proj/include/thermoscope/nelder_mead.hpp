#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace thermoscope {

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
};

// Downhill simplex with the standard reflection/expansion/contraction/shrink
// moves. Deterministic: stops when the best-vertex improvement between sorted
// generations drops below tol, or the evaluation budget runs out.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const std::vector<double>& initial_step, int max_evals,
                                    double tol) {
    const int n = static_cast<int>(x0.size());
    int evals = 0;
    auto eval = [&](const std::vector<double>& p) {
        ++evals;
        return f(p);
    };

    std::vector<std::vector<double>> verts(n + 1, x0);
    for (int i = 0; i < n; ++i) verts[i + 1][i] += initial_step[i];
    std::vector<double> fv(n + 1);
    for (int i = 0; i <= n; ++i) fv[i] = eval(verts[i]);

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

    auto order = [&] {
        std::vector<int> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (int i = 0; i <= n; ++i) {
            v2[i] = verts[idx[i]];
            f2[i] = fv[idx[i]];
        }
        verts.swap(v2);
        fv.swap(f2);
    };

    order();
    double last_best = fv[0];
    int stall = 0;
    while (evals < max_evals) {
        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) centroid[j] += verts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto along = [&](double coeff) {
            std::vector<double> p(n);
            for (int j = 0; j < n; ++j) p[j] = centroid[j] + coeff * (centroid[j] - verts[n][j]);
            return p;
        };

        const auto xr = along(kReflect);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            const auto xe = along(kExpand);
            const double fe = eval(xe);
            if (fe < fr) {
                verts[n] = xe;
                fv[n] = fe;
            } else {
                verts[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            verts[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const auto xc = along(outside ? kContract : -kContract);
            const double fc = eval(xc);
            if (fc < std::min(fr, fv[n])) {
                verts[n] = xc;
                fv[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        verts[i][j] = verts[0][j] + kShrink * (verts[i][j] - verts[0][j]);
                    }
                    fv[i] = eval(verts[i]);
                }
            }
        }
        order();

        if (last_best - fv[0] < tol) {
            if (++stall >= 2 * n) break;
        } else {
            stall = 0;
        }
        last_best = fv[0];
    }

    return {verts[0], fv[0], evals};
}

}  // namespace thermoscope
