#pragma once

// Independent reference implementations used only by tests. Everything here
// is deliberately brute-force and kept apart from the library code it checks.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracles {

// O(N^2) DFT.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                               static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

// O(N*M) time-domain cross-correlation at non-negative lags.
inline std::vector<double> naive_xcorr(const std::vector<double>& x,
                                       const std::vector<double>& e) {
    std::vector<double> r(x.size(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m + k < x.size() && m < e.size(); ++m) {
            acc += x[m + k] * e[m];
        }
        r[k] = acc;
    }
    return r;
}

// First n_roots positive roots of J0 via bisection on std::cyl_bessel_j.
inline std::vector<double> bessel_j0_roots(int n_roots) {
    std::vector<double> roots;
    for (int n = 1; n <= n_roots; ++n) {
        double lo = (n - 0.75) * std::numbers::pi;
        double hi = (n + 0.25) * std::numbers::pi;
        auto f = [](double x) { return std::cyl_bessel_j(0, x); };
        double flo = f(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((flo < 0) == (fm < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

// Classical series solution for a cylinder initially at t_init whose wall
// jumps to t_wall at time zero: evaluated at radius r, time t.
inline double cylinder_step_response(double r, double t, double radius, double diffusivity,
                                     double t_init, double t_wall, int n_terms = 60) {
    const auto roots = bessel_j0_roots(n_terms);
    double sum = 0.0;
    for (double j0n : roots) {
        const double lambda = j0n / radius;
        sum += 2.0 / (j0n * std::cyl_bessel_j(1, j0n)) * std::cyl_bessel_j(0, lambda * r) *
               std::exp(-diffusivity * lambda * lambda * t);
    }
    return t_wall + (t_init - t_wall) * sum;
}

// Adaptive Simpson quadrature (interval-halving to tolerance).
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 30) {
    auto simpson = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    std::function<double(double, double, double, int)> rec =
        [&](double lo, double hi, double whole, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double left = simpson(lo, mid);
        const double right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
            return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
    };
    return rec(a, b, simpson(a, b), depth);
}

// Brute-force travel-time integral along a chord: n uniform midpoint steps.
inline double brute_force_chord_tof(double x0, double y0, double x1, double y1,
                                    const std::function<double(double)>& speed_at_radius,
                                    long n_steps) {
    const double length = std::hypot(x1 - x0, y1 - y0);
    double sum = 0.0;
    for (long i = 0; i < n_steps; ++i) {
        const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(n_steps);
        const double x = x0 + s * (x1 - x0);
        const double y = y0 + s * (y1 - y0);
        sum += 1.0 / speed_at_radius(std::hypot(x, y));
    }
    return length * sum / static_cast<double>(n_steps);
}

// Six-nested-loop reference convolution, "same" zero padding, layout
// (h, w, c) / weights (kh, kw, cin, cout).
inline std::vector<double> reference_conv2d(const std::vector<double>& in, int h, int w, int cin,
                                            const std::vector<double>& wgt, int kh, int kw,
                                            int cout, const std::vector<double>& bias) {
    const int pad_t = (kh - 1) / 2;
    const int pad_l = (kw - 1) / 2;
    std::vector<double> out(static_cast<std::size_t>(h) * w * cout, 0.0);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            for (int o = 0; o < cout; ++o) {
                double acc = bias[o];
                for (int di = 0; di < kh; ++di) {
                    for (int dj = 0; dj < kw; ++dj) {
                        for (int ci = 0; ci < cin; ++ci) {
                            const int ii = i + di - pad_t;
                            const int jj = j + dj - pad_l;
                            if (ii < 0 || ii >= h || jj < 0 || jj >= w) continue;
                            acc += in[(static_cast<std::size_t>(ii) * w + jj) * cin + ci] *
                                   wgt[((static_cast<std::size_t>(di) * kw + dj) * cin + ci) *
                                           cout +
                                       o];
                        }
                    }
                }
                out[(static_cast<std::size_t>(i) * w + j) * cout + o] = acc;
            }
        }
    }
    return out;
}

}  // namespace oracles
