#include "thermoscope/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace thermoscope::fft {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey. Twiddles are cached per size; the cache is
// thread-local so concurrent transforms need no locking.
void fft_pow2(std::vector<cdouble>& x, bool invert) {
    const std::size_t n = x.size();
    if (n < 2) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    struct TwiddleCache {
        std::size_t n = 0;
        std::vector<cdouble> w;  // w[k] = exp(-2*pi*i*k/n), k < n/2
    };
    thread_local TwiddleCache cache;
    if (cache.n != n) {
        cache.n = n;
        cache.w.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            cache.w[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble w = cache.w[k * stride];
                if (invert) w = std::conj(w);
                const cdouble u = x[i + k];
                const cdouble v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

// Bluestein's chirp-z transform reduces an arbitrary-length DFT to a
// power-of-two circular convolution.
void fft_bluestein(std::vector<cdouble>& x, bool invert) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n - 1);

    std::vector<cdouble> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small for large k
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = {std::cos(ang), invert ? std::sin(ang) : -std::sin(ang)};
    }

    std::vector<cdouble> a(m, cdouble{0.0, 0.0});
    std::vector<cdouble> b(m, cdouble{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * scale * chirp[k];
}

void transform(std::vector<cdouble>& x, bool invert) {
    if (x.empty()) return;
    if (is_pow2(x.size())) {
        fft_pow2(x, invert);
    } else {
        fft_bluestein(x, invert);
    }
    if (invert) {
        const double scale = 1.0 / static_cast<double>(x.size());
        for (auto& v : x) v *= scale;
    }
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void forward(std::vector<cdouble>& x) { transform(x, false); }

void inverse(std::vector<cdouble>& x) { transform(x, true); }

std::vector<double> analytic_envelope(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) throw std::invalid_argument("analytic_envelope: need at least 4 samples");

    std::vector<cdouble> spec(x.begin(), x.end());
    forward(spec);

    // one-sided spectrum weights: keep DC (and Nyquist for even n), double
    // the positive bins, zero the negative ones
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
    for (std::size_t k = half + 1; k < n; ++k) spec[k] = 0.0;

    inverse(spec);
    std::vector<double> env(n);
    for (std::size_t k = 0; k < n; ++k) env[k] = std::abs(spec[k]);
    return env;
}

std::vector<double> xcorr_nonneg(std::span<const double> x, std::span<const double> e) {
    const std::size_t nx = x.size();
    const std::size_t ne = e.size();
    if (nx == 0 || ne == 0) throw std::invalid_argument("xcorr_nonneg: empty input");

    const std::size_t m = next_pow2(nx + ne - 1);
    std::vector<cdouble> fx(m, cdouble{0.0, 0.0});
    std::vector<cdouble> fe(m, cdouble{0.0, 0.0});
    for (std::size_t k = 0; k < nx; ++k) fx[k] = x[k];
    for (std::size_t k = 0; k < ne; ++k) fe[k] = e[k];
    forward(fx);
    forward(fe);
    for (std::size_t k = 0; k < m; ++k) fx[k] *= std::conj(fe[k]);
    inverse(fx);

    std::vector<double> r(nx);
    for (std::size_t k = 0; k < nx; ++k) r[k] = fx[k].real();
    return r;
}

}  // namespace thermoscope::fft
