#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace thermoscope::cnn_kernels {

// Activations are (h, w, c) row-major with channels contiguous; conv weights
// are (kh, kw, c_in, c_out) with the output channel contiguous so the inner
// loops vectorize. Padding is "same": output extent equals input extent.

template <typename T>
void conv2d_forward(const T* __restrict in, int h, int w, int cin, const T* __restrict wgt,
                    int kh, int kw, int cout, const T* __restrict bias, T* __restrict out) {
    const int pad_t = (kh - 1) / 2;
    const int pad_l = (kw - 1) / 2;
    for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
        T* dst = out + p * cout;
        for (int o = 0; o < cout; ++o) dst[o] = bias[o];
    }
    for (int i = 0; i < h; ++i) {
        for (int di = 0; di < kh; ++di) {
            const int ii = i + di - pad_t;
            if (ii < 0 || ii >= h) continue;
            for (int j = 0; j < w; ++j) {
                T* __restrict dst = out + (static_cast<std::size_t>(i) * w + j) * cout;
                for (int dj = 0; dj < kw; ++dj) {
                    const int jj = j + dj - pad_l;
                    if (jj < 0 || jj >= w) continue;
                    const T* __restrict src = in + (static_cast<std::size_t>(ii) * w + jj) * cin;
                    const T* __restrict wk =
                        wgt + (static_cast<std::size_t>(di) * kw + dj) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const T a = src[ci];
                        const T* __restrict wrow = wk + static_cast<std::size_t>(ci) * cout;
                        for (int o = 0; o < cout; ++o) dst[o] += a * wrow[o];
                    }
                }
            }
        }
    }
}

// Accumulates parameter gradients and (optionally) the input gradient.
// din, when given, must be zero-initialized by the caller; wt_scratch holds
// the transposed weights between calls.
template <typename T>
void conv2d_backward(const T* __restrict in, int h, int w, int cin, const T* __restrict wgt,
                     int kh, int kw, int cout, const T* __restrict dout, T* __restrict din,
                     T* __restrict dwgt, T* __restrict dbias, std::vector<T>& wt_scratch) {
    const int pad_t = (kh - 1) / 2;
    const int pad_l = (kw - 1) / 2;

    for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
        const T* g = dout + p * cout;
        for (int o = 0; o < cout; ++o) dbias[o] += g[o];
    }

    const T* wt = nullptr;
    if (din != nullptr) {
        wt_scratch.resize(static_cast<std::size_t>(kh) * kw * cout * cin);
        for (int di = 0; di < kh; ++di) {
            for (int dj = 0; dj < kw; ++dj) {
                const std::size_t base = (static_cast<std::size_t>(di) * kw + dj) * cin * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    for (int o = 0; o < cout; ++o) {
                        wt_scratch[base + static_cast<std::size_t>(o) * cin + ci] =
                            wgt[base + static_cast<std::size_t>(ci) * cout + o];
                    }
                }
            }
        }
        wt = wt_scratch.data();
    }

    for (int i = 0; i < h; ++i) {
        for (int di = 0; di < kh; ++di) {
            const int ii = i + di - pad_t;
            if (ii < 0 || ii >= h) continue;
            for (int j = 0; j < w; ++j) {
                const T* __restrict g = dout + (static_cast<std::size_t>(i) * w + j) * cout;
                for (int dj = 0; dj < kw; ++dj) {
                    const int jj = j + dj - pad_l;
                    if (jj < 0 || jj >= w) continue;
                    const std::size_t koff = (static_cast<std::size_t>(di) * kw + dj) * cin * cout;
                    const T* __restrict src = in + (static_cast<std::size_t>(ii) * w + jj) * cin;
                    T* __restrict dwk = dwgt + koff;
                    for (int ci = 0; ci < cin; ++ci) {
                        const T a = src[ci];
                        T* __restrict drow = dwk + static_cast<std::size_t>(ci) * cout;
                        for (int o = 0; o < cout; ++o) drow[o] += a * g[o];
                    }
                    if (din != nullptr) {
                        T* __restrict dsrc = din + (static_cast<std::size_t>(ii) * w + jj) * cin;
                        const T* __restrict wk = wt + koff;
                        for (int o = 0; o < cout; ++o) {
                            const T go = g[o];
                            const T* __restrict wrow = wk + static_cast<std::size_t>(o) * cin;
                            for (int ci = 0; ci < cin; ++ci) dsrc[ci] += go * wrow[ci];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

// pool over the time dimension only, window == stride, remainder truncated;
// argmax records the in-window row offset (first index wins ties)
template <typename T>
void maxpool_forward(const T* in, int h, int w, int c, int pool, T* out, int* argmax) {
    const int ho = h / pool;
    for (int io = 0; io < ho; ++io) {
        for (int j = 0; j < w; ++j) {
            for (int k = 0; k < c; ++k) {
                const std::size_t base = (static_cast<std::size_t>(io) * pool * w + j) * c + k;
                T best = in[base];
                int best_r = 0;
                for (int r = 1; r < pool; ++r) {
                    const T v = in[base + static_cast<std::size_t>(r) * w * c];
                    if (v > best) {
                        best = v;
                        best_r = r;
                    }
                }
                out[(static_cast<std::size_t>(io) * w + j) * c + k] = best;
                argmax[(static_cast<std::size_t>(io) * w + j) * c + k] = best_r;
            }
        }
    }
}

template <typename T>
void maxpool_backward(const T* dout, int ho, int w, int c, int pool, const int* argmax,
                      T* din /* zeroed by the caller */) {
    for (int io = 0; io < ho; ++io) {
        for (int j = 0; j < w; ++j) {
            for (int k = 0; k < c; ++k) {
                const std::size_t op = (static_cast<std::size_t>(io) * w + j) * c + k;
                const int r = argmax[op];
                din[(static_cast<std::size_t>(io) * pool + r) * w * c +
                    static_cast<std::size_t>(j) * c + k] += dout[op];
            }
        }
    }
}

template <typename T>
void dense_forward(const T* __restrict in, int n_in, const T* __restrict wgt,
                   const T* __restrict bias, int n_out, T* __restrict out) {
    for (int o = 0; o < n_out; ++o) {
        T acc = bias[o];
        const T* __restrict wrow = wgt + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) acc += wrow[i] * in[i];
        out[o] = acc;
    }
}

template <typename T>
void dense_backward(const T* __restrict in, int n_in, const T* __restrict wgt, int n_out,
                    const T* __restrict dout, T* __restrict din, T* __restrict dwgt,
                    T* __restrict dbias) {
    std::fill(din, din + n_in, T(0));
    for (int o = 0; o < n_out; ++o) {
        const T g = dout[o];
        dbias[o] += g;
        const T* __restrict wrow = wgt + static_cast<std::size_t>(o) * n_in;
        T* __restrict dwrow = dwgt + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) {
            dwrow[i] += g * in[i];
            din[i] += g * wrow[i];
        }
    }
}

}  // namespace thermoscope::cnn_kernels
