#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "levykit/common.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Iterative radix-2 complex FFT, power-of-two sizes.  dir=+1 applies
// e^{+2 pi i jk/N}, dir=-1 the conjugate; no normalisation.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::complex<double>>& twiddles(std::size_t n, int dir) {
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<std::vector<std::complex<double>>>>
        cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    auto key = std::make_pair(n, dir);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto tw = std::make_shared<std::vector<std::complex<double>>>(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            (*tw)[k] = std::polar(1.0, dir * 2.0 * pi * static_cast<double>(k) /
                                           static_cast<double>(n));
        it = cache.emplace(key, std::move(tw)).first;
    }
    return *it->second;
}

}  // namespace detail

inline void fft_pow2(std::complex<double>* a, std::size_t n, int dir) {
    if (n < 2) return;
    if ((n & (n - 1)) != 0) throw InvalidArgument("fft_pow2: size must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = detail::twiddles(n, dir);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = tw[k * stride];
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// n-dimensional transform over a cube of side N (row-major, last axis
// fastest).  Lines along each axis are transformed independently; strided
// axes gather into a scratch buffer.
// ---------------------------------------------------------------------------

inline void fft_nd(std::vector<std::complex<double>>& a, int dim, std::size_t n, int dir,
                   int threads = 0) {
    if (threads <= 0) threads = default_threads();
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= n;
    if (a.size() != total) throw InvalidArgument("fft_nd: size mismatch");
    (void)detail::twiddles(n, dir);  // build table outside the parallel region

    for (int axis = 0; axis < dim; ++axis) {
        // stride between consecutive elements along `axis`
        std::size_t stride = 1;
        for (int d = axis + 1; d < dim; ++d) stride *= n;
        std::size_t lines = total / n;
        parallel_for(lines, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<std::complex<double>> scratch(stride == 1 ? 0 : n);
            for (std::size_t line = lo; line < hi; ++line) {
                // map line index to the base offset of this 1-D line
                std::size_t inner = line % stride;
                std::size_t outer = line / stride;
                std::size_t base = outer * stride * n + inner;
                if (stride == 1) {
                    fft_pow2(&a[base], n, dir);
                } else {
                    for (std::size_t k = 0; k < n; ++k) scratch[k] = a[base + k * stride];
                    fft_pow2(scratch.data(), n, dir);
                    for (std::size_t k = 0; k < n; ++k) a[base + k * stride] = scratch[k];
                }
            }
        });
    }
}

}  // namespace levykit
