#pragma once

#include <map>
#include <memory>
#include <vector>

#include "rmkp/util.hpp"

namespace rmkp {

// Iterative radix-2 complex FFT. Power-of-two sizes only; the transform is
// unnormalized in both directions and callers apply their own scaling.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    require(is_pow2(n) && n >= 2, "FftPlan: size must be a power of two >= 2");
    rev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t(1) << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
      rev_[i] = r;
    }
    fwd_.resize(n / 2);
    inv_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double th = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      fwd_[k] = cis(th);
      inv_[k] = std::conj(fwd_[k]);
    }
  }

  std::size_t size() const { return n_; }

  // In-place transform of n contiguous values; inverse = conjugate twiddles,
  // no 1/n factor.
  void run(cplx* data, bool inverse) const {
    const auto& tw = inverse ? inv_ : fwd_;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = rev_[i];
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const cplx w = tw[k * step];
          const cplx u = data[i + k];
          const cplx v = data[i + k + half] * w;
          data[i + k] = u + v;
          data[i + k + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<cplx> fwd_, inv_;
};

// Process-wide plan cache; the lab is single threaded by design.
inline const FftPlan& plan_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  return *it->second;
}

inline void fft_inplace(std::vector<cplx>& v, bool inverse) {
  plan_for(v.size()).run(v.data(), inverse);
}

// 2D transform of row-major data[a * ncols + b]: FFT along both axes.
inline void fft2_inplace(std::vector<cplx>& v, std::size_t nrows, std::size_t ncols,
                         bool inverse) {
  require(v.size() == nrows * ncols, "fft2_inplace: size mismatch");
  const FftPlan& prow = plan_for(ncols);
  for (std::size_t a = 0; a < nrows; ++a) prow.run(v.data() + a * ncols, inverse);
  const FftPlan& pcol = plan_for(nrows);
  std::vector<cplx> col(nrows);
  for (std::size_t b = 0; b < ncols; ++b) {
    for (std::size_t a = 0; a < nrows; ++a) col[a] = v[a * ncols + b];
    pcol.run(col.data(), inverse);
    for (std::size_t a = 0; a < nrows; ++a) v[a * ncols + b] = col[a];
  }
}

}  // namespace rmkp
