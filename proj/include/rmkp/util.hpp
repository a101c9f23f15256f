#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmkp {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Japanese bracket in the sharp form 1 + |x| used throughout the lab.
inline double bracket(double x) { return 1.0 + std::abs(x); }

inline cplx cis(double theta) { return {std::cos(theta), std::sin(theta)}; }

// (exp(i a) - 1) / (i a), continuous at a = 0. Series guards cancellation.
inline cplx cis_ratio(double a) {
  if (std::abs(a) < 1e-4) {
    const double a2 = a * a;
    return {a * 0.5 - a * a2 / 24.0, 1.0 - a2 / 6.0};
  }
  return cplx(std::sin(a), 1.0 - std::cos(a)) / a;
}

// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 for complex z,
// series fallback near zero keeps both accurate to machine precision.
inline cplx phi1(cplx z) {
  if (std::abs(z) < 1e-3) {
    return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  }
  return (std::exp(z) - 1.0) / z;
}

inline cplx phi2(cplx z) {
  if (std::abs(z) < 1e-3) {
    return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

// Deterministic RNG: fixed engine plus hand-rolled mappings so that streams
// depend only on the seed, never on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64; passes through distinct well-mixed words per call.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double log_uniform(double a, double b) {
    return std::exp(uniform(std::log(a), std::log(b)));
  }

  int sign() { return (next_u64() & 1u) ? 1 : -1; }

  std::uint64_t index(std::uint64_t n) { return next_u64() % n; }

  // Marsaglia polar method with the deterministic uniform above.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  cplx unit_complex() {
    const double th = uniform(0.0, kTwoPi);
    return cis(th);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Least-squares slope of y against x; the sweep fits use log-log pairs.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_slope: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  require(den > 0, "fit_slope: degenerate abscissae");
  return num / den;
}

}  // namespace rmkp
