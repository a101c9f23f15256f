#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rmkp/util.hpp"

namespace rmkp {

// One point of the spatial frequency plane; xi must be nonzero wherever the
// symbol is evaluated (the lab enforces zero x-mean on all fields).
struct FreqPoint {
  double xi = 0.0;
  double eta = 0.0;
};

// An interacting pair and its output: zeta = zeta1 + zeta2 componentwise.
struct FreqTriple {
  FreqPoint zeta1, zeta2;
  FreqPoint sum() const { return {zeta1.xi + zeta2.xi, zeta1.eta + zeta2.eta}; }
};

// Dispersion relation of the linearized flow: coefficients rotate as
// exp(i t phase(zeta)).
constexpr double phase_formula(double xi, double eta) {
  return xi * xi * xi - (eta * eta + 1.0) / xi;
}

inline double phase(const FreqPoint& p) {
  require(p.xi != 0.0, "phase: xi must be nonzero");
  return phase_formula(p.xi, p.eta);
}

// Distance of a space-time frequency from the characteristic surface.
inline double symbol_lambda(double tau, const FreqPoint& p) { return tau - phase(p); }

// Phase mismatch of an interacting pair: phase(z1) + phase(z2) - phase(z1+z2).
inline double resonance(const FreqTriple& t) {
  const FreqPoint s = t.sum();
  require(t.zeta1.xi != 0.0 && t.zeta2.xi != 0.0 && s.xi != 0.0,
          "resonance: all three xi values must be nonzero");
  return phase(t.zeta1) + phase(t.zeta2) - phase(s);
}

// Closed form of |resonance|. The constant-term numerator is
// xi^2 - xi*xi1 + xi1^2 (equivalently xi1^2 + xi1*xi2 + xi2^2); this is a
// different quantity from region_weight below, and the two must not be mixed.
inline double resonance_magnitude_closed_form(const FreqTriple& t) {
  const FreqPoint s = t.sum();
  const double xi = s.xi, xi1 = t.zeta1.xi, xi2 = t.zeta2.xi;
  const double eta = s.eta, eta1 = t.zeta1.eta;
  const double cross = xi1 * eta - xi * eta1;
  const double num = xi * xi - xi * xi1 + xi1 * xi1;
  return std::abs(3.0 * xi * xi1 * xi2 + cross * cross / (xi * xi1 * xi2) +
                  num / (xi * xi1 * xi2));
}

inline double identity_constant_numerator(double xi, double xi1) {
  return xi * xi - xi * xi1 + xi1 * xi1;
}

// Interaction weight used by the region calculus: w = 3(xi1^2 - xi1 xi2 + xi2^2).
inline double region_weight(double xi1, double xi2) {
  return 3.0 * (xi1 * xi1 - xi1 * xi2 + xi2 * xi2);
}

// Relative defect of the closed form against the directly evaluated mismatch.
inline double resonance_identity_residual(const FreqTriple& t) {
  const double q = resonance(t);
  const double rhs = resonance_magnitude_closed_form(t);
  return std::abs(std::abs(q) - rhs) / std::max(1.0, std::abs(q));
}

// ---- frequency-region calculus -----------------------------------------

// Hard low/high separation threshold 6^7 of the region decomposition.
inline constexpr double kHighFreqThreshold = 279936.0;

struct RegionFlags {
  bool omega0 = false;   // 3|xi1| <= |xi2| and |xi2| >= threshold
  bool omega1 = false;   // |1 - 1/(3 xi1^2 xi2^2)| >= 1/4
  bool omega2 = false;   // complement of omega1 (strict < 1/4)
  bool setA = false;     // |3 xi xi1 xi2| >= (xi1^2 - xi1 xi2 + xi2^2)/|xi xi1 xi2|
  bool setB = false;     // reverse comparison, overlap on equality
  bool regular = false;  // omega0 and omega1
  bool singular = false; // omega0 and omega2
};

inline RegionFlags classify_region(double xi1, double xi2,
                                   double threshold = kHighFreqThreshold) {
  require(xi1 != 0.0 && xi2 != 0.0 && xi1 + xi2 != 0.0,
          "classify_region: xi1, xi2, xi1+xi2 must be nonzero");
  RegionFlags r;
  const double xi = xi1 + xi2;
  r.omega0 = 3.0 * std::abs(xi1) <= std::abs(xi2) && std::abs(xi2) >= threshold;
  const double gap = std::abs(1.0 - 1.0 / (3.0 * xi1 * xi1 * xi2 * xi2));
  r.omega1 = gap >= 0.25;
  r.omega2 = !r.omega1;
  const double cubic = std::abs(3.0 * xi * xi1 * xi2);
  const double recip = (xi1 * xi1 - xi1 * xi2 + xi2 * xi2) / std::abs(xi * xi1 * xi2);
  r.setA = cubic >= recip;
  r.setB = cubic <= recip;
  r.regular = r.omega0 && r.omega1;
  r.singular = r.omega0 && r.omega2;
  return r;
}

// ---- singular-region scaling --------------------------------------------

struct SingularScalingReport {
  std::size_t samples = 0;
  double min_product = 0.0;        // min over samples of |xi1*xi2|
  double max_product = 0.0;
  double min_q = 0.0;              // min of 3 xi1^2 xi2^2
  double max_q = 0.0;
  bool within_enclosure = false;   // product within 3^{-1/2} * [1/c, c], c = sqrt(5/3)
};

// Draw points of the singular region and confirm that |xi1*xi2| is pinned
// near 3^{-1/2}: the defining inequality forces 3 xi1^2 xi2^2 into (4/5, 4/3).
inline SingularScalingReport singular_scaling_check(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SingularScalingReport rep;
  rep.samples = n;
  rep.min_product = 1e300;
  rep.max_product = 0.0;
  rep.min_q = 1e300;
  rep.max_q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi2 = rng.sign() * rng.log_uniform(kHighFreqThreshold, kHighFreqThreshold * 1e3);
    const double q = rng.uniform(0.8 + 1e-12, 4.0 / 3.0 - 1e-12);
    const double xi1 = rng.sign() * std::sqrt(q / 3.0) / std::abs(xi2);
    const RegionFlags f = classify_region(xi1, xi2);
    require(f.singular, "singular_scaling_check: constructed point escaped the region");
    const double prod = std::abs(xi1 * xi2);
    rep.min_product = std::min(rep.min_product, prod);
    rep.max_product = std::max(rep.max_product, prod);
    const double q2 = 3.0 * xi1 * xi1 * xi2 * xi2;
    rep.min_q = std::min(rep.min_q, q2);
    rep.max_q = std::max(rep.max_q, q2);
  }
  const double c = std::sqrt(5.0 / 3.0);
  const double base = 1.0 / std::sqrt(3.0);
  rep.within_enclosure = rep.min_product >= base / c - 1e-15 && rep.max_product <= base * c + 1e-15;
  return rep;
}

// ---- change-of-variables Jacobian ----------------------------------------

struct JacobianSample {
  double xi = 0.0, eta = 0.0, tau = 0.0;  // held fixed
  double xi1 = 0.0, eta1 = 0.0;           // differentiation variables
};

// v = 3 xi xi1 xi2 and u = lambda1 + lambda2 at fixed (xi, eta, tau), with
// zeta2 = zeta - zeta1. The determinant has the closed form
// 6 |xi1^2 - xi2^2| * |eta1/xi1 - eta2/xi2|.
inline double jacobian_closed_form(const JacobianSample& s) {
  const double xi2 = s.xi - s.xi1, eta2 = s.eta - s.eta1;
  require(s.xi1 != 0.0 && xi2 != 0.0 && s.xi != 0.0, "jacobian: xi factors must be nonzero");
  return 6.0 * std::abs(s.xi1 * s.xi1 - xi2 * xi2) *
         std::abs(s.eta1 / s.xi1 - eta2 / xi2);
}

struct JacobianCheck {
  double analytic = 0.0;
  double finite_difference = 0.0;
  double rel_error = 0.0;
};

inline JacobianCheck jacobian_check(const JacobianSample& s, double h = 1e-5) {
  const auto v_of = [&](double x1) { return 3.0 * s.xi * x1 * (s.xi - x1); };
  const auto u_of = [&](double x1, double e1) {
    const FreqPoint p1{x1, e1}, p2{s.xi - x1, s.eta - e1};
    return (s.tau - phase(p1)) + (s.tau - phase(p2));
  };
  const double dv_dx1 = (v_of(s.xi1 + h) - v_of(s.xi1 - h)) / (2 * h);
  const double dv_de1 = 0.0;  // v does not involve eta1
  const double du_dx1 = (u_of(s.xi1 + h, s.eta1) - u_of(s.xi1 - h, s.eta1)) / (2 * h);
  const double du_de1 = (u_of(s.xi1, s.eta1 + h) - u_of(s.xi1, s.eta1 - h)) / (2 * h);
  JacobianCheck out;
  out.analytic = jacobian_closed_form(s);
  out.finite_difference = std::abs(dv_dx1 * du_de1 - dv_de1 * du_dx1);
  out.rel_error = std::abs(out.analytic - out.finite_difference) /
                  std::max(1.0, std::abs(out.analytic));
  return out;
}

}  // namespace rmkp
