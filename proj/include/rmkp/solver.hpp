#pragma once

#include <cmath>
#include <vector>

#include "rmkp/dispersion.hpp"
#include "rmkp/grid.hpp"
#include "rmkp/util.hpp"
#include "rmkp/version.hpp"

namespace rmkp {

// Model family: gamma = 1 is the rotation-modified equation studied here,
// gamma = 0 removes the mean-rotation term and recovers the plain transverse
// dispersion for side-by-side runs. The nonlinear switch exists so linear
// propagation can be checked against the exact multiplier.
struct ModelParams {
  double gamma = 1.0;
  bool nonlinear = true;
};

// Per-mode linear rate: d/dt coeff = i * rate * coeff, with the x-mean modes
// excluded (they are constrained to zero).
inline double multiplier_rate(double xi, double eta, double gamma) {
  require(xi != 0.0, "multiplier_rate: zero x-frequency");
  static_assert(kPhaseSign > 0, "free evolution must rotate with + phase");
  return xi * xi * xi - (eta * eta + gamma) / xi;
}

struct SolveDiag {
  double t = 0.0;
  double l2 = 0.0;        // spectral-side L2 of the solution
  double linf = 0.0;      // max |u| on the physical grid
  double hamiltonian = 0.0;
  double x_mean_defect = 0.0;  // largest zero-x-frequency coefficient
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  std::vector<SolveDiag> diags;
};

// Energy functional conserved by the flow:
//   H = int( u_x^2/2 - (dx^{-1} u_y)^2/2 - gamma (dx^{-1} u)^2/2 - u^3/3 ).
inline double hamiltonian(const SpectralField& u, double gamma) {
  const Grid2D& g = u.grid();
  KahanSum quad;
  for (std::size_t j = 1; j < g.nx(); ++j) {
    const double xi = g.xi(j);
    for (std::size_t k = 0; k < g.ny(); ++k) {
      const double eta = g.eta(k);
      const double a2 = std::norm(u.at(j, k));
      quad.add(0.5 * (xi * xi - (eta * eta + gamma) / (xi * xi)) * a2);
    }
  }
  const double quad_part = quad.value() * g.dxi() * g.deta();

  const std::vector<cplx> phys = transform_to_physical(u);
  KahanSum cubic;
  for (const cplx& z : phys) cubic.add(z.real() * z.real() * z.real());
  return quad_part - cubic.value() * g.dx() * g.dy() / 3.0;
}

// Fourth-order exponential integrator with the linear part applied exactly.
// The stiff-quotient weights are evaluated as contour means so that nearly
// resonant modes (rate * dt near 0) lose no accuracy.
class Etdrk4 {
 public:
  Etdrk4(const Grid2D& grid, ModelParams params, double dt)
      : g_(grid), prm_(params), dt_(dt) {
    require(dt > 0.0, "Etdrk4: dt must be positive");
    const std::size_t n = g_.modes();
    e_full_.assign(n, 1.0);
    e_half_.assign(n, 1.0);
    q_.assign(n, 0.0);
    f1_.assign(n, 0.0);
    f2_.assign(n, 0.0);
    f3_.assign(n, 0.0);
    constexpr int kContour = 32;
    for (std::size_t j = 1; j < g_.nx(); ++j) {
      const double xi = g_.xi(j);
      for (std::size_t k = 0; k < g_.ny(); ++k) {
        const std::size_t id = g_.idx(j, k);
        const cplx z0 = cplx(0.0, dt_ * multiplier_rate(xi, g_.eta(k), prm_.gamma));
        e_full_[id] = std::exp(z0);
        e_half_[id] = std::exp(0.5 * z0);
        cplx q = 0.0, a = 0.0, b = 0.0, c = 0.0;
        for (int m = 0; m < kContour; ++m) {
          const double th = kTwoPi * (m + 0.5) / kContour;
          const cplx z = z0 + cis(th);
          const cplx ez = std::exp(z), z2 = z * z, z3 = z2 * z;
          q += (std::exp(0.5 * z) - 1.0) / z;
          a += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
          b += (2.0 + z + ez * (-2.0 + z)) / z3;
          c += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        const double scale = dt_ / kContour;
        q_[id] = q * scale;
        f1_[id] = a * scale;
        f2_[id] = b * scale;
        f3_[id] = c * scale;
      }
    }
  }

  double dt() const { return dt_; }
  const Grid2D& grid() const { return g_; }

  // One full step in place.
  void step(SpectralField& u) const {
    require(u.grid().same_shape(g_), "Etdrk4::step: grid mismatch");
    const std::size_t n = g_.modes();
    std::vector<cplx>& uc = u.data();
    const std::vector<cplx> nv = nonlinear_term(uc);
    std::vector<cplx> av(n), bv(n), cv(n);
    for (std::size_t i = 0; i < n; ++i) av[i] = e_half_[i] * uc[i] + q_[i] * nv[i];
    const std::vector<cplx> nav = nonlinear_term(av);
    for (std::size_t i = 0; i < n; ++i) bv[i] = e_half_[i] * uc[i] + q_[i] * nav[i];
    const std::vector<cplx> nbv = nonlinear_term(bv);
    for (std::size_t i = 0; i < n; ++i)
      cv[i] = e_half_[i] * av[i] + q_[i] * (2.0 * nbv[i] - nv[i]);
    const std::vector<cplx> ncv = nonlinear_term(cv);
    for (std::size_t i = 0; i < n; ++i)
      uc[i] = e_full_[i] * uc[i] + f1_[i] * nv[i] + 2.0 * f2_[i] * (nav[i] + nbv[i]) +
              f3_[i] * ncv[i];
  }

  // d/dt contribution of the quadratic term: -i xi * dealias(FT(u^2)),
  // evaluated from spectral coefficients and returned spectrally.
  std::vector<cplx> nonlinear_term(const std::vector<cplx>& coeffs) const {
    const std::size_t n = g_.modes();
    std::vector<cplx> out(n, 0.0);
    if (!prm_.nonlinear) return out;
    SpectralField tmp(g_);
    tmp.data() = coeffs;
    std::vector<cplx> phys = transform_to_physical(tmp);
    for (cplx& z : phys) z = z * z;
    SpectralField sq = transform_to_spectral(g_, std::move(phys));
    apply_dealias(sq);
    for (std::size_t j = 1; j < g_.nx(); ++j) {
      const double xi = g_.xi(j);
      for (std::size_t k = 0; k < g_.ny(); ++k) {
        const std::size_t id = g_.idx(j, k);
        out[id] = kDuhamelCoefficient * cplx(0.0, xi) * sq.data()[id];
      }
    }
    return out;
  }

 private:
  Grid2D g_;
  ModelParams prm_;
  double dt_;
  std::vector<cplx> e_full_, e_half_, q_, f1_, f2_, f3_;
};

inline SolveDiag make_diag(const SpectralField& u, double t, double gamma) {
  SolveDiag d;
  d.t = t;
  d.l2 = u.l2();
  d.hamiltonian = hamiltonian(u, gamma);
  const std::vector<cplx> phys = transform_to_physical(u);
  double mx = 0.0;
  for (const cplx& z : phys) mx = std::max(mx, std::abs(z.real()));
  d.linf = mx;
  double defect = 0.0;
  for (std::size_t k = 0; k < u.grid().ny(); ++k)
    defect = std::max(defect, std::abs(u.at(0, k)));
  d.x_mean_defect = defect;
  return d;
}

// Integrate from t0 to t1 in nsteps equal steps, recording snapshots and
// diagnostics at every sample_every-th step (and always at both ends).
inline Trajectory solve_rmkp(const SpectralField& u0, ModelParams prm, double t0, double t1,
                             std::size_t nsteps, std::size_t sample_every = 0) {
  require(t1 > t0, "solve_rmkp: empty time interval");
  require(nsteps >= 1, "solve_rmkp: need at least one step");
  if (sample_every == 0) sample_every = nsteps;  // endpoints only
  const double dt = (t1 - t0) / static_cast<double>(nsteps);
  const Etdrk4 stepper(u0.grid(), prm, dt);
  Trajectory traj;
  SpectralField u = u0;
  traj.times.push_back(t0);
  traj.snapshots.push_back(u);
  traj.diags.push_back(make_diag(u, t0, prm.gamma));
  for (std::size_t k = 1; k <= nsteps; ++k) {
    stepper.step(u);
    if (k % sample_every == 0 || k == nsteps) {
      const double t = t0 + dt * static_cast<double>(k);
      traj.times.push_back(t);
      traj.snapshots.push_back(u);
      traj.diags.push_back(make_diag(u, t, prm.gamma));
    }
  }
  return traj;
}

// Exact free propagation of spectral data by time t (reference for the
// linear-path check and the contraction-map limit).
inline SpectralField free_propagate(const SpectralField& u0, double t, double gamma = 1.0) {
  SpectralField u = u0;
  const Grid2D& g = u0.grid();
  for (std::size_t j = 1; j < g.nx(); ++j) {
    const double xi = g.xi(j);
    for (std::size_t k = 0; k < g.ny(); ++k)
      u.at(j, k) *= cis(t * multiplier_rate(xi, g.eta(k), gamma));
  }
  return u;
}

}  // namespace rmkp
