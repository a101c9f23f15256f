#pragma once

#include <functional>
#include <vector>

#include "rmkp/dispersion.hpp"
#include "rmkp/grid.hpp"

namespace rmkp {

// Anisotropic Sobolev norm: lattice quadrature of
// <xi>^{2 s1} <eta>^{2 s2} |coeff|^2 with the sharp bracket 1 + |.|.
inline double sobolev_norm(const SpectralField& f, double s1, double s2) {
  const Grid2D& g = f.grid();
  KahanSum sum;
  for (std::size_t j = 1; j < g.nx(); ++j) {
    const double wx = std::pow(bracket(g.xi(j)), 2.0 * s1);
    for (std::size_t k = 0; k < g.ny(); ++k) {
      const double wy = std::pow(bracket(g.eta(k)), 2.0 * s2);
      sum.add(wx * wy * std::norm(f.at(j, k)));
    }
  }
  return std::sqrt(sum.value() * g.dxi() * g.deta());
}

struct NormSpec {
  double s1 = 0.0;
  double s2 = 0.0;
  double b = 0.0;
  double sigma = 0.0;
};

// Smooth time cutoff: 1 on [-1, 1], supported in [-2, 2].
inline double window_bump(double t) {
  const double u = 2.0 - std::abs(t);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const auto h = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  return h(u) / (h(u) + h(1.0 - u));
}

// Time-sampled spectral path on [t0, t1): values[i] holds the 2D spectral
// coefficients at t_i = t0 + i*dt. The time axis is treated as periodic of
// span t1 - t0, so content must be supported well inside the span before
// modulation norms are meaningful; apply_window arranges that.
class SpaceTimeField {
 public:
  SpaceTimeField(const Grid2D& grid, double t0, double t1, std::size_t nt)
      : grid_(grid), t0_(t0), t1_(t1), nt_(nt),
        values_(nt, std::vector<cplx>(grid.modes(), cplx(0, 0))) {
    require(is_pow2(nt) && nt >= 4, "SpaceTimeField: nt must be a power of two >= 4");
    require(t1 > t0, "SpaceTimeField: empty time span");
  }

  const Grid2D& grid() const { return grid_; }
  std::size_t nt() const { return nt_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double span() const { return t1_ - t0_; }
  double dt() const { return span() / static_cast<double>(nt_); }
  double time(std::size_t i) const { return t0_ + dt() * static_cast<double>(i); }
  double dtau() const { return kTwoPi / span(); }
  double tau(std::size_t m) const {
    const long sm = m < nt_ / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(nt_);
    return dtau() * static_cast<double>(sm);
  }

  std::vector<cplx>& slice(std::size_t i) { return values_[i]; }
  const std::vector<cplx>& slice(std::size_t i) const { return values_[i]; }

  // Free linear evolution of initial data under exp(i t rate(xi, eta)).
  static SpaceTimeField free_evolution(
      const SpectralField& u0, double t0, double t1, std::size_t nt,
      const std::function<double(double, double)>& rate = phase_formula) {
    SpaceTimeField stf(u0.grid(), t0, t1, nt);
    const Grid2D& g = u0.grid();
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = stf.time(i);
      auto& s = stf.slice(i);
      for (std::size_t j = 1; j < g.nx(); ++j)
        for (std::size_t k = 0; k < g.ny(); ++k)
          s[g.idx(j, k)] = u0.at(j, k) * cis(t * rate(g.xi(j), g.eta(k)));
    }
    return stf;
  }

  // Multiply samples by the smooth cutoff at scale tscale.
  void apply_window(double tscale = 1.0) {
    for (std::size_t i = 0; i < nt_; ++i) {
      const double w = window_bump(time(i) / tscale);
      for (auto& v : values_[i]) v *= w;
    }
  }

 private:
  Grid2D grid_;
  double t0_, t1_;
  std::size_t nt_;
  std::vector<std::vector<cplx>> values_;
};

// Modulation-weighted space-time norm. Weight per 3D lattice point:
// <xi>^{s1+sigma} |xi|^{-sigma} <eta>^{s2} <tau - phase>^{b}; coefficients are
// the time-DFT of the sampled path in continuum units, and the value is the
// weighted lattice L2 over (tau, xi, eta).
inline double bourgain_norm(const SpaceTimeField& u, const NormSpec& spec) {
  const Grid2D& g = u.grid();
  const std::size_t nt = u.nt();
  const FftPlan& plan = plan_for(nt);
  const double tscale = u.span() / (static_cast<double>(nt) * std::sqrt(kTwoPi));
  std::vector<cplx> line(nt);
  KahanSum sum;
  for (std::size_t j = 1; j < g.nx(); ++j) {
    const double xi = g.xi(j);
    const double wx = std::pow(bracket(xi), spec.s1 + spec.sigma) *
                      std::pow(std::abs(xi), -spec.sigma);
    for (std::size_t k = 0; k < g.ny(); ++k) {
      const double eta = g.eta(k);
      const double wxy = wx * std::pow(bracket(eta), spec.s2);
      if (wxy == 0.0) continue;
      for (std::size_t i = 0; i < nt; ++i) line[i] = u.slice(i)[g.idx(j, k)];
      plan.run(line.data(), /*inverse=*/false);
      const double ph = phase_formula(xi, eta);
      for (std::size_t m = 0; m < nt; ++m) {
        const double lam = u.tau(m) - ph;
        const double w = wxy * std::pow(bracket(lam), spec.b);
        sum.add(w * w * std::norm(line[m] * tscale));
      }
    }
  }
  return std::sqrt(sum.value() * u.dtau() * g.dxi() * g.deta());
}

// Space-time L4 norm of the physical-space samples.
inline double spacetime_l4(const SpaceTimeField& u) {
  const Grid2D& g = u.grid();
  KahanSum sum;
  for (std::size_t i = 0; i < u.nt(); ++i) {
    SpectralField f(g);
    f.data() = u.slice(i);
    const auto phys = transform_to_physical(f);
    for (const auto& v : phys) {
      const double a2 = std::norm(v);
      sum.add(a2 * a2);
    }
  }
  return std::pow(sum.value() * g.dx() * g.dy() * u.dt(), 0.25);
}

// Space-time L2 norm computed directly from the samples (no time DFT).
inline double spacetime_l2(const SpaceTimeField& u) {
  const Grid2D& g = u.grid();
  KahanSum sum;
  for (std::size_t i = 0; i < u.nt(); ++i)
    for (const auto& v : u.slice(i)) sum.add(std::norm(v));
  return std::sqrt(sum.value() * g.dxi() * g.deta() * u.dt());
}

// ---- p-variation ----------------------------------------------------------

// Strongest p-variation over ordered sub-selections of the samples:
// sup over i_0 < ... < i_K of (sum ||v_{i_j} - v_{i_{j-1}}||^p)^{1/p}.
// Exact dynamic program, O(n^2) distance evaluations.
template <typename Sample, typename DiffNorm>
double pvariation_norm(const std::vector<Sample>& samples, double p, DiffNorm diff) {
  require(p >= 1.0, "pvariation_norm: p must be >= 1");
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  std::vector<double> best(n, 0.0);  // best chain sum ending at index i
  double answer = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double step = std::pow(diff(samples[j], samples[i]), p);
      best[i] = std::max(best[i], best[j] + step);
    }
    answer = std::max(answer, best[i]);
  }
  return std::pow(answer, 1.0 / p);
}

inline double pvariation_norm(const std::vector<std::vector<double>>& samples, double p) {
  return pvariation_norm(samples, p, [](const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "pvariation_norm: sample length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  });
}

inline double pvariation_norm(const std::vector<SpectralField>& samples, double p) {
  return pvariation_norm(samples, p, [](const SpectralField& a, const SpectralField& b) {
    require(a.grid().same_shape(b.grid()), "pvariation_norm: grid mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < a.data().size(); ++i) s.add(std::norm(a.data()[i] - b.data()[i]));
    return std::sqrt(s.value() * a.grid().dxi() * a.grid().deta());
  });
}

}  // namespace rmkp
