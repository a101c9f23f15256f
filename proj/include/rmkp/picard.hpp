#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rmkp/grid.hpp"
#include "rmkp/solver.hpp"
#include "rmkp/util.hpp"
#include "rmkp/version.hpp"

namespace rmkp {

// Fixed-point iteration for the integral form of the flow:
//   u = e^{tL} u0 + int_0^t e^{(t-s)L} N(u(s)) ds,  N(u) = -dx(u^2).
// Iterates are stored as fields on nt+1 equispaced time nodes over [0, T].
using TimeNodes = std::vector<SpectralField>;

inline TimeNodes free_nodes(const SpectralField& u0, double T, std::size_t nt) {
  require(nt >= 1, "free_nodes: need at least one interval");
  TimeNodes nodes;
  nodes.reserve(nt + 1);
  for (std::size_t k = 0; k <= nt; ++k)
    nodes.push_back(free_propagate(u0, T * static_cast<double>(k) / static_cast<double>(nt)));
  return nodes;
}

// Duhamel integral of the product term against the free group, node by node.
// Each interval is integrated with the exponential trapezoid rule: with
// x = i dt rate, the contribution at the right endpoint is
//   dt * ( g_k (phi1(x) - phi2(x)) + g_{k+1} phi2(x) ),
// and earlier history is carried forward by e^x. This treats the oscillatory
// factor exactly, so accuracy degrades only with the smoothness of g.
inline TimeNodes duhamel_quadratic(const TimeNodes& u, const TimeNodes& v, double T,
                                   double gamma = 1.0) {
  require(u.size() >= 2 && u.size() == v.size(), "duhamel_quadratic: node mismatch");
  const Grid2D& g = u.front().grid();
  const std::size_t nt = u.size() - 1;
  const double dt = T / static_cast<double>(nt);
  const std::size_t n = g.modes();

  // Source term at each node: -i xi * dealias(FT(u v)), spectrally.
  std::vector<std::vector<cplx>> src;
  src.reserve(nt + 1);
  for (std::size_t k = 0; k <= nt; ++k) {
    require(u[k].grid().same_shape(g) && v[k].grid().same_shape(g),
            "duhamel_quadratic: grid mismatch");
    const std::vector<cplx> pu = transform_to_physical(u[k]);
    const std::vector<cplx> pv = transform_to_physical(v[k]);
    std::vector<cplx> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = pu[i] * pv[i];
    SpectralField sq = transform_to_spectral(g, std::move(prod));
    apply_dealias(sq);
    std::vector<cplx> s(n, 0.0);
    for (std::size_t j = 1; j < g.nx(); ++j) {
      const double xi = g.xi(j);
      for (std::size_t kk = 0; kk < g.ny(); ++kk) {
        const std::size_t id = g.idx(j, kk);
        s[id] = kDuhamelCoefficient * cplx(0.0, xi) * sq.data()[id];
      }
    }
    src.push_back(std::move(s));
  }

  TimeNodes out;
  out.reserve(nt + 1);
  out.emplace_back(g);  // zero at t = 0
  // Per-mode running integral in the interaction picture.
  std::vector<cplx> acc(n, 0.0);
  SpectralField next(g);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 1; j < g.nx(); ++j) {
      const double xi = g.xi(j);
      for (std::size_t kk = 0; kk < g.ny(); ++kk) {
        const std::size_t id = g.idx(j, kk);
        const cplx x = cplx(0.0, dt * multiplier_rate(xi, g.eta(kk), gamma));
        const cplx p2 = phi2(x);
        const cplx contrib = dt * (src[k][id] * (phi1(x) - p2) + src[k + 1][id] * p2);
        acc[id] = std::exp(x) * acc[id] + contrib;
      }
    }
    next.data() = acc;
    out.push_back(next);
  }
  return out;
}

struct PicardReport {
  std::size_t nt = 0;
  std::vector<double> diffs;   // sup-over-nodes L2 distance between successive iterates
  std::vector<double> ratios;  // diffs[k+1] / diffs[k]
  std::optional<SpectralField> final_at_t;
  bool contracting = false;
};

inline double nodes_distance(const TimeNodes& a, const TimeNodes& b) {
  require(a.size() == b.size(), "nodes_distance: node mismatch");
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Grid2D& g = a[k].grid();
    KahanSum s;
    for (std::size_t i = 0; i < g.modes(); ++i)
      s.add(std::norm(a[k].data()[i] - b[k].data()[i]));
    sup = std::max(sup, std::sqrt(s.value() * g.dxi() * g.deta()));
  }
  return sup;
}

// Run a fixed number of Picard iterations on [0, T] and report the
// successive-difference contraction profile.
inline PicardReport picard_iterate(const SpectralField& u0, double T, std::size_t iters,
                                   std::size_t nt, double gamma = 1.0) {
  require(T > 0.0, "picard_iterate: T must be positive");
  require(iters >= 2, "picard_iterate: need at least two iterations");
  PicardReport rep;
  rep.nt = nt;
  const TimeNodes free = free_nodes(u0, T, nt);
  TimeNodes cur = free;
  for (std::size_t it = 0; it < iters; ++it) {
    const TimeNodes duh = duhamel_quadratic(cur, cur, T, gamma);
    TimeNodes nxt = free;
    for (std::size_t k = 0; k < nxt.size(); ++k) {
      std::vector<cplx>& d = nxt[k].data();
      const std::vector<cplx>& a = duh[k].data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += a[i];
    }
    rep.diffs.push_back(nodes_distance(nxt, cur));
    cur = std::move(nxt);
  }
  for (std::size_t k = 0; k + 1 < rep.diffs.size(); ++k) {
    const double den = rep.diffs[k];
    rep.ratios.push_back(den > 0.0 ? rep.diffs[k + 1] / den : 0.0);
  }
  rep.contracting = !rep.ratios.empty();
  for (double r : rep.ratios)
    if (!(r < 0.5)) rep.contracting = false;
  rep.final_at_t = cur.back();
  return rep;
}

// Picard limit with node-count refinement: doubles the time resolution until
// the endpoint field settles to tol or nt_max is reached.
inline SpectralField picard_solution(const SpectralField& u0, double T, std::size_t iters,
                                     double tol = 1e-8, std::size_t nt0 = 16,
                                     std::size_t nt_max = 1024, double gamma = 1.0) {
  PicardReport prev = picard_iterate(u0, T, iters, nt0, gamma);
  for (std::size_t nt = nt0 * 2; nt <= nt_max; nt *= 2) {
    PicardReport cur = picard_iterate(u0, T, iters, nt, gamma);
    const Grid2D& g = u0.grid();
    KahanSum s;
    for (std::size_t i = 0; i < g.modes(); ++i)
      s.add(std::norm(cur.final_at_t->data()[i] - prev.final_at_t->data()[i]));
    const double dist = std::sqrt(s.value() * g.dxi() * g.deta());
    prev = std::move(cur);
    if (dist <= tol) break;
  }
  return *prev.final_at_t;
}

}  // namespace rmkp
