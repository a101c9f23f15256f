#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "rmkp/util.hpp"

namespace rmkp {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evals = 0;
  bool converged = true;
};

namespace detail {
// 15-point Kronrod extension of 7-point Gauss on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace detail

// One G7K15 panel; returns the K15 value and |K15 - G7| as error proxy.
template <typename F>
std::pair<double, double> gk15_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k15 = 0.0, g7 = 0.0;
  const double fc = f(c);
  k15 += detail::kWgk[7] * fc;
  g7 += detail::kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * detail::kXgk[i];
    const double fs = f(c - dx) + f(c + dx);
    k15 += detail::kWgk[i] * fs;
    if (i % 2 == 1) g7 += detail::kWg[i / 2] * fs;
  }
  return {k15 * h, std::abs(k15 - g7) * h};
}

// Adaptive bisection driven by the Kronrod error proxy. Interval tolerance
// is shared proportionally to length, which is adequate for the bounded
// integrands of this lab.
template <typename F>
QuadResult adaptive_gk(F&& f, double a, double b, double abs_tol, int max_depth = 60) {
  struct Node {
    double a, b, tol;
    int depth;
  };
  QuadResult out;
  if (a == b) return out;
  std::vector<Node> stack{{a, b, abs_tol, 0}};
  KahanSum total, err;
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    const auto [val, e] = gk15_panel(f, n.a, n.b);
    out.evals += 15;
    if (e <= n.tol || n.depth >= max_depth) {
      total.add(val);
      err.add(e);
      if (e > n.tol) out.converged = false;
      continue;
    }
    const double mid = 0.5 * (n.a + n.b);
    stack.push_back({n.a, mid, 0.5 * n.tol, n.depth + 1});
    stack.push_back({mid, n.b, 0.5 * n.tol, n.depth + 1});
  }
  out.value = total.value();
  out.error_estimate = err.value();
  return out;
}

// Adaptive quadrature over [a, b] with geometric pre-splitting away from the
// left edge; suited to long ranges with mass concentrated near a.
template <typename F>
QuadResult adaptive_gk_geometric(F&& f, double a, double b, double abs_tol) {
  require(b > a, "adaptive_gk_geometric: empty range");
  std::vector<double> cuts{a};
  double step = 1.0;
  while (cuts.back() + step < b) {
    cuts.push_back(cuts.back() + step);
    step *= 2.0;
  }
  cuts.push_back(b);
  QuadResult out;
  KahanSum total, err;
  const double tol_piece = abs_tol / static_cast<double>(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadResult r = adaptive_gk(f, cuts[i], cuts[i + 1], tol_piece);
    total.add(r.value);
    err.add(r.error_estimate);
    out.evals += r.evals;
    out.converged = out.converged && r.converged;
  }
  out.value = total.value();
  out.error_estimate = err.value();
  return out;
}

// Integral of h(t)/sqrt(|t - s|) over [s, s + len] (side = +1) or
// [s - len, s] (side = -1) via t = s + side*u^2, which removes the weight
// exactly: the integrand becomes 2 h(s + side u^2).
template <typename F>
QuadResult sqrt_singular_side(F&& h, double s, double len, int side, double abs_tol) {
  require(len >= 0.0, "sqrt_singular_side: negative length");
  if (len == 0.0) return {};
  const double umax = std::sqrt(len);
  return adaptive_gk([&](double u) { return 2.0 * h(s + side * u * u); }, 0.0, umax, abs_tol);
}

// ---- Gauss-Legendre ------------------------------------------------------

struct GlRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Nodes by Newton iteration on the Legendre recurrence; deterministic.
inline const GlRule& gl_rule(std::size_t n) {
  static std::map<std::size_t, GlRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GlRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
        p0 = p1;
        p1 = p2;
      }
      const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (std::size_t j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
      p0 = p1;
      p1 = p2;
    }
    const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

template <typename F>
double composite_gl(F&& f, double a, double b, std::size_t panels, std::size_t order = 8) {
  const GlRule& r = gl_rule(order);
  KahanSum sum;
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double c = lo + 0.5 * h;
    for (std::size_t i = 0; i < order; ++i) sum.add(r.w[i] * f(c + 0.5 * h * r.x[i]));
  }
  return sum.value() * 0.5 * h;
}

struct DoublingResult {
  double value = 0.0;
  bool converged = false;
  std::size_t n_used = 0;
  double last_delta = 0.0;
};

// Doubles a resolution parameter until the result is stable in relative
// terms; evaluator maps n -> value.
inline DoublingResult converge_doubling(const std::function<double(std::size_t)>& eval,
                                        std::size_t n0, double rel_tol,
                                        std::size_t n_max) {
  DoublingResult out;
  double prev = eval(n0);
  for (std::size_t n = n0 * 2; n <= n_max; n *= 2) {
    const double cur = eval(n);
    out.last_delta = std::abs(cur - prev) / std::max(1e-300, std::abs(cur));
    out.value = cur;
    out.n_used = n;
    if (out.last_delta < rel_tol) {
      out.converged = true;
      return out;
    }
    prev = cur;
  }
  return out;
}

}  // namespace rmkp
