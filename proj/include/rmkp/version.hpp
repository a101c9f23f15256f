#pragma once

namespace rmkp {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "rmkp-lab";

// Linear propagator convention: coefficients evolve as exp(+i t m(xi, eta))
// with m derived from the evolution law, m = -beta*xi^3 - (eta^2 + gamma)/xi.
// For the normalized model (beta = -1, gamma = 1) this equals the phase
// function xi^3 - (eta^2 + 1)/xi, so the sign below is +1.
inline constexpr int kPhaseSign = +1;

// Coefficient of the time-integral term in the fixed-point form
// u(t) = W(t)u0 + c * Int_0^t W(t - s) d/dx(u^2)(s) ds, derived from the
// evolution law with unit coefficient on the nonlinearity: c = -1.
inline constexpr double kDuhamelCoefficient = -1.0;

}  // namespace rmkp
