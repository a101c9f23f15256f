#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkp/fft.hpp"
#include "rmkp/util.hpp"

namespace rmkp {

// Doubly periodic rectangle [0,lx) x [0,ly) with power-of-two sampling.
// Frequency lattices are xi_j = (2*pi/lx)*j and eta_k = (2*pi/ly)*k with
// signed indices in FFT ordering. Immutable after construction.
class Grid2D {
 public:
  Grid2D(std::size_t nx, std::size_t ny, double lx, double ly)
      : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
    require(is_pow2(nx) && is_pow2(ny) && nx >= 4 && ny >= 4,
            "Grid2D: nx, ny must be powers of two >= 4");
    require(lx > 0 && ly > 0, "Grid2D: lx, ly must be positive");
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  std::size_t modes() const { return nx_ * ny_; }

  double dx() const { return lx_ / static_cast<double>(nx_); }
  double dy() const { return ly_ / static_cast<double>(ny_); }
  double dxi() const { return kTwoPi / lx_; }
  double deta() const { return kTwoPi / ly_; }

  // Signed mode number for an FFT-ordered index.
  long sx(std::size_t j) const {
    return j < nx_ / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(nx_);
  }
  long sy(std::size_t k) const {
    return k < ny_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(ny_);
  }
  double xi(std::size_t j) const { return dxi() * static_cast<double>(sx(j)); }
  double eta(std::size_t k) const { return deta() * static_cast<double>(sy(k)); }

  std::size_t idx(std::size_t j, std::size_t k) const { return j * ny_ + k; }

  bool same_shape(const Grid2D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && lx_ == o.lx_ && ly_ == o.ly_;
  }

 private:
  std::size_t nx_, ny_;
  double lx_, ly_;
};

inline Grid2D make_grid(std::size_t nx, std::size_t ny, double lx, double ly) {
  return Grid2D(nx, ny, lx, ly);
}

// Spectral coefficients in continuum units: coeffs(j,k) approximates the
// unitary Fourier transform of the field at (xi_j, eta_k), so lattice sums
// weighted by dxi*deta reproduce integral norms exactly (discrete Parseval).
// Invariant: the xi = 0 row is identically zero (zero x-mean), enforced at
// every ingestion point so 1/xi symbols stay finite.
class SpectralField {
 public:
  explicit SpectralField(const Grid2D& grid) : grid_(grid), c_(grid.modes(), cplx(0, 0)) {}

  const Grid2D& grid() const { return grid_; }
  cplx& at(std::size_t j, std::size_t k) { return c_[grid_.idx(j, k)]; }
  cplx at(std::size_t j, std::size_t k) const { return c_[grid_.idx(j, k)]; }
  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  void enforce_zero_x_mean() {
    for (std::size_t k = 0; k < grid_.ny(); ++k) c_[grid_.idx(0, k)] = 0.0;
  }

  bool has_zero_x_mean() const {
    for (std::size_t k = 0; k < grid_.ny(); ++k)
      if (c_[grid_.idx(0, k)] != cplx(0, 0)) return false;
    return true;
  }

  // Hermitian symmetry check for fields representing real functions.
  double hermitian_defect() const {
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    double worst = 0.0, scale = 0.0;
    for (const auto& v : c_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      const std::size_t jn = (nx - j) % nx;
      for (std::size_t k = 0; k < ny; ++k) {
        const std::size_t kn = (ny - k) % ny;
        const cplx d = c_[grid_.idx(j, k)] - std::conj(c_[grid_.idx(jn, kn)]);
        worst = std::max(worst, std::abs(d));
      }
    }
    return worst / scale;
  }

  double l2() const {
    KahanSum s;
    for (const auto& v : c_) s.add(std::norm(v));
    return std::sqrt(s.value() * grid_.dxi() * grid_.deta());
  }

 private:
  Grid2D grid_;
  std::vector<cplx> c_;
};

// Physical samples u(x_a, y_b) on the grid, row-major a * ny + b.
inline std::vector<cplx> transform_to_physical(const SpectralField& f) {
  const Grid2D& g = f.grid();
  std::vector<cplx> v = f.data();
  fft2_inplace(v, g.nx(), g.ny(), /*inverse=*/true);
  const double scale = g.dxi() * g.deta() / kTwoPi;
  for (auto& z : v) z *= scale;
  return v;
}

// Ingest physical samples; projects away any x-mean so the field invariant
// holds regardless of input.
inline SpectralField transform_to_spectral(const Grid2D& g, std::vector<cplx> samples) {
  require(samples.size() == g.modes(), "transform_to_spectral: sample count mismatch");
  fft2_inplace(samples, g.nx(), g.ny(), /*inverse=*/false);
  SpectralField f(g);
  const double scale = g.lx() * g.ly() / (kTwoPi * static_cast<double>(g.modes()));
  for (std::size_t i = 0; i < samples.size(); ++i) f.data()[i] = samples[i] * scale;
  f.enforce_zero_x_mean();
  return f;
}

inline SpectralField transform_to_spectral(const Grid2D& g, const std::vector<double>& samples) {
  require(samples.size() == g.modes(), "transform_to_spectral: sample count mismatch");
  std::vector<cplx> v(samples.begin(), samples.end());
  return transform_to_spectral(g, std::move(v));
}

// Physical-space L2 norm via lattice quadrature; equals SpectralField::l2()
// for consistent data (discrete Parseval).
inline double physical_l2(const Grid2D& g, const std::vector<cplx>& samples) {
  require(samples.size() == g.modes(), "physical_l2: sample count mismatch");
  KahanSum s;
  for (const auto& v : samples) s.add(std::norm(v));
  return std::sqrt(s.value() * g.dx() * g.dy());
}

// Two-thirds rule: zero every mode with |j| > nx/3 or |k| > ny/3.
inline void apply_dealias(SpectralField& f) {
  const Grid2D& g = f.grid();
  const long jcut = static_cast<long>(g.nx()) / 3;
  const long kcut = static_cast<long>(g.ny()) / 3;
  for (std::size_t j = 0; j < g.nx(); ++j)
    for (std::size_t k = 0; k < g.ny(); ++k)
      if (std::labs(g.sx(j)) > jcut || std::labs(g.sy(k)) > kcut) f.at(j, k) = 0.0;
}

inline SpectralField derivative_x(const SpectralField& f) {
  SpectralField out = f;
  const Grid2D& g = f.grid();
  for (std::size_t j = 0; j < g.nx(); ++j)
    for (std::size_t k = 0; k < g.ny(); ++k)
      out.at(j, k) = f.at(j, k) * cplx(0.0, g.xi(j));
  return out;
}

// Inverse x-derivative; relies on the zero-x-mean invariant.
inline SpectralField antiderivative_x(const SpectralField& f) {
  require(f.has_zero_x_mean(), "antiderivative_x: field must have zero x-mean");
  SpectralField out = f;
  const Grid2D& g = f.grid();
  for (std::size_t j = 1; j < g.nx(); ++j)
    for (std::size_t k = 0; k < g.ny(); ++k)
      out.at(j, k) = f.at(j, k) / cplx(0.0, g.xi(j));
  return out;
}

// ---- field container I/O ----------------------------------------------
// Self-describing JSON: grid metadata plus interleaved re,im pairs in
// row-major FFT index order. Documented in the repository README.

inline nlohmann::json field_to_json(const SpectralField& f) {
  const Grid2D& g = f.grid();
  nlohmann::json j;
  j["format"] = "rmkp-spectral-field";
  j["version"] = 1;
  j["grid"] = {{"nx", g.nx()}, {"ny", g.ny()}, {"lx", g.lx()}, {"ly", g.ly()}};
  j["layout"] = "coeff[j*ny+k], fft index order, interleaved re,im";
  std::vector<double> data;
  data.reserve(2 * f.data().size());
  for (const auto& z : f.data()) {
    data.push_back(z.real());
    data.push_back(z.imag());
  }
  j["data"] = std::move(data);
  return j;
}

inline SpectralField field_from_json(const nlohmann::json& j) {
  require(j.value("format", "") == std::string("rmkp-spectral-field"),
          "field_from_json: unrecognized format tag");
  const auto& gj = j.at("grid");
  Grid2D g(gj.at("nx").get<std::size_t>(), gj.at("ny").get<std::size_t>(),
           gj.at("lx").get<double>(), gj.at("ly").get<double>());
  const auto data = j.at("data").get<std::vector<double>>();
  require(data.size() == 2 * g.modes(), "field_from_json: data length mismatch");
  SpectralField f(g);
  for (std::size_t i = 0; i < g.modes(); ++i) f.data()[i] = cplx(data[2 * i], data[2 * i + 1]);
  f.enforce_zero_x_mean();
  return f;
}

inline void save_field(const SpectralField& f, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "save_field: cannot open " + path);
  out << field_to_json(f).dump();
}

inline SpectralField load_field(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "load_field: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return field_from_json(j);
}

}  // namespace rmkp
