#include "kinlim/projection.hpp"

#include <cmath>

namespace kinlim {

namespace {

void cholesky5(std::array<double, 25>& a) {
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[std::size_t(i * 5 + j)];
      for (int k = 0; k < j; ++k)
        s -= a[std::size_t(i * 5 + k)] * a[std::size_t(j * 5 + k)];
      if (i == j) {
        if (s <= 0.0) throw NumericsError("macro basis Gram matrix not SPD");
        a[std::size_t(i * 5 + j)] = std::sqrt(s);
      } else {
        a[std::size_t(i * 5 + j)] = s / a[std::size_t(j * 5 + j)];
      }
    }
    for (int j = i + 1; j < 5; ++j) a[std::size_t(i * 5 + j)] = 0.0;
  }
}

}  // namespace

MacroBasis::MacroBasis(const VelocityGrid& g, const Moments& m)
    : g_(&g), m_(m) {
  const std::size_t N = g.size();
  Vec sm = sqrt_local_maxwellian(g, m);
  const double RT = kRGas * m.T;
  const double c0 = 1.0 / std::sqrt(m.rho);
  const double cu = 1.0 / std::sqrt(kRGas * m.rho * m.T);
  const double cT = 1.0 / std::sqrt(6.0 * m.rho);
  for (auto& c : chi_) c.resize(N);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    double du[3] = {v[0] - m.u[0], v[1] - m.u[1], v[2] - m.u[2]};
    double r2 = du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
    chi_[0][a] = c0 * sm[a];
    for (int i = 0; i < 3; ++i) chi_[std::size_t(1 + i)][a] = cu * du[i] * sm[a];
    chi_[4][a] = cT * (r2 / RT - 3.0) * sm[a];
  }
  const double wt = g.weight();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = det_dot(chi_[std::size_t(i)].data(), chi_[std::size_t(j)].data(), N) * wt;
      chol_[std::size_t(i * 5 + j)] = s;
      chol_[std::size_t(j * 5 + i)] = s;
    }
  cholesky5(chol_);
}

std::array<double, 5> MacroBasis::solve(const std::array<double, 5>& b) const {
  std::array<double, 5> y{}, x{};
  for (int i = 0; i < 5; ++i) {
    double s = b[std::size_t(i)];
    for (int k = 0; k < i; ++k) s -= chol_[std::size_t(i * 5 + k)] * y[std::size_t(k)];
    y[std::size_t(i)] = s / chol_[std::size_t(i * 5 + i)];
  }
  for (int i = 4; i >= 0; --i) {
    double s = y[std::size_t(i)];
    for (int k = i + 1; k < 5; ++k) s -= chol_[std::size_t(k * 5 + i)] * x[std::size_t(k)];
    x[std::size_t(i)] = s / chol_[std::size_t(i * 5 + i)];
  }
  return x;
}

std::array<double, 5> MacroBasis::coeffs(const double* f) const {
  const std::size_t N = g_->size();
  const double wt = g_->weight();
  std::array<double, 5> b{};
  for (int a = 0; a < 5; ++a)
    b[std::size_t(a)] = det_dot(f, chi_[std::size_t(a)].data(), N) * wt;
  return solve(b);
}

void MacroBasis::project(const double* f, double* out) const {
  const std::size_t N = g_->size();
  auto c = coeffs(f);
  for (std::size_t p = 0; p < N; ++p) {
    double s = 0.0;
    for (int a = 0; a < 5; ++a) s += c[std::size_t(a)] * chi_[std::size_t(a)][p];
    out[p] = s;
  }
}

Vec MacroBasis::project(const Vec& f) const {
  Vec out(f.size());
  project(f.data(), out.data());
  return out;
}

Vec MacroBasis::complement(const Vec& f) const {
  Vec out(f.size());
  project(f.data(), out.data());
  for (std::size_t a = 0; a < f.size(); ++a) out[a] = f[a] - out[a];
  return out;
}

MacroBasis::Hydro MacroBasis::hydro(const double* f) const {
  auto c = coeffs(f);
  Hydro h;
  h.rho = std::sqrt(m_.rho) * c[0];
  const double su = std::sqrt(kRGas * m_.rho * m_.T);
  for (int i = 0; i < 3; ++i) h.u[std::size_t(i)] = su * c[std::size_t(1 + i)];
  h.T = std::sqrt(6.0 * m_.rho) * c[4];
  return h;
}

Vec MacroBasis::from_hydro(const Hydro& h) const {
  const std::size_t N = g_->size();
  std::array<double, 5> c{};
  c[0] = h.rho / std::sqrt(m_.rho);
  const double su = std::sqrt(kRGas * m_.rho * m_.T);
  for (int i = 0; i < 3; ++i) c[std::size_t(1 + i)] = h.u[std::size_t(i)] / su;
  c[4] = h.T / std::sqrt(6.0 * m_.rho);
  Vec out(N);
  for (std::size_t p = 0; p < N; ++p) {
    double s = 0.0;
    for (int a = 0; a < 5; ++a) s += c[std::size_t(a)] * chi_[std::size_t(a)][p];
    out[p] = s;
  }
  return out;
}

void project_Pv(const VelocityGrid& g, const std::array<Vec, 3>& h,
                std::array<Vec, 3>& out) {
  const std::size_t N = g.size();
  for (auto& o : out) o.resize(N);
  for (std::size_t a = 0; a < N; ++a) {
    auto v = g.v(a);
    double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    double dot = h[0][a] * v[0] + h[1][a] * v[1] + h[2][a] * v[2];
    for (int j = 0; j < 3; ++j) out[std::size_t(j)][a] = dot * v[std::size_t(j)] / r2;
  }
}

}  // namespace kinlim
