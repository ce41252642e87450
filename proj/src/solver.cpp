#include "kinlim/solver.hpp"

#include <cmath>

namespace kinlim {

CgResult cg_solve(const std::function<void(const double*, double*)>& apply,
                  const Vec& b, Vec& x, double rel_tol, int max_iter,
                  const Vec* diag, const std::function<void(Vec&)>& project) {
  const std::size_t N = b.size();
  if (x.size() != N) x.assign(N, 0.0);
  CgResult res;

  Vec r(N), z(N), p(N), Ap(N);
  apply(x.data(), Ap.data());
  for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - Ap[i];
  if (project) project(r);

  const double bnorm = std::sqrt(det_dot(b.data(), b.data(), N));
  if (bnorm == 0.0) {
    x.assign(N, 0.0);
    res.converged = true;
    return res;
  }

  auto precond = [&](const Vec& in, Vec& out) {
    if (diag)
      for (std::size_t i = 0; i < N; ++i) out[i] = in[i] / (*diag)[i];
    else
      out = in;
    if (project) project(out);
  };

  precond(r, z);
  p = z;
  double rz = det_dot(r.data(), z.data(), N);

  for (int it = 0; it < max_iter; ++it) {
    apply(p.data(), Ap.data());
    if (project) project(Ap);
    const double pAp = det_dot(p.data(), Ap.data(), N);
    if (pAp <= 0.0) break;  // operator not SPD on this subspace
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < N; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    res.iterations = it + 1;
    const double rnorm = std::sqrt(det_dot(r.data(), r.data(), N));
    res.residual = rnorm / bnorm;
    if (res.residual <= rel_tol) {
      res.converged = true;
      break;
    }
    precond(r, z);
    const double rz_new = det_dot(r.data(), z.data(), N);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }
  if (project) project(x);
  return res;
}

}  // namespace kinlim
