#pragma once

#include <functional>

#include "kinlim/common.hpp"

namespace kinlim {

struct CgResult {
  int iterations = 0;
  double residual = 0.0;  // final ||Ax-b|| / ||b||
  bool converged = false;
};

// Preconditioned conjugate gradient for SPD operators.  `apply` computes
// out = A x; `diag` is an optional Jacobi preconditioner (nullptr => none);
// `project` is an optional constraint projection applied to every direction
// and iterate (used to stay on a null-space complement).  Deterministic:
// all reductions use fixed-order compensated dot products.
CgResult cg_solve(const std::function<void(const double*, double*)>& apply,
                  const Vec& b, Vec& x, double rel_tol, int max_iter,
                  const Vec* diag = nullptr,
                  const std::function<void(Vec&)>& project = nullptr);

}  // namespace kinlim
