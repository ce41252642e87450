#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinlim {

using Vec = std::vector<double>;

// Gas constant R used throughout; the internal energy of a monatomic state
// with this R satisfies (3/2)RT = T.
inline constexpr double kRGas = 2.0 / 3.0;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic reduction: fixed-block pairwise summation.  The split points
// depend only on n, never on thread count, so results are bit-reproducible.
double det_sum(const double* x, std::size_t n);
double det_dot(const double* a, const double* b, std::size_t n);

inline double det_sum(const Vec& v) { return det_sum(v.data(), v.size()); }
inline double det_dot(const Vec& a, const Vec& b) {
  return det_dot(a.data(), b.data(), a.size());
}

// Parallel map over spatial cells.  `serial` forces single-threaded execution
// (reference path used by tests and the benchmark).
void parallel_for_cells(std::size_t n, const std::function<void(std::size_t)>& fn,
                        bool serial = false);

}  // namespace kinlim
