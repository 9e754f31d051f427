#pragma once

#include <cmath>
#include <cstddef>

namespace hostpar {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  std::size_t evaluations = 0;
};

// Golden-section search for the minimum of a unimodal f on [a, b].
// Stops once the bracket is narrower than tol. The endpoints are compared
// against the interior estimate so minima sitting on the boundary are
// returned exactly.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double tol,
                                      std::size_t max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t evals = 2;

  for (std::size_t i = 0; i < max_iterations && (b - a) > tol; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }

  ScalarMinimum best{(a + b) / 2.0, 0.0, evals};
  best.fx = f(best.x);
  const double fa = f(a);
  const double fb = f(b);
  best.evaluations += 3;
  if (fa <= best.fx) {
    best.x = a;
    best.fx = fa;
  }
  if (fb < best.fx) {
    best.x = b;
    best.fx = fb;
  }
  return best;
}

}  // namespace hostpar
