#pragma once

#include <functional>

namespace slitspec::quad {

/// Adaptive 1D quadrature on [a,b] to absolute tolerance `abs_tol`.
/// Gauss-Legendre 10 on each cell, bisection with a two-panel error estimate.
/// Throws QuadratureError if the recursion depth cap is reached before the
/// local error budget is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 44);

/// Nested adaptive quadrature over the rectangle [ax,bx] x [ay,by].
/// The inner (y) integrals are evaluated ~100x tighter than the outer budget.
double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                   double ay, double by, double abs_tol);

} // namespace slitspec::quad
