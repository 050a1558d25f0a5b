// polynomial.hpp - real roots of low-degree polynomials

#pragma once

#include <vector>

namespace kerrcav {

struct RealRoot {
    double value = 0.0;
    int multiplicity = 1;
};

/// Real roots of a3 x^3 + a2 x^2 + a1 x + a0, ascending. Falls back to the
/// quadratic/linear case when leading coefficients vanish. Roots closer than
/// merge_tol are reported once with their combined multiplicity. Each root is
/// polished by Newton steps on the original (unnormalized) polynomial.
std::vector<RealRoot> solve_cubic_real(double a3, double a2, double a1, double a0,
                                       double merge_tol = 1e-10);

/// Stable real roots of a2 x^2 + a1 x + a0.
std::vector<RealRoot> solve_quadratic_real(double a2, double a1, double a0,
                                           double merge_tol = 1e-10);

}  // namespace kerrcav
