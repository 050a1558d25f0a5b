#include "kerrcav/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kerrcav {

namespace {

double eval_cubic(double a3, double a2, double a1, double a0, double x) {
    return ((a3 * x + a2) * x + a1) * x + a0;
}

double eval_cubic_derivative(double a3, double a2, double a1, double x) {
    return (3.0 * a3 * x + 2.0 * a2) * x + a1;
}

double polish(double a3, double a2, double a1, double a0, double x) {
    double fx = eval_cubic(a3, a2, a1, a0, x);
    for (int it = 0; it < 8 && fx != 0.0; ++it) {
        const double dfx = eval_cubic_derivative(a3, a2, a1, x);
        if (dfx == 0.0 || !std::isfinite(dfx)) break;
        const double next = x - fx / dfx;
        const double fnext = eval_cubic(a3, a2, a1, a0, next);
        if (!(std::abs(fnext) < std::abs(fx))) break;
        x = next;
        fx = fnext;
    }
    return x;
}

std::vector<RealRoot> merge_sorted(std::vector<RealRoot> roots, double merge_tol) {
    std::sort(roots.begin(), roots.end(),
              [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
    std::vector<RealRoot> out;
    for (const auto& r : roots) {
        if (!out.empty() && std::abs(r.value - out.back().value) <= merge_tol) {
            auto& last = out.back();
            const int m = last.multiplicity + r.multiplicity;
            last.value = (last.value * last.multiplicity + r.value * r.multiplicity) / m;
            last.multiplicity = m;
        } else {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

std::vector<RealRoot> solve_quadratic_real(double a2, double a1, double a0, double merge_tol) {
    if (a2 == 0.0) {
        if (a1 == 0.0) return {};
        return {{-a0 / a1, 1}};
    }
    double disc = a1 * a1 - 4.0 * a2 * a0;
    const double scale = a1 * a1 + std::abs(4.0 * a2 * a0);
    if (disc < 0.0) {
        if (-disc > 1e-14 * scale) return {};
        disc = 0.0;
    }
    if (disc == 0.0) return {{-a1 / (2.0 * a2), 2}};
    const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
    std::vector<RealRoot> roots{{q / a2, 1}};
    if (q != 0.0) roots.push_back({a0 / q, 1});
    else roots.push_back({0.0, 1});
    return merge_sorted(std::move(roots), merge_tol);
}

std::vector<RealRoot> solve_cubic_real(double a3, double a2, double a1, double a0,
                                       double merge_tol) {
    if (a3 == 0.0) return solve_quadratic_real(a2, a1, a0, merge_tol);

    const double b = a2 / a3;
    const double c = a1 / a3;
    const double d = a0 / a3;
    const double shift = b / 3.0;

    const double Q = (b * b - 3.0 * c) / 9.0;
    const double R = (b * (2.0 * b * b - 9.0 * c) + 27.0 * d) / 54.0;
    const double Q3 = Q * Q * Q;

    std::vector<RealRoot> roots;
    if (R * R < Q3) {
        const double t = std::acos(std::clamp(R / std::sqrt(Q3), -1.0, 1.0));
        const double m = -2.0 * std::sqrt(Q);
        constexpr double two_pi = 2.0 * std::numbers::pi;
        roots.push_back({m * std::cos(t / 3.0) - shift, 1});
        roots.push_back({m * std::cos((t + two_pi) / 3.0) - shift, 1});
        roots.push_back({m * std::cos((t - two_pi) / 3.0) - shift, 1});
    } else {
        const double A = -std::copysign(std::cbrt(std::abs(R) + std::sqrt(R * R - Q3)), R);
        const double B = (A == 0.0) ? 0.0 : Q / A;
        roots.push_back({A + B - shift, 1});
        const double im = 0.5 * std::sqrt(3.0) * (A - B);
        const double re = -0.5 * (A + B) - shift;
        // a vanishing imaginary part signals a double root
        if (std::abs(im) <= 1e-8 * std::max(1.0, std::abs(re))) roots.push_back({re, 2});
    }
    for (auto& r : roots) r.value = polish(a3, a2, a1, a0, r.value);
    return merge_sorted(std::move(roots), merge_tol);
}

}  // namespace kerrcav
