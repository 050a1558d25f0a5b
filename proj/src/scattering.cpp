#include "kerrcav/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kerrcav/error.hpp"
#include "kerrcav/polynomial.hpp"

namespace kerrcav {

namespace {

constexpr double kBandEdgeSin = 1e-12;
constexpr double kUnitSlack = 1e-12;

double incident_flux(const ModelParams& p, double k) {
    const double sin_k = std::sin(k);
    if (p.xi == 0.0) throw Error(ErrorCode::BandEdge, "zero hopping: no transport");
    if (std::abs(sin_k) <= kBandEdgeSin) {
        throw Error(ErrorCode::BandEdge, "band edge (sin k = 0) carries no flux");
    }
    return 2.0 * p.xi * sin_k;
}

TransmissionRoot make_root(const ModelParams& p, double k, double x, double D, double sigma,
                           const ScatterOptions& opts) {
    TransmissionRoot root;
    root.k = k;
    const double y = -x * (2.0 * p.g * x + D) / sigma;
    root.s = {x, y};
    root.s2 = x * x + y * y;
    root.r = reflection_of(root);
    root.residual = residual_eq9(p, k, root.s, opts);
    root.valid = root.s2 <= 1.0 + kUnitSlack && std::abs(root.residual[0]) <= opts.residual_tol &&
                 std::abs(root.residual[1]) <= opts.residual_tol;
    return root;
}

void order_branches(std::vector<TransmissionRoot>& roots) {
    std::sort(roots.begin(), roots.end(), [](const TransmissionRoot& a, const TransmissionRoot& b) {
        if (a.s2 != b.s2) return a.s2 < b.s2;
        return a.s.imag() < b.s.imag();
    });
    for (std::size_t i = 0; i < roots.size(); ++i) roots[i].branch = static_cast<int>(i);
}

bool in_unit_interval(double x) { return x > 0.0 && x <= 1.0 + kUnitSlack; }

// x (2gx + D)^2 = sigma^2 (1 - x) with D independent of x.
std::vector<TransmissionRoot> constant_detuning_roots(const ModelParams& p, double k, double D,
                                                      double sigma, const ScatterOptions& opts) {
    const double g = p.g;
    const auto xs = solve_cubic_real(4.0 * g * g, 4.0 * g * D, D * D + sigma * sigma,
                                     -sigma * sigma);
    std::vector<TransmissionRoot> out;
    for (const auto& x : xs) {
        if (!in_unit_interval(x.value)) continue;
        auto root = make_root(p, k, x.value, D, sigma, opts);
        root.multiplicity = x.multiplicity;
        out.push_back(root);
    }
    return out;
}

// Self-consistent intensity: D(x) = kappa J^2 / (c + 2gx). Multiplying the
// scalar equation by (c + 2gx)^2 removes the pole:
//   P(x) = x (2gx (c + 2gx) + kappa J^2)^2 - sigma^2 (1 - x) (c + 2gx)^2
// and P(pole) = x_pole J^4 > 0, so no root of P sits on the pole.
std::vector<TransmissionRoot> self_consistent_roots(const ModelParams& p, double k,
                                                    double sigma, const ScatterOptions& opts) {
    const double c = -2.0 * p.xi * std::cos(k) + p.omega - p.Omega;
    const double kappa = opts.sign == SignConvention::Eq9 ? 1.0 : -1.0;
    const double g = p.g;
    const double J2 = p.J * p.J;
    auto P = [&](double x) {
        const double gap = c + 2.0 * g * x;
        const double a = 2.0 * g * x * gap + kappa * J2;
        return x * a * a - sigma * sigma * (1.0 - x) * gap * gap;
    };

    const int n = opts.root_scan_points;
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(n) + 2);
    for (int i = 0; i <= n; ++i) nodes.push_back(static_cast<double>(i) / n);
    const double pole = -c / (2.0 * g);
    if (pole > 0.0 && pole < 1.0) {
        nodes.insert(std::upper_bound(nodes.begin(), nodes.end(), pole), pole);
    }

    std::vector<double> xs;
    double prev_x = nodes.front();
    double prev_f = P(prev_x);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double x = nodes[i];
        const double f = P(x);
        if (f == 0.0) {
            xs.push_back(x);
        } else if (prev_f != 0.0 && std::signbit(f) != std::signbit(prev_f)) {
            double lo = prev_x, hi = x, flo = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = P(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (std::signbit(fm) == std::signbit(flo)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            xs.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_f = f;
    }

    std::vector<TransmissionRoot> out;
    for (double x : xs) {
        if (!in_unit_interval(x)) continue;
        double D = 0.0;
        try {
            D = detuning_coefficient(p, solver_omega_k(p, k, x, opts), opts.sign,
                                     opts.resonance_eps);
        } catch (const Error&) {
            continue;
        }
        out.push_back(make_root(p, k, x, D, sigma, opts));
    }
    return out;
}

}  // namespace

void ScatterOptions::validate() const {
    if (!(residual_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "residual_tol must be > 0");
    }
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw Error(ErrorCode::InvalidArgument, "fixed intensity I0 must be >= 0");
    }
    if (root_scan_points < 100) {
        throw Error(ErrorCode::InvalidArgument, "root_scan_points must be >= 100");
    }
    if (!(resonance_eps >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "resonance_eps must be >= 0");
    }
}

double solver_omega_k(const ModelParams& p, double k, double transmitted_intensity,
                      const ScatterOptions& opts) {
    const double I =
        opts.mode == DispersionMode::FixedIntensity ? opts.intensity : transmitted_intensity;
    return dispersion_omega_k(p, k, I);
}

std::vector<TransmissionRoot> scatter_candidates(const ModelParams& p, double k,
                                                 const ScatterOptions& opts) {
    const double sigma = incident_flux(p, k);
    std::vector<TransmissionRoot> roots;
    if (opts.mode == DispersionMode::FixedIntensity || p.g == 0.0 || p.J == 0.0) {
        const double D = detuning_coefficient(p, solver_omega_k(p, k, opts.intensity, opts),
                                              opts.sign, opts.resonance_eps);
        roots = constant_detuning_roots(p, k, D, sigma, opts);
    } else {
        roots = self_consistent_roots(p, k, sigma, opts);
    }
    order_branches(roots);
    return roots;
}

std::vector<TransmissionRoot> transmission_roots(const ModelParams& p, double k,
                                                 const ScatterOptions& opts) {
    auto roots = scatter_candidates(p, k, opts);
    std::erase_if(roots, [](const TransmissionRoot& r) { return !r.valid; });
    order_branches(roots);
    return roots;
}

TransmissionRoot transmission_linear(const ModelParams& p, double k, const ScatterOptions& opts) {
    if (p.g != 0.0) throw Error(ErrorCode::NotLinear, "closed form requires g = 0");
    const double sigma = incident_flux(p, k);
    const double D = detuning_coefficient(p, solver_omega_k(p, k, opts.intensity, opts),
                                          opts.sign, opts.resonance_eps);
    const double denom = sigma * sigma + D * D;
    TransmissionRoot root;
    root.k = k;
    root.s = {sigma * sigma / denom, -D * sigma / denom};
    root.s2 = sigma * sigma / denom;
    root.r = reflection_of(root);
    root.residual = residual_eq9(p, k, root.s, opts);
    root.valid = std::abs(root.residual[0]) <= opts.residual_tol &&
                 std::abs(root.residual[1]) <= opts.residual_tol;
    return root;
}

std::array<double, 2> residual_eq9(const ModelParams& p, double k, cplx s,
                                   const ScatterOptions& opts) {
    const double x = s.real();
    const double y = s.imag();
    const double s2 = x * x + y * y;
    double D = 0.0;
    try {
        D = detuning_coefficient(p, solver_omega_k(p, k, s2, opts), opts.sign,
                                 opts.resonance_eps);
    } catch (const Error&) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    const double xs = p.xi * std::sin(k);
    return {2.0 * p.g * s2 * y + D * y - 2.0 * x * xs + 2.0 * xs,
            2.0 * p.g * s2 * x + D * x + 2.0 * y * xs};
}

cplx reflection_of(const TransmissionRoot& root) { return root.s - 1.0; }

void to_json(nlohmann::json& j, const ScatterOptions& o) {
    j = nlohmann::json{
        {"mode", o.mode == DispersionMode::FixedIntensity ? "fixed-intensity" : "self-consistent"},
        {"i0", o.intensity},
        {"sign", o.sign},
        {"residual_tol", o.residual_tol},
        {"root_scan_points", o.root_scan_points},
        {"resonance_eps", o.resonance_eps},
    };
}

void from_json(const nlohmann::json& j, ScatterOptions& o) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "scatter options must be a JSON object");
    ScatterOptions out;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "mode") {
                const auto m = value.get<std::string>();
                if (m == "fixed-intensity") out.mode = DispersionMode::FixedIntensity;
                else if (m == "self-consistent") out.mode = DispersionMode::SelfConsistent;
                else throw Error(ErrorCode::Config, "bad value for key 'mode': " + m);
            } else if (key == "i0") {
                out.intensity = value.get<double>();
            } else if (key == "sign") {
                out.sign = value.get<SignConvention>();
            } else if (key == "residual_tol") {
                out.residual_tol = value.get<double>();
            } else if (key == "root_scan_points") {
                out.root_scan_points = value.get<int>();
            } else if (key == "resonance_eps") {
                out.resonance_eps = value.get<double>();
            } else {
                throw Error(ErrorCode::Config, "unknown scatter option key '" + key + "'");
            }
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::Config, "bad value for key '" + key + "'");
        }
    }
    o = out;
}

void to_json(nlohmann::json& j, const TransmissionRoot& r) {
    j = nlohmann::json{{"k", r.k},
                       {"s", {r.s.real(), r.s.imag()}},
                       {"s2", r.s2},
                       {"r", {r.r.real(), r.r.imag()}},
                       {"branch", r.branch},
                       {"residual", r.residual},
                       {"valid", r.valid},
                       {"multiplicity", r.multiplicity}};
}

}  // namespace kerrcav
