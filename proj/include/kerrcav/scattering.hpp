// scattering.hpp - stationary nonlinear scattering through the atom-coupled cavity
//
// A plane wave e^{ikj} enters from the left, the transmitted wave is s e^{ikj}
// and the reflected one r e^{-ikj}. Writing s = x + iy, the two real stationary
// equations are
//
//   2g(x^2+y^2) y + D y - 2 xi sin k x + 2 xi sin k = 0
//   2g(x^2+y^2) x + D x + 2 xi sin k y            = 0
//
// with D the resonant atom term. Every solution obeys x^2 + y^2 = x, which
// reduces the system to a scalar polynomial in x on (0, 1].

#pragma once

#include <array>
#include <complex>
#include <vector>

#include <json.hpp>

#include "kerrcav/model.hpp"

namespace kerrcav {

using cplx = std::complex<double>;

enum class DispersionMode {
    FixedIntensity,  // Omega_k at the incident intensity I0
    SelfConsistent,  // Omega_k at the transmitted intensity |s|^2
};

struct ScatterOptions {
    DispersionMode mode = DispersionMode::FixedIntensity;
    double intensity = 1.0;  // I0, fixed-intensity mode only
    SignConvention sign = SignConvention::Eq9;
    double residual_tol = 1e-9;
    int root_scan_points = 2000;
    double resonance_eps = kDefaultResonanceEps;

    void validate() const;

    bool operator==(const ScatterOptions&) const = default;
};

struct TransmissionRoot {
    double k = 0.0;
    cplx s{};
    double s2 = 0.0;
    cplx r{};
    int branch = 0;  // ascending s2, ties by ascending Im s
    std::array<double, 2> residual{};
    bool valid = false;
    int multiplicity = 1;
};

/// Omega_k used by the solver for a given transmitted intensity |s|^2.
double solver_omega_k(const ModelParams& p, double k, double transmitted_intensity,
                      const ScatterOptions& opts);

/// Every candidate root in (0, 1], flagged valid or not. Sorted and numbered
/// like transmission_roots but including residual failures.
std::vector<TransmissionRoot> scatter_candidates(const ModelParams& p, double k,
                                                 const ScatterOptions& opts);

/// All admissible branches; may be empty.
/// Throws BandEdge (sin k = 0 or xi = 0) and, in fixed-intensity mode, PoleAtResonance.
std::vector<TransmissionRoot> transmission_roots(const ModelParams& p, double k,
                                                 const ScatterOptions& opts);

/// Closed-form g = 0 solution, s2 = 4 xi^2 sin^2 k / (4 xi^2 sin^2 k + D^2).
/// Throws NotLinear when g != 0.
TransmissionRoot transmission_linear(const ModelParams& p, double k,
                                     const ScatterOptions& opts);

/// Left-hand sides of the two real stationary equations at s. Infinite at the pole.
std::array<double, 2> residual_eq9(const ModelParams& p, double k, cplx s,
                                   const ScatterOptions& opts);

/// r = s - 1 (continuity at site 0).
cplx reflection_of(const TransmissionRoot& root);

void to_json(nlohmann::json& j, const ScatterOptions& o);
void from_json(const nlohmann::json& j, ScatterOptions& o);
void to_json(nlohmann::json& j, const TransmissionRoot& r);

}  // namespace kerrcav
