// stability.hpp - linearized fluctuations around a stationary background
//
// The fluctuation vector is ordered
//   (da_{-N}, da_{-N}^+, ..., da_N, da_N^+, dsigma_-, dsigma_z, dsigma_+)
// and evolves as i dV/dt = H_eff V.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kerrcav/dynamics.hpp"
#include "kerrcav/scattering.hpp"

namespace kerrcav {

struct FluctuationMatrix {
    int N = 0;
    Eigen::MatrixXcd entries;

    int dim() const { return static_cast<int>(entries.rows()); }

    static int dim_for(int N) { return 2 * (2 * N + 1) + 3; }
    static int field_index(int N, int j) { return 2 * (j + N); }
    static int conj_index(int N, int j) { return 2 * (j + N) + 1; }
    static int sm_index(int N) { return 2 * (2 * N + 1); }
    static int sz_index(int N) { return 2 * (2 * N + 1) + 1; }
    static int sp_index(int N) { return 2 * (2 * N + 1) + 2; }
};

struct StabilityReport {
    int dim = 0;
    std::vector<cplx> eigenvalues;  // sorted by real part, then imaginary part
    double max_im = 0.0;
    bool stable = true;

    bool operator==(const StabilityReport&) const = default;
};

inline constexpr double kDefaultStabilityTol = 1e-8;

/// Scattering ansatz on -N..N for a valid root, with the stationary coherence
/// <sigma_-> = J0 alpha_0 <sigma_z> / (Omega - Omega_k).
FieldState stationary_background(const ModelParams& p, double k, const TransmissionRoot& root,
                                 const ScatterOptions& opts);

FluctuationMatrix build_heff(const FieldState& background, const ModelParams& p);

/// Throws EigenFailure if the eigensolver does not converge.
StabilityReport stability_spectrum(const FluctuationMatrix& m,
                                   double tolerance = kDefaultStabilityTol);

void to_json(nlohmann::json& j, const StabilityReport& r);
void from_json(const nlohmann::json& j, StabilityReport& r);

}  // namespace kerrcav
