// model.hpp - physical parameters and lattice dispersion of the Kerr cavity array
//
// Units: hbar = 1, every frequency and coupling shares one energy unit.
// Sites run -N..N; the two-level atom sits in cavity 0.

#pragma once

#include <json.hpp>

namespace kerrcav {

struct ModelParams {
    double omega = 2.0;       // cavity resonance
    double xi = 1.0;          // hopping between neighbouring cavities
    double g = 0.0;           // Kerr coupling
    double Omega = 3.0;       // atomic transition
    double J = 1.0;           // effective atom-field coupling (scattering)
    double J0 = 1.0;          // bare atom-field coupling (dynamics, fluctuations)
    double sigma_z_bg = 1.0;  // background inversion <sigma_z>
    int N = 20;               // half length of the array

    /// Throws Error{InvalidArgument} on N < 1, |sigma_z_bg| > 1 or non-finite values.
    void validate() const;

    int sites() const { return 2 * N + 1; }

    bool operator==(const ModelParams&) const = default;
};

/// Sign of the resonant J^2 term. Eq8 reads J^2/(Omega - Omega_k); Eq9 reads
/// J^2/(Omega_k - Omega). Both forms appear in the source model.
enum class SignConvention { Eq8, Eq9 };

inline constexpr double kDefaultResonanceEps = 1e-12;

/// Plane-wave energy Omega_k = -2 xi cos k + omega + 2 g I.
double dispersion_omega_k(const ModelParams& p, double k, double intensity);

/// D = J^2/(Omega - Omega_k) (Eq8) or J^2/(Omega_k - Omega) (Eq9).
/// Throws PoleAtResonance when |Omega_k - Omega| < eps and J != 0.
/// A decoupled atom (J = 0) gives D = 0 even at resonance.
double detuning_coefficient(const ModelParams& p, double omega_k, SignConvention sign,
                            double eps = kDefaultResonanceEps);

/// J = J0 sqrt(<sigma_z>); defined only for <sigma_z> >= 0.
double effective_coupling(double J0, double sigma_z);

void to_json(nlohmann::json& j, const ModelParams& p);
/// Missing J0 defaults to J, missing sigma_z_bg to 1. Unknown keys are rejected.
void from_json(const nlohmann::json& j, ModelParams& p);

void to_json(nlohmann::json& j, SignConvention s);
void from_json(const nlohmann::json& j, SignConvention& s);

}  // namespace kerrcav
