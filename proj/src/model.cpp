#include "kerrcav/model.hpp"

#include <cmath>
#include <set>
#include <string>

#include "kerrcav/error.hpp"

namespace kerrcav {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::BandEdge: return "band_edge";
        case ErrorCode::PoleAtResonance: return "pole_at_resonance";
        case ErrorCode::NotLinear: return "not_linear";
        case ErrorCode::StepUnderflow: return "step_underflow";
        case ErrorCode::NonFinite: return "non_finite";
        case ErrorCode::SiteOutOfRange: return "site_out_of_range";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::EigenFailure: return "eigen_failure";
        case ErrorCode::Config: return "config";
        case ErrorCode::Io: return "io";
        case ErrorCode::MissingBranch: return "missing_branch";
    }
    return "unknown";
}

void ModelParams::validate() const {
    for (double v : {omega, xi, g, Omega, J, J0, sigma_z_bg}) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "model parameters must be finite");
        }
    }
    if (N < 1) {
        throw Error(ErrorCode::InvalidArgument, "N must be >= 1, got " + std::to_string(N));
    }
    if (std::abs(sigma_z_bg) > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "sigma_z_bg must lie in [-1, 1]");
    }
}

double dispersion_omega_k(const ModelParams& p, double k, double intensity) {
    return -2.0 * p.xi * std::cos(k) + p.omega + 2.0 * p.g * intensity;
}

double detuning_coefficient(const ModelParams& p, double omega_k, SignConvention sign,
                            double eps) {
    if (p.J == 0.0) return 0.0;
    const double gap = p.Omega - omega_k;
    if (std::abs(gap) < eps) {
        throw Error(ErrorCode::PoleAtResonance,
                    "photon energy at atomic resonance (|Omega - Omega_k| < eps)");
    }
    const double d = p.J * p.J / gap;
    return sign == SignConvention::Eq8 ? d : -d;
}

double effective_coupling(double J0, double sigma_z) {
    if (!(sigma_z >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "effective coupling J0*sqrt(<sigma_z>) needs <sigma_z> >= 0");
    }
    return J0 * std::sqrt(sigma_z);
}

void to_json(nlohmann::json& j, const ModelParams& p) {
    j = nlohmann::json{{"omega", p.omega}, {"xi", p.xi},   {"g", p.g},
                       {"Omega", p.Omega}, {"J", p.J},     {"J0", p.J0},
                       {"sigma_z_bg", p.sigma_z_bg},      {"N", p.N}};
}

namespace {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::Config, std::string("bad value for key '") + key + "'");
    }
}

}  // namespace

void from_json(const nlohmann::json& j, ModelParams& p) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "model parameters must be a JSON object");
    static const std::set<std::string> known{"omega", "xi", "g",          "Omega",
                                             "J",     "J0", "sigma_z_bg", "N"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw Error(ErrorCode::Config, "unknown model parameter key '" + key + "'");
        }
    }
    ModelParams out;
    read_key(j, "omega", out.omega);
    read_key(j, "xi", out.xi);
    read_key(j, "g", out.g);
    read_key(j, "Omega", out.Omega);
    read_key(j, "J", out.J);
    out.J0 = out.J;
    read_key(j, "J0", out.J0);
    read_key(j, "sigma_z_bg", out.sigma_z_bg);
    read_key(j, "N", out.N);
    p = out;
}

void to_json(nlohmann::json& j, SignConvention s) { j = s == SignConvention::Eq8 ? "eq8" : "eq9"; }

void from_json(const nlohmann::json& j, SignConvention& s) {
    const auto v = j.get<std::string>();
    if (v == "eq8") s = SignConvention::Eq8;
    else if (v == "eq9") s = SignConvention::Eq9;
    else throw Error(ErrorCode::Config, "sign convention must be eq8 or eq9, got '" + v + "'");
}

}  // namespace kerrcav
