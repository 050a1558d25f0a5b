// dynamics.hpp - mean-field dynamics of the cavity array and the two-level atom

#pragma once

#include <complex>
#include <vector>

#include <json.hpp>

#include "kerrcav/error.hpp"
#include "kerrcav/model.hpp"

namespace kerrcav {

using cplx = std::complex<double>;

/// Mean-field state: cavity amplitudes alpha_{-N..N} and the atomic
/// expectations <sigma_->, <sigma_z>, <sigma_+>.
struct FieldState {
    double t = 0.0;
    std::vector<cplx> alphas;  // index j + N
    cplx sm{};
    double sz = 0.0;
    double sz_imag = 0.0;  // only the verbatim convention can make <sigma_z> complex
    cplx sp{};             // conj(sm) in the conjugate-consistent convention

    int half_length() const { return static_cast<int>(alphas.size() / 2); }
    cplx& alpha(int j) { return alphas[static_cast<std::size_t>(j + half_length())]; }
    cplx alpha(int j) const { return alphas[static_cast<std::size_t>(j + half_length())]; }
};

/// Empty array (all alpha = 0) of 2N+1 sites with the atom in the given state.
FieldState vacuum_state(int N, double sz);

enum class Convention {
    ConjugateConsistent,  // <sigma_+> = conj(<sigma_->) enforced
    VerbatimEq4,          // the five printed lines, <sigma_+> evolved independently
};

enum class Stepper { Rk4Fixed, Rk45Adaptive };

enum class Atom { Excited, Ground };

struct DynOptions {
    Convention convention = Convention::ConjugateConsistent;
    Stepper method = Stepper::Rk4Fixed;
    double dt = 1e-3;  // step (rk4) or local error tolerance (rk45)
    double t_end = 20.0;
    int sample_every = 10;
    double photons = 1.0;  // M, converts rescaled |alpha|^2 to photon numbers

    void validate() const;
};

struct Observables {
    std::vector<double> n;  // M |alpha_j|^2, index j + N
    double Q = 0.0;         // sum |alpha_j|^2 + (sz + 1)/2
    double L = 0.0;         // sz^2 + 4 Re(sp sm)
};

struct Trajectory {
    std::vector<FieldState> samples;
    std::vector<Observables> observables;
    double q_drift = 0.0;  // max |Q(t) - Q(0)| over samples
    double l_drift = 0.0;
};

/// Raised when the state leaves the finite domain. Carries the trajectory up
/// to and including the last finite state.
class BlowUp : public Error {
public:
    BlowUp(const std::string& what, Trajectory partial)
        : Error(ErrorCode::NonFinite, what), partial_(std::move(partial)) {}

    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

/// Time derivative of every field of the state (t is left at 0).
FieldState derivative(const FieldState& state, const ModelParams& p, Convention conv);

Trajectory integrate(const FieldState& initial, const ModelParams& p, const DynOptions& opts);

/// g -> M g, J0 -> J0 / sqrt(M); other constants unchanged.
ModelParams rescale_params(const ModelParams& p, double M);

/// alpha_site = 1 (all M photons there), sm = 0, sz = +1 (excited) or -1.
FieldState initial_all_in_site(int site, Atom atom, int N);

Observables observables(const FieldState& s, double M);

void to_json(nlohmann::json& j, const DynOptions& o);
void from_json(const nlohmann::json& j, DynOptions& o);

}  // namespace kerrcav
