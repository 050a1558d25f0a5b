#include "kerrcav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kerrcav {

namespace {

constexpr cplx I{0.0, 1.0};

// Packed state: alpha_{-N..N}, sm, sz, sp. sz is carried as a complex number
// so the verbatim convention can be integrated exactly as printed.
using Packed = std::vector<cplx>;

Packed pack(const FieldState& s) {
    Packed y(s.alphas);
    y.push_back(s.sm);
    y.push_back({s.sz, s.sz_imag});
    y.push_back(s.sp);
    return y;
}

FieldState unpack(const Packed& y, double t) {
    FieldState s;
    s.t = t;
    const std::size_t n = y.size() - 3;
    s.alphas.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    s.sm = y[n];
    s.sz = y[n + 1].real();
    s.sz_imag = y[n + 1].imag();
    s.sp = y[n + 2];
    return s;
}

void packed_derivative(const Packed& y, Packed& dy, const ModelParams& p, Convention conv) {
    const std::size_t n = y.size() - 3;
    const std::size_t centre = n / 2;
    dy.resize(y.size());
    for (std::size_t i = 0; i < n; ++i) {
        const cplx left = i > 0 ? y[i - 1] : cplx{};
        const cplx right = i + 1 < n ? y[i + 1] : cplx{};
        const cplx a = y[i];
        dy[i] = -I * (p.omega * a - p.xi * (left + right) + 2.0 * p.g * std::norm(a) * a);
    }
    const cplx sm = y[n];
    const cplx sz = y[n + 1];
    const cplx a0 = y[centre];
    dy[centre] += -I * p.J0 * sm;
    dy[n] = -I * (p.Omega * sm - p.J0 * a0 * sz);
    if (conv == Convention::ConjugateConsistent) {
        // i d<sz>/dt = -2 J0 (a0* sm - a0 sm*) is purely real after the -i.
        dy[n + 1] = {-4.0 * p.J0 * std::imag(std::conj(a0) * sm), 0.0};
        dy[n + 2] = std::conj(dy[n]);
    } else {
        const cplx sp = y[n + 2];
        dy[n + 1] = -I * (-2.0 * p.J0 * std::conj(a0) * sm + 2.0 * p.J0 * a0 * sp);
        dy[n + 2] = -I * (-p.Omega * sp + p.J0 * a0 * sz);
    }
}

// |z|^2 must stay finite too, otherwise the observables overflow
bool all_finite(const Packed& y) {
    return std::all_of(y.begin(), y.end(), [](const cplx& z) { return std::isfinite(std::norm(z)); });
}

// y + h * sum_i c_i k_i
void axpy_combo(const Packed& y, double h, std::initializer_list<std::pair<double, const Packed*>> terms,
                Packed& out) {
    out = y;
    for (const auto& [c, k] : terms) {
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < y.size(); ++i) out[i] += h * c * (*k)[i];
    }
}

class Recorder {
public:
    Recorder(double photons) : photons_(photons) {}

    void record(const Packed& y, double t) {
        auto state = unpack(y, t);
        auto obs = observables(state, photons_);
        if (traj_.samples.empty()) {
            q0_ = obs.Q;
            l0_ = obs.L;
        }
        traj_.q_drift = std::max(traj_.q_drift, std::abs(obs.Q - q0_));
        traj_.l_drift = std::max(traj_.l_drift, std::abs(obs.L - l0_));
        traj_.samples.push_back(std::move(state));
        traj_.observables.push_back(std::move(obs));
    }

    double last_time() const { return traj_.samples.back().t; }
    Trajectory& trajectory() { return traj_; }

private:
    double photons_;
    double q0_ = 0.0;
    double l0_ = 0.0;
    Trajectory traj_;
};

[[noreturn]] void blow_up(Recorder& rec, const Packed& last_finite, double t_last) {
    if (t_last > rec.last_time()) rec.record(last_finite, t_last);
    throw BlowUp("state left the finite domain after t = " + std::to_string(t_last),
                 std::move(rec.trajectory()));
}

Trajectory integrate_rk4(const Packed& y0, const ModelParams& p, const DynOptions& opts) {
    const double dt = opts.dt;
    const auto steps = static_cast<long long>(std::ceil(opts.t_end / dt - 1e-9));
    Recorder rec(opts.photons);
    Packed y = y0, k1, k2, k3, k4, tmp;
    rec.record(y, 0.0);
    double t = 0.0;
    for (long long i = 1; i <= steps; ++i) {
        const double t_next = i == steps ? opts.t_end : static_cast<double>(i) * dt;
        const double h = t_next - t;
        packed_derivative(y, k1, p, opts.convention);
        axpy_combo(y, h, {{0.5, &k1}}, tmp);
        packed_derivative(tmp, k2, p, opts.convention);
        axpy_combo(y, h, {{0.5, &k2}}, tmp);
        packed_derivative(tmp, k3, p, opts.convention);
        axpy_combo(y, h, {{1.0, &k3}}, tmp);
        packed_derivative(tmp, k4, p, opts.convention);
        axpy_combo(y, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}}, tmp);
        if (!all_finite(tmp)) blow_up(rec, y, t);
        y.swap(tmp);
        t = t_next;
        if (i % opts.sample_every == 0 || i == steps) rec.record(y, t);
    }
    return std::move(rec.trajectory());
}

// Dormand-Prince 5(4) with a mixed absolute/relative error norm.
Trajectory integrate_rk45(const Packed& y0, const ModelParams& p, const DynOptions& opts) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

    const double tol = opts.dt;
    Recorder rec(opts.photons);
    Packed y = y0, k1, k2, k3, k4, k5, k6, k7, tmp, y5;
    rec.record(y, 0.0);
    double t = 0.0;
    double h = std::min(1e-2, opts.t_end / 100.0);
    long long accepted = 0;
    packed_derivative(y, k1, p, opts.convention);
    while (t < opts.t_end) {
        const bool last = t + h >= opts.t_end;
        if (last) h = opts.t_end - t;
        axpy_combo(y, h, {{a21, &k1}}, tmp);
        packed_derivative(tmp, k2, p, opts.convention);
        axpy_combo(y, h, {{a31, &k1}, {a32, &k2}}, tmp);
        packed_derivative(tmp, k3, p, opts.convention);
        axpy_combo(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, tmp);
        packed_derivative(tmp, k4, p, opts.convention);
        axpy_combo(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, tmp);
        packed_derivative(tmp, k5, p, opts.convention);
        axpy_combo(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, tmp);
        packed_derivative(tmp, k6, p, opts.convention);
        axpy_combo(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, y5);
        if (!all_finite(y5)) blow_up(rec, y, t);
        packed_derivative(y5, k7, p, opts.convention);

        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                e7 * k7[i]);
            const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
            err = std::max(err, std::abs(e) / scale);
        }
        if (!std::isfinite(err)) blow_up(rec, y, t);

        if (err <= 1.0) {
            t = last ? opts.t_end : t + h;
            y.swap(y5);
            k1.swap(k7);
            ++accepted;
            if (accepted % opts.sample_every == 0 || t >= opts.t_end) rec.record(y, t);
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= factor;
        if (t < opts.t_end && h < 1e-14 * std::max(1.0, t)) {
            throw Error(ErrorCode::StepUnderflow,
                        "adaptive step fell below 1e-14 at t = " + std::to_string(t));
        }
    }
    return std::move(rec.trajectory());
}

}  // namespace

FieldState vacuum_state(int N, double sz) {
    FieldState s;
    s.alphas.assign(static_cast<std::size_t>(2 * N + 1), cplx{});
    s.sz = sz;
    return s;
}

void DynOptions::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be > 0");
    if (sample_every < 1) throw Error(ErrorCode::InvalidArgument, "sample_every must be >= 1");
    if (!(photons >= 1.0)) throw Error(ErrorCode::InvalidArgument, "photon count M must be >= 1");
}

FieldState derivative(const FieldState& state, const ModelParams& p, Convention conv) {
    Packed dy;
    packed_derivative(pack(state), dy, p, conv);
    return unpack(dy, 0.0);
}

Trajectory integrate(const FieldState& initial, const ModelParams& p, const DynOptions& opts) {
    opts.validate();
    if (initial.alphas.size() % 2 != 1) {
        throw Error(ErrorCode::DimensionMismatch, "state needs an odd number (2N+1) of sites");
    }
    Packed y0 = pack(initial);
    if (!all_finite(y0)) throw Error(ErrorCode::NonFinite, "initial state is not finite");
    if (opts.convention == Convention::ConjugateConsistent) {
        y0.back() = std::conj(y0[y0.size() - 3]);
        y0[y0.size() - 2] = {y0[y0.size() - 2].real(), 0.0};
    }
    return opts.method == Stepper::Rk4Fixed ? integrate_rk4(y0, p, opts)
                                            : integrate_rk45(y0, p, opts);
}

ModelParams rescale_params(const ModelParams& p, double M) {
    if (!(M >= 1.0)) throw Error(ErrorCode::InvalidArgument, "photon count M must be >= 1");
    ModelParams out = p;
    out.g = M * p.g;
    out.J0 = p.J0 / std::sqrt(M);
    return out;
}

FieldState initial_all_in_site(int site, Atom atom, int N) {
    if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
    if (site < -N || site > N) {
        throw Error(ErrorCode::SiteOutOfRange,
                    "site " + std::to_string(site) + " outside -" + std::to_string(N) + ".." +
                        std::to_string(N));
    }
    FieldState s = vacuum_state(N, atom == Atom::Excited ? 1.0 : -1.0);
    s.alpha(site) = 1.0;
    return s;
}

Observables observables(const FieldState& s, double M) {
    Observables o;
    o.n.reserve(s.alphas.size());
    double total = 0.0;
    for (const auto& a : s.alphas) {
        const double n = std::norm(a);
        total += n;
        o.n.push_back(M * n);
    }
    o.Q = total + 0.5 * (s.sz + 1.0);
    o.L = s.sz * s.sz + 4.0 * std::real(s.sp * s.sm);
    return o;
}

void to_json(nlohmann::json& j, const DynOptions& o) {
    j = nlohmann::json{
        {"convention", o.convention == Convention::ConjugateConsistent ? "conjugate" : "verbatim"},
        {"method", o.method == Stepper::Rk4Fixed ? "rk4" : "rk45"},
        {"dt", o.dt},
        {"t_end", o.t_end},
        {"sample_every", o.sample_every},
        {"photons", o.photons},
        {"boundary", "open"},
    };
}

void from_json(const nlohmann::json& j, DynOptions& o) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "dynamics options must be a JSON object");
    DynOptions out;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "convention") {
                const auto c = value.get<std::string>();
                if (c == "conjugate") out.convention = Convention::ConjugateConsistent;
                else if (c == "verbatim") out.convention = Convention::VerbatimEq4;
                else throw Error(ErrorCode::Config, "bad value for key 'convention': " + c);
            } else if (key == "method") {
                const auto m = value.get<std::string>();
                if (m == "rk4") out.method = Stepper::Rk4Fixed;
                else if (m == "rk45") out.method = Stepper::Rk45Adaptive;
                else throw Error(ErrorCode::Config, "bad value for key 'method': " + m);
            } else if (key == "dt") {
                out.dt = value.get<double>();
            } else if (key == "t_end") {
                out.t_end = value.get<double>();
            } else if (key == "sample_every") {
                out.sample_every = value.get<int>();
            } else if (key == "photons") {
                out.photons = value.get<double>();
            } else if (key == "boundary") {
                if (value.get<std::string>() != "open") {
                    throw Error(ErrorCode::Config, "only the open boundary is supported");
                }
            } else {
                throw Error(ErrorCode::Config, "unknown dynamics option key '" + key + "'");
            }
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::Config, "bad value for key '" + key + "'");
        }
    }
    o = out;
}

}  // namespace kerrcav
