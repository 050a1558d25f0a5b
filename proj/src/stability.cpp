#include "kerrcav/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace kerrcav {

FieldState stationary_background(const ModelParams& p, double k, const TransmissionRoot& root,
                                 const ScatterOptions& opts) {
    if (!root.valid) throw Error(ErrorCode::InvalidArgument, "background needs a valid root");
    const cplx I{0.0, 1.0};
    const cplx r = reflection_of(root);
    FieldState bg = vacuum_state(p.N, p.sigma_z_bg);
    for (int j = -p.N; j <= p.N; ++j) {
        const double phase = k * j;
        if (j < 0) bg.alpha(j) = std::exp(I * phase) + r * std::exp(-I * phase);
        else if (j > 0) bg.alpha(j) = root.s * std::exp(I * phase);
        else bg.alpha(j) = root.s;
    }
    const double omega_k = solver_omega_k(p, k, root.s2, opts);
    const double gap = p.Omega - omega_k;
    const double drive = p.J0 * p.sigma_z_bg;
    if (drive != 0.0) {
        if (std::abs(gap) < opts.resonance_eps) {
            throw Error(ErrorCode::PoleAtResonance, "stationary coherence diverges at resonance");
        }
        bg.sm = drive * bg.alpha(0) / gap;
    }
    bg.sp = std::conj(bg.sm);
    return bg;
}

FluctuationMatrix build_heff(const FieldState& background, const ModelParams& p) {
    const int N = p.N;
    if (static_cast<int>(background.alphas.size()) != 2 * N + 1) {
        throw Error(ErrorCode::DimensionMismatch,
                    "background has " + std::to_string(background.alphas.size()) +
                        " sites, parameters expect " + std::to_string(2 * N + 1));
    }
    using M = FluctuationMatrix;
    FluctuationMatrix m;
    m.N = N;
    const int dim = M::dim_for(N);
    m.entries = Eigen::MatrixXcd::Zero(dim, dim);
    auto& H = m.entries;

    for (int j = -N; j <= N; ++j) {
        const cplx a = background.alpha(j);
        const int f = M::field_index(N, j);
        const int c = M::conj_index(N, j);
        const double diag = p.omega + 4.0 * p.g * std::norm(a);
        const cplx anomalous = 2.0 * p.g * a * a;
        H(f, f) = diag;
        H(f, c) = anomalous;
        // da^+ row: negated complex conjugate of the da row
        H(c, c) = -diag;
        H(c, f) = -std::conj(anomalous);
        for (int nb : {j - 1, j + 1}) {
            if (nb < -N || nb > N) continue;
            H(f, M::field_index(N, nb)) = -p.xi;
            H(c, M::conj_index(N, nb)) = p.xi;
        }
    }

    const int f0 = M::field_index(N, 0);
    const int c0 = M::conj_index(N, 0);
    const int sm = M::sm_index(N);
    const int sz = M::sz_index(N);
    const int sp = M::sp_index(N);
    const cplx a0 = background.alpha(0);
    const cplx bg_sm = background.sm;
    const cplx bg_sp = background.sp;
    const double bg_sz = background.sz;
    const double J0 = p.J0;

    H(f0, sm) = J0;
    H(c0, sp) = -J0;

    H(sm, sm) = p.Omega;
    H(sm, sz) = -J0 * a0;
    H(sm, f0) = -J0 * bg_sz;

    H(sz, c0) = -2.0 * J0 * bg_sm;
    H(sz, sp) = 2.0 * J0 * a0;
    H(sz, sm) = -2.0 * J0 * std::conj(a0);
    H(sz, f0) = 2.0 * J0 * bg_sp;

    H(sp, sp) = -p.Omega;
    H(sp, sz) = J0 * std::conj(a0);
    H(sp, c0) = J0 * bg_sz;
    return m;
}

StabilityReport stability_spectrum(const FluctuationMatrix& m, double tolerance) {
    if (!m.entries.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "fluctuation matrix is not finite");
    }
    StabilityReport report;
    report.dim = m.dim();
    if (m.dim() > 0) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m.entries, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
        }
        const auto& ev = solver.eigenvalues();
        report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    }
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
              [](const cplx& a, const cplx& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });
    for (const auto& l : report.eigenvalues) {
        report.max_im = std::max(report.max_im, std::abs(l.imag()));
    }
    report.stable = report.max_im <= tolerance;
    return report;
}

void to_json(nlohmann::json& j, const StabilityReport& r) {
    auto ev = nlohmann::json::array();
    for (const auto& l : r.eigenvalues) ev.push_back({l.real(), l.imag()});
    j = nlohmann::json{{"dim", r.dim}, {"max_im", r.max_im}, {"stable", r.stable},
                       {"eigenvalues", std::move(ev)}};
}

void from_json(const nlohmann::json& j, StabilityReport& r) {
    StabilityReport out;
    out.dim = j.at("dim").get<int>();
    out.max_im = j.at("max_im").get<double>();
    out.stable = j.at("stable").get<bool>();
    for (const auto& pair : j.at("eigenvalues")) {
        out.eigenvalues.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    r = std::move(out);
}

}  // namespace kerrcav
