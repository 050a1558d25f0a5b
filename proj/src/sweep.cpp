#include "kerrcav/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "kerrcav/io.hpp"

namespace kerrcav {

namespace {

// Runs fn(i) for i in [0, n) on a pool of workers; fn writes to slot i only.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const auto count = static_cast<std::size_t>(std::max(1, workers));
    if (count == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(count, n); ++w) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}


SweepGrid run_grid(const ModelParams& p, std::vector<Axis> axes, const ScatterOptions& opts,
                   double k, int workers) {
    p.validate();
    opts.validate();
    for (const auto& a : axes) a.validate();

    SweepGrid grid;
    grid.params = p;
    grid.opts = opts;
    grid.k = k;
    grid.axes = std::move(axes);

    std::size_t total = 1;
    for (const auto& a : grid.axes) total *= static_cast<std::size_t>(a.steps);
    grid.cells.resize(total);

    parallel_for(total, resolve_workers(workers), [&](std::size_t idx) {
        ModelParams cp = p;
        double ck = k;
        std::vector<double> coords(grid.axes.size());
        std::size_t rem = idx;
        for (std::size_t d = grid.axes.size(); d-- > 0;) {
            const auto steps = static_cast<std::size_t>(grid.axes[d].steps);
            coords[d] = grid.axes[d].value(static_cast<int>(rem % steps));
            rem /= steps;
        }
        for (std::size_t d = 0; d < grid.axes.size(); ++d) apply_axis(grid.axes[d].name, coords[d], cp, ck);
        Cell cell = evaluate_cell(cp, ck, opts);
        cell.coords = std::move(coords);
        grid.cells[idx] = std::move(cell);
    });
    return grid;
}

}  // namespace

std::string_view to_string(AxisName name) {
    switch (name) {
        case AxisName::k: return "k";
        case AxisName::g: return "g";
        case AxisName::J: return "J";
        case AxisName::xi: return "xi";
        case AxisName::omega: return "omega";
        case AxisName::Omega: return "Omega";
    }
    return "?";
}

AxisName axis_name_from_string(std::string_view s) {
    for (auto n : {AxisName::k, AxisName::g, AxisName::J, AxisName::xi, AxisName::omega,
                   AxisName::Omega}) {
        if (to_string(n) == s) return n;
    }
    throw Error(ErrorCode::Config, "unknown axis name '" + std::string(s) + "'");
}

void Axis::validate() const {
    if (steps < 2) throw Error(ErrorCode::InvalidArgument, "axis needs steps >= 2");
    if (!(start != stop) || !std::isfinite(start) || !std::isfinite(stop)) {
        throw Error(ErrorCode::InvalidArgument, "axis needs finite start != stop");
    }
}

double Axis::value(int i) const {
    const double n = steps - 1;
    const double v = (start * (n - i) + stop * i) / n;
    // rounding leaves ~1e-16 where the exact grid point is 0; a near-vanishing g or J is ill-conditioned
    return std::abs(v) <= 1e-14 * std::max(std::abs(start), std::abs(stop)) ? 0.0 : v;
}

Axis parse_axis(std::string_view spec) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = spec.find(':', pos);
        parts.push_back(spec.substr(pos, colon - pos));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (parts.size() != 4) {
        throw Error(ErrorCode::Config, "axis must read name:start:stop:steps, got '" +
                                           std::string(spec) + "'");
    }
    Axis a;
    a.name = axis_name_from_string(parts[0]);
    auto number = [&](std::string_view s, auto& out) {
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
            throw Error(ErrorCode::Config, "bad number '" + std::string(s) + "' in axis");
        }
    };
    number(parts[1], a.start);
    number(parts[2], a.stop);
    number(parts[3], a.steps);
    return a;
}

void to_json(nlohmann::json& j, const Axis& a) {
    j = nlohmann::json{{"name", to_string(a.name)}, {"start", a.start}, {"stop", a.stop},
                       {"steps", a.steps}};
}

void from_json(const nlohmann::json& j, Axis& a) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "axis must be a JSON object");
    Axis out;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "name") out.name = axis_name_from_string(value.get<std::string>());
            else if (key == "start") out.start = value.get<double>();
            else if (key == "stop") out.stop = value.get<double>();
            else if (key == "steps") out.steps = value.get<int>();
            else if (key == "spacing") {
                if (value.get<std::string>() != "linear") {
                    throw Error(ErrorCode::Config, "only linear axis spacing is supported");
                }
            } else throw Error(ErrorCode::Config, "unknown axis key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::Config, "bad value for axis key '" + key + "'");
        }
    }
    a = out;
}

std::string_view to_string(CellReason r) {
    switch (r) {
        case CellReason::Ok: return "ok";
        case CellReason::NoRoot: return "no_root";
        case CellReason::BandEdge: return "band_edge";
        case CellReason::Pole: return "pole";
        case CellReason::ResidualFail: return "residual_fail";
    }
    return "?";
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KERRCAV_WORKERS")) {
        int n = 0;
        const std::string_view s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
        if (res.ec == std::errc{} && n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void apply_axis(AxisName name, double value, ModelParams& p, double& k) {
    switch (name) {
        case AxisName::k: k = value; break;
        case AxisName::g: p.g = value; break;
        case AxisName::J: p.J = value; break;
        case AxisName::xi: p.xi = value; break;
        case AxisName::omega: p.omega = value; break;
        case AxisName::Omega: p.Omega = value; break;
    }
}

Cell evaluate_cell(const ModelParams& p, double k, const ScatterOptions& opts) {
    Cell cell;
    try {
        auto candidates = scatter_candidates(p, k, opts);
        const bool any = !candidates.empty();
        std::erase_if(candidates, [](const TransmissionRoot& r) { return !r.valid; });
        for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].branch = static_cast<int>(i);
        cell.roots = std::move(candidates);
        if (cell.roots.empty()) cell.reason = any ? CellReason::ResidualFail : CellReason::NoRoot;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BandEdge) cell.reason = CellReason::BandEdge;
        else if (e.code() == ErrorCode::PoleAtResonance) cell.reason = CellReason::Pole;
        else throw;
    }
    return cell;
}

SweepGrid sweep1d(const ModelParams& p, const Axis& axis, const ScatterOptions& opts, double k,
                  int workers) {
    return run_grid(p, {axis}, opts, k, workers);
}

SweepGrid sweep2d(const ModelParams& p, const Axis& axis_a, const Axis& axis_b,
                  const ScatterOptions& opts, double k, int workers) {
    if (axis_a.name == axis_b.name) {
        throw Error(ErrorCode::InvalidArgument, "2-D sweep needs two distinct axes");
    }
    return run_grid(p, {axis_a, axis_b}, opts, k, workers);
}

SweepGrid sweep_stability(SweepGrid grid, const ModelParams& p, const ScatterOptions& opts,
                          double tolerance, int workers) {
    parallel_for(grid.cells.size(), resolve_workers(workers), [&](std::size_t idx) {
        Cell& cell = grid.cells[idx];
        ModelParams cp = p;
        double ck = grid.k;
        for (std::size_t d = 0; d < grid.axes.size(); ++d) apply_axis(grid.axes[d].name, cell.coords[d], cp, ck);
        cell.stability.assign(cell.roots.size(), std::nullopt);
        for (std::size_t b = 0; b < cell.roots.size(); ++b) {
            try {
                const auto bg = stationary_background(cp, ck, cell.roots[b], opts);
                cell.stability[b] = stability_spectrum(build_heff(bg, cp), tolerance);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::EigenFailure && e.code() != ErrorCode::PoleAtResonance) throw;
                cell.stability_failed = true;
            }
        }
    });
    return grid;
}

void write_sweep_csv(std::ostream& os, const SweepGrid& grid, const nlohmann::json& metadata) {
    const bool with_stability = std::any_of(grid.cells.begin(), grid.cells.end(),
                                            [](const Cell& c) { return !c.stability.empty(); });
    os << "# " << metadata.dump() << '\n';
    os << "# layout: row-major over (";
    for (std::size_t d = 0; d < grid.axes.size(); ++d) os << (d ? ", " : "") << to_string(grid.axes[d].name);
    os << "), first axis outermost; one row per branch; empty cells have branch -1\n";
    for (const auto& a : grid.axes) os << to_string(a.name) << ',';
    os << "branch,re_s,im_s,s2,residual_1,residual_2,valid,reason";
    if (with_stability) os << ",max_im,stable";
    os << '\n';

    const std::string nan = format_double(std::nan(""));
    for (const auto& cell : grid.cells) {
        std::string prefix;
        for (double c : cell.coords) prefix += format_double(c) + ',';
        if (cell.roots.empty()) {
            os << prefix << "-1," << nan << ',' << nan << ',' << nan << ',' << nan << ',' << nan
               << ",0," << to_string(cell.reason);
            if (with_stability) os << ',' << nan << ',';
            os << '\n';
            continue;
        }
        for (std::size_t b = 0; b < cell.roots.size(); ++b) {
            const auto& r = cell.roots[b];
            os << prefix << r.branch << ',' << format_double(r.s.real()) << ','
               << format_double(r.s.imag()) << ',' << format_double(r.s2) << ','
               << format_double(r.residual[0]) << ',' << format_double(r.residual[1]) << ','
               << (r.valid ? 1 : 0) << ',' << to_string(cell.reason);
            if (with_stability) {
                if (b < cell.stability.size() && cell.stability[b]) {
                    os << ',' << format_double(cell.stability[b]->max_im) << ','
                       << (cell.stability[b]->stable ? 1 : 0);
                } else {
                    os << ',' << nan << ',';
                }
            }
            os << '\n';
        }
    }
}

nlohmann::json sweep_to_json(const SweepGrid& grid) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : grid.cells) {
        nlohmann::json c{{"coords", cell.coords}, {"reason", to_string(cell.reason)},
                         {"roots", cell.roots}};
        if (!cell.stability.empty()) {
            nlohmann::json st = nlohmann::json::array();
            for (const auto& s : cell.stability) st.push_back(s ? nlohmann::json(*s) : nlohmann::json());
            c["stability"] = std::move(st);
        }
        cells.push_back(std::move(c));
    }
    return nlohmann::json{{"axes", grid.axes}, {"params", grid.params}, {"scatter", grid.opts},
                          {"k", grid.k},       {"cells", std::move(cells)}};
}

}  // namespace kerrcav
