#include "kerrcav/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kerrcav/dynamics.hpp"
#include "kerrcav/io.hpp"
#include "kerrcav/scattering.hpp"
#include "kerrcav/stability.hpp"
#include "kerrcav/sweep.hpp"

namespace kerrcav::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

using nlohmann::json;

struct RunConfig {
    ModelParams params;
    ScatterOptions scatter;
    DynOptions dyn;
    std::string output_path;  // empty: stdout
    std::string format = "csv";

    std::optional<Axis> axis;
    std::optional<Axis> axis_a;
    std::optional<Axis> axis_b;
    double k = 1.0;
    int branch = 0;
    double stability_tol = kDefaultStabilityTol;
    bool with_stability = false;

    int site = -1;
    Atom atom = Atom::Excited;
    bool vacuum = false;
    bool rescale = false;  // treat params as bare constants and rescale by M
};

// Flag values; unset means "keep the config file value".
struct Overrides {
    std::string config_path;
    std::optional<std::string> out, format, mode, sign, convention, method, atom;
    std::optional<double> i0, k, t_end, dt, photons, tolerance;
    std::optional<int> branch, site, sample_every;
    std::optional<std::string> axis, axis_a, axis_b;
    std::vector<std::string> sets;
    bool vacuum = false;
    bool with_stability = false;
    bool rescale = false;
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        config_error("bad value for key '" + key + "'");
    }
}

Atom atom_from(const std::string& s) {
    if (s == "excited") return Atom::Excited;
    if (s == "ground") return Atom::Ground;
    config_error("atom must be excited or ground, got '" + s + "'");
}

void apply_initial(const json& j, RunConfig& cfg) {
    if (!j.is_object()) config_error("'initial' must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "site") cfg.site = get_as<int>(value, key);
        else if (key == "atom") cfg.atom = atom_from(get_as<std::string>(value, key));
        else if (key == "vacuum") cfg.vacuum = get_as<bool>(value, key);
        else config_error("unknown initial-state key '" + key + "'");
    }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) config_error("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error("malformed JSON in '" + path + "': " + e.what());
    }
    if (!j.is_object()) config_error("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "params") cfg.params = value.get<ModelParams>();
        else if (key == "scatter") cfg.scatter = value.get<ScatterOptions>();
        else if (key == "dynamics") cfg.dyn = value.get<DynOptions>();
        else if (key == "initial") apply_initial(value, cfg);
        else if (key == "axis") cfg.axis = value.get<Axis>();
        else if (key == "axis_a") cfg.axis_a = value.get<Axis>();
        else if (key == "axis_b") cfg.axis_b = value.get<Axis>();
        else if (key == "k") cfg.k = get_as<double>(value, key);
        else if (key == "branch") cfg.branch = get_as<int>(value, key);
        else if (key == "stability_tolerance") cfg.stability_tol = get_as<double>(value, key);
        else if (key == "with_stability") cfg.with_stability = get_as<bool>(value, key);
        else if (key == "rescale") cfg.rescale = get_as<bool>(value, key);
        else if (key == "output") cfg.output_path = get_as<std::string>(value, key);
        else if (key == "format") cfg.format = get_as<std::string>(value, key);
        else config_error("unknown config key '" + key + "'");
    }
}

void apply_set(const std::string& assignment, ModelParams& p) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) config_error("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    json patch = p;
    if (!patch.contains(key)) config_error("unknown model parameter key '" + key + "'");
    try {
        patch[key] = json::parse(assignment.substr(eq + 1));
    } catch (const json::parse_error&) {
        config_error("bad value for key '" + key + "'");
    }
    p = patch.get<ModelParams>();
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) load_config_file(o.config_path, cfg);
    for (const auto& s : o.sets) apply_set(s, cfg.params);
    if (o.out) cfg.output_path = *o.out;
    if (o.format) cfg.format = *o.format;
    if (o.mode) {
        if (*o.mode == "fixed-intensity") cfg.scatter.mode = DispersionMode::FixedIntensity;
        else if (*o.mode == "self-consistent") cfg.scatter.mode = DispersionMode::SelfConsistent;
        else config_error("bad value for --mode: " + *o.mode);
    }
    if (o.i0) cfg.scatter.intensity = *o.i0;
    if (o.sign) cfg.scatter.sign = json(*o.sign).get<SignConvention>();
    if (o.convention) {
        if (*o.convention == "conjugate") cfg.dyn.convention = Convention::ConjugateConsistent;
        else if (*o.convention == "verbatim") cfg.dyn.convention = Convention::VerbatimEq4;
        else config_error("bad value for --convention: " + *o.convention);
    }
    if (o.method) {
        if (*o.method == "rk4") cfg.dyn.method = Stepper::Rk4Fixed;
        else if (*o.method == "rk45") cfg.dyn.method = Stepper::Rk45Adaptive;
        else config_error("bad value for --method: " + *o.method);
    }
    if (o.t_end) cfg.dyn.t_end = *o.t_end;
    if (o.dt) cfg.dyn.dt = *o.dt;
    if (o.photons) cfg.dyn.photons = *o.photons;
    if (o.sample_every) cfg.dyn.sample_every = *o.sample_every;
    if (o.site) cfg.site = *o.site;
    if (o.atom) cfg.atom = atom_from(*o.atom);
    if (o.vacuum) cfg.vacuum = true;
    if (o.rescale) cfg.rescale = true;
    if (o.k) cfg.k = *o.k;
    if (o.branch) cfg.branch = *o.branch;
    if (o.tolerance) cfg.stability_tol = *o.tolerance;
    if (o.with_stability) cfg.with_stability = true;
    if (o.axis) cfg.axis = parse_axis(*o.axis);
    if (o.axis_a) cfg.axis_a = parse_axis(*o.axis_a);
    if (o.axis_b) cfg.axis_b = parse_axis(*o.axis_b);
    return cfg;
}

// Every option block is checked before any computation starts.
void validate(const RunConfig& cfg, const std::string& command) {
    try {
        cfg.params.validate();
        cfg.scatter.validate();
        cfg.dyn.validate();
        if (cfg.axis) cfg.axis->validate();
        if (cfg.axis_a) cfg.axis_a->validate();
        if (cfg.axis_b) cfg.axis_b->validate();
    } catch (const Error& e) {
        config_error(e.what());
    }
    if (cfg.format != "csv" && cfg.format != "json") {
        config_error("format must be csv or json, got '" + cfg.format + "'");
    }
    if (!(cfg.stability_tol >= 0.0)) config_error("stability_tolerance must be >= 0");
    if (command == "sweep2d") {
        if (!cfg.axis_a || !cfg.axis_b) config_error("sweep2d needs axis_a and axis_b");
        if (cfg.axis_a->name == cfg.axis_b->name) config_error("sweep2d axes must differ");
    }
    if (command == "dynamics" && !cfg.vacuum && (cfg.site < -cfg.params.N || cfg.site > cfg.params.N)) {
        config_error("initial site " + std::to_string(cfg.site) + " outside the array");
    }
}

json metadata(const RunConfig& cfg, const std::string& command) {
    json m{{"tool", "kerrcav"},       {"version", kVersion},         {"command", command},
           {"params", cfg.params},    {"scatter", cfg.scatter},      {"format", cfg.format},
           {"output", cfg.output_path}};
    if (command == "spectrum") {
        m["axis"] = *cfg.axis;
        m["k"] = cfg.k;
        m["with_stability"] = cfg.with_stability;
    } else if (command == "sweep2d") {
        m["axis_a"] = *cfg.axis_a;
        m["axis_b"] = *cfg.axis_b;
        m["k"] = cfg.k;
        m["with_stability"] = cfg.with_stability;
    } else if (command == "stability") {
        m["k"] = cfg.k;
        m["branch"] = cfg.branch;
        m["stability_tolerance"] = cfg.stability_tol;
    } else if (command == "dynamics") {
        m["dynamics"] = cfg.dyn;
        m["initial"] = {{"site", cfg.site},
                        {"atom", cfg.atom == Atom::Excited ? "excited" : "ground"},
                        {"vacuum", cfg.vacuum}};
        m["rescale"] = cfg.rescale;
    }
    if (command != "dynamics") m.erase("dynamics");
    return m;
}

// Output sink; opened before computing so an unwritable path fails fast.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        if (!*file_) throw Error(ErrorCode::Io, "cannot open output '" + path + "'");
    }

    std::ostream& stream() { return file_ ? *file_ : std::cout; }

    void finish() {
        stream().flush();
        if (!stream()) throw Error(ErrorCode::Io, "write to output failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

void emit_grid(const RunConfig& cfg, const SweepGrid& grid, const json& meta, Sink& sink) {
    if (cfg.format == "csv") {
        write_sweep_csv(sink.stream(), grid, meta);
    } else {
        sink.stream() << "# " << meta.dump() << '\n' << sweep_to_json(grid).dump(2) << '\n';
    }
}

int cmd_spectrum(const RunConfig& cfg) {
    const json meta = metadata(cfg, "spectrum");
    Sink sink(cfg.output_path);
    auto grid = sweep1d(cfg.params, *cfg.axis, cfg.scatter, cfg.k);
    if (cfg.with_stability) grid = sweep_stability(std::move(grid), cfg.params, cfg.scatter, cfg.stability_tol);
    emit_grid(cfg, grid, meta, sink);
    sink.finish();
    return kOk;
}

int cmd_sweep2d(const RunConfig& cfg) {
    const json meta = metadata(cfg, "sweep2d");
    Sink sink(cfg.output_path);
    auto grid = sweep2d(cfg.params, *cfg.axis_a, *cfg.axis_b, cfg.scatter, cfg.k);
    if (cfg.with_stability) grid = sweep_stability(std::move(grid), cfg.params, cfg.scatter, cfg.stability_tol);
    emit_grid(cfg, grid, meta, sink);
    sink.finish();
    return kOk;
}

void emit_trajectory(const RunConfig& cfg, const Trajectory& traj, const json& meta, Sink& sink) {
    if (cfg.format == "csv") {
        write_trajectory_csv(sink.stream(), traj, meta);
    } else {
        sink.stream() << "# " << meta.dump() << '\n' << trajectory_to_json(traj).dump(2) << '\n';
    }
}

int cmd_dynamics(const RunConfig& cfg) {
    const json meta = metadata(cfg, "dynamics");
    Sink sink(cfg.output_path);
    const ModelParams p = cfg.rescale ? rescale_params(cfg.params, cfg.dyn.photons) : cfg.params;
    const FieldState initial =
        cfg.vacuum ? vacuum_state(p.N, cfg.atom == Atom::Excited ? 1.0 : -1.0)
                   : initial_all_in_site(cfg.site, cfg.atom, p.N);
    try {
        const auto traj = integrate(initial, p, cfg.dyn);
        emit_trajectory(cfg, traj, meta, sink);
        sink.finish();
    } catch (const BlowUp& e) {
        emit_trajectory(cfg, e.partial(), meta, sink);
        sink.finish();
        std::cerr << "kerrcav: numerical blow-up: " << e.what() << '\n';
        return kBlowUp;
    }
    return kOk;
}

int cmd_stability(const RunConfig& cfg) {
    const json meta = metadata(cfg, "stability");
    Sink sink(cfg.output_path);
    const auto roots = transmission_roots(cfg.params, cfg.k, cfg.scatter);
    if (cfg.branch < 0 || cfg.branch >= static_cast<int>(roots.size())) {
        throw Error(ErrorCode::MissingBranch,
                    "branch " + std::to_string(cfg.branch) + " does not exist (" +
                        std::to_string(roots.size()) + " branches at k = " + format_double(cfg.k) + ")");
    }
    const auto& root = roots[static_cast<std::size_t>(cfg.branch)];
    const auto bg = stationary_background(cfg.params, cfg.k, root, cfg.scatter);
    const auto report = stability_spectrum(build_heff(bg, cfg.params), cfg.stability_tol);
    auto& os = sink.stream();
    os << "# " << meta.dump() << '\n';
    if (cfg.format == "json") {
        os << json(report).dump(2) << '\n';
    } else {
        os << "# dim=" << report.dim << " max_im=" << format_double(report.max_im)
           << " stable=" << (report.stable ? 1 : 0) << '\n';
        os << "re,im\n";
        for (const auto& l : report.eigenvalues) {
            os << format_double(l.real()) << ',' << format_double(l.imag()) << '\n';
        }
    }
    sink.finish();
    return kOk;
}

void add_shared(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "JSON config file");
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--mode", o.mode, "fixed-intensity or self-consistent");
    sub->add_option("--i0", o.i0, "incident intensity for fixed-intensity mode");
    sub->add_option("--sign", o.sign, "eq8 or eq9");
    sub->add_option("--convention", o.convention, "conjugate or verbatim");
    sub->add_option("--set", o.sets, "model parameter override key=value (repeatable)");
}

void add_sweep_flags(CLI::App* sub, Overrides& o) {
    sub->add_option("--k", o.k, "quasi-momentum when k is not an axis");
    sub->add_flag("--with-stability", o.with_stability, "attach stability reports");
    sub->add_option("--tolerance", o.tolerance, "stability tolerance on |Im lambda|");
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Kerr cavity array with a two-level atom: scattering, dynamics, stability"};
    app.require_subcommand(1);
    Overrides o;

    auto* spectrum = app.add_subcommand("spectrum", "transmission over one axis (default k)");
    add_shared(spectrum, o);
    add_sweep_flags(spectrum, o);
    spectrum->add_option("--axis", o.axis, "name:start:stop:steps");

    auto* sweep = app.add_subcommand("sweep2d", "transmission over a 2-D grid");
    add_shared(sweep, o);
    add_sweep_flags(sweep, o);
    sweep->add_option("--axis-a", o.axis_a, "outer axis name:start:stop:steps");
    sweep->add_option("--axis-b", o.axis_b, "inner axis name:start:stop:steps");

    auto* dynamics = app.add_subcommand("dynamics", "mean-field time evolution");
    add_shared(dynamics, o);
    dynamics->add_option("--t-end", o.t_end, "final time");
    dynamics->add_option("--dt", o.dt, "rk4 step or rk45 tolerance");
    dynamics->add_option("--method", o.method, "rk4 or rk45");
    dynamics->add_option("--sample-every", o.sample_every, "output decimation");
    dynamics->add_option("--photons", o.photons, "total photon number M");
    dynamics->add_option("--site", o.site, "initially occupied site");
    dynamics->add_option("--atom", o.atom, "excited or ground");
    dynamics->add_flag("--vacuum", o.vacuum, "start from the empty array");
    dynamics->add_flag("--rescale", o.rescale, "rescale g and J0 by M before integrating");

    auto* stability = app.add_subcommand("stability", "fluctuation spectrum around one branch");
    add_shared(stability, o);
    stability->add_option("--k", o.k, "quasi-momentum");
    stability->add_option("--branch", o.branch, "branch index");
    stability->add_option("--tolerance", o.tolerance, "stability tolerance on |Im lambda|");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = resolve(o);
        if (command == "spectrum" && !cfg.axis) cfg.axis = Axis{AxisName::k, 1e-3, std::numbers::pi - 1e-3, 500};
        validate(cfg, command);
        if (command == "spectrum") return cmd_spectrum(cfg);
        if (command == "sweep2d") return cmd_sweep2d(cfg);
        if (command == "dynamics") return cmd_dynamics(cfg);
        return cmd_stability(cfg);
    } catch (const Error& e) {
        std::cerr << "kerrcav: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::Config: return kConfigError;
            case ErrorCode::Io: return kIoError;
            case ErrorCode::NonFinite: return kBlowUp;
            case ErrorCode::MissingBranch: return kMissingBranch;
            default: return kFailure;
        }
    }
}

}  // namespace kerrcav::cli
