// sweep.hpp - transmission (and stability) over 1-D and 2-D parameter grids

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kerrcav/scattering.hpp"
#include "kerrcav/stability.hpp"

namespace kerrcav {

enum class AxisName { k, g, J, xi, omega, Omega };

std::string_view to_string(AxisName name);
AxisName axis_name_from_string(std::string_view s);

/// Linear axis with `steps` points including both ends.
struct Axis {
    AxisName name = AxisName::k;
    double start = 0.0;
    double stop = 1.0;
    int steps = 2;

    /// Throws Error{InvalidArgument} unless steps >= 2 and start != stop.
    void validate() const;
    double value(int i) const;

    bool operator==(const Axis&) const = default;
};

/// Parses "name:start:stop:steps".
Axis parse_axis(std::string_view spec);

void to_json(nlohmann::json& j, const Axis& a);
void from_json(const nlohmann::json& j, Axis& a);

enum class CellReason { Ok, NoRoot, BandEdge, Pole, ResidualFail };

std::string_view to_string(CellReason r);

struct Cell {
    std::vector<double> coords;  // one value per axis
    std::vector<TransmissionRoot> roots;
    CellReason reason = CellReason::Ok;
    std::vector<std::optional<StabilityReport>> stability;  // parallel to roots when attached
    bool stability_failed = false;                         // EigenFailure recorded as data
};

struct SweepGrid {
    std::vector<Axis> axes;
    std::vector<Cell> cells;  // row-major, first axis outermost
    ModelParams params;
    ScatterOptions opts;
    double k = 1.0;  // quasi-momentum used when k is not an axis
};

/// 0 means: KERRCAV_WORKERS from the environment, else hardware concurrency.
int resolve_workers(int requested);

/// Parameters and quasi-momentum at one grid point.
void apply_axis(AxisName name, double value, ModelParams& p, double& k);

/// Solves a single point and classifies the outcome.
Cell evaluate_cell(const ModelParams& p, double k, const ScatterOptions& opts);

SweepGrid sweep1d(const ModelParams& p, const Axis& axis, const ScatterOptions& opts,
                  double k = 1.0, int workers = 0);

SweepGrid sweep2d(const ModelParams& p, const Axis& axis_a, const Axis& axis_b,
                  const ScatterOptions& opts, double k = 1.0, int workers = 0);

/// Attaches the stability report of every valid root's background.
SweepGrid sweep_stability(SweepGrid grid, const ModelParams& p, const ScatterOptions& opts,
                          double tolerance = kDefaultStabilityTol, int workers = 0);

/// '#' metadata line (compact JSON), layout comment, header, one row per root
/// (empty cells get one row with branch -1).
void write_sweep_csv(std::ostream& os, const SweepGrid& grid, const nlohmann::json& metadata);

nlohmann::json sweep_to_json(const SweepGrid& grid);

}  // namespace kerrcav
