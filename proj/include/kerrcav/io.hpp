// io.hpp - number formatting and trajectory output

#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "kerrcav/dynamics.hpp"

namespace kerrcav {

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const nlohmann::json& metadata);

nlohmann::json trajectory_to_json(const Trajectory& traj);

/// Reads a JSON document, skipping leading '#' metadata lines.
nlohmann::json read_json_skipping_comments(std::istream& is);

}  // namespace kerrcav
