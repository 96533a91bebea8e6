#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "geomatch/match.hpp"
#include "geomatch/shapes.hpp"

namespace geomatch {

/// energy.csv contents; the split columns appear only when the report has them.
std::string energy_csv(const MatchReport& report);

/// Final energies, history length, timings and the full effective config.
nlohmann::json report_json(const MatchReport& report, const MatchConfig& effective);

/// SVG line plot of a planar curve; vertex coordinates are written verbatim.
/// `target` (optional) is drawn underneath in grey.
std::string curve_svg(const SimplicialShape& curve, const SimplicialShape* target = nullptr);

/// Writes frames, energy.csv, momentum.txt and report.json into `dir`.
void write_run(const std::filesystem::path& dir, const MatchReport& report, const MatchConfig& effective,
               const SimplicialShape* target = nullptr);

/// Leaves a FAILED marker holding `message` in `dir`.
void write_failure(const std::filesystem::path& dir, const std::string& message);

}  // namespace geomatch
