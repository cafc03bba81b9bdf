#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpgen/grid_map.hpp"
#include "tpgen/scenario.hpp"

namespace tpgen {

// SVG with a map/trajectory panel on top and a speed-vs-time panel below.
// Changepoint markers are drawn when boundary indices are supplied. Output
// bytes are deterministic for fixed input.
std::string render_scenario_svg(const Scenario& scenario, const GridMap& map,
                                const std::vector<int>& changepoints = {});

void plot_scenario(const Scenario& scenario, const GridMap& map, const std::string& out_path,
                   const std::vector<int>& changepoints = {});

}  // namespace tpgen
