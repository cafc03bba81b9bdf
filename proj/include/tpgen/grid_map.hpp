#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tpgen/geometry.hpp"

namespace tpgen {

struct RectObstacle {
    double x = 0.0, y = 0.0;      // lower-left corner
    double width = 0.0, height = 0.0;
};

struct PolygonObstacle {
    std::vector<Vec2> points;     // convex, any winding order
};

using Obstacle = std::variant<RectObstacle, PolygonObstacle>;

// Occupancy map over [0,width] x [0,height]. Obstacle boundaries count as
// occupied, so collision answers err on the safe side for touching geometry.
struct GridMap {
    double width = 1000.0;
    double height = 1000.0;
    std::vector<Obstacle> obstacles;

    void validate() const;
    bool in_bounds(const Vec2& p) const;
    // In bounds and not inside (or on the boundary of) any obstacle.
    bool is_free(const Vec2& p) const;

    std::string to_json() const;
    static GridMap from_json(const std::string& text);
    static GridMap load(const std::string& path);
    void save(const std::string& path) const;
};

// True iff the closed segment a-b stays in free space: both endpoints free
// and the segment crosses no obstacle boundary. Exact segment/edge tests,
// no sub-sampling.
bool obstacle_free(const Vec2& a, const Vec2& b, const GridMap& map);

}  // namespace tpgen
