#include "tpgen/grid_map.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tpgen {

using nlohmann::json;

namespace {

bool point_in_rect(const Vec2& p, const RectObstacle& r) {
    return p.x >= r.x && p.x <= r.x + r.width && p.y >= r.y && p.y <= r.y + r.height;
}

// Convex containment: p must not lie strictly outside any edge's half-plane.
bool point_in_convex_polygon(const Vec2& p, const PolygonObstacle& poly) {
    const auto& v = poly.points;
    const int n = static_cast<int>(v.size());
    bool any_pos = false, any_neg = false;
    for (int i = 0; i < n; ++i) {
        const Vec2 edge = v[(i + 1) % n] - v[i];
        const double side = cross(edge, p - v[i]);
        if (side > 0.0) any_pos = true;
        if (side < 0.0) any_neg = true;
    }
    return !(any_pos && any_neg);
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Closed-segment intersection, including touching and collinear overlap.
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

std::vector<Vec2> rect_corners(const RectObstacle& r) {
    return {{r.x, r.y}, {r.x + r.width, r.y}, {r.x + r.width, r.y + r.height},
            {r.x, r.y + r.height}};
}

bool segment_hits_obstacle(const Vec2& a, const Vec2& b, const Obstacle& obstacle) {
    const std::vector<Vec2> corners = std::holds_alternative<RectObstacle>(obstacle)
                                          ? rect_corners(std::get<RectObstacle>(obstacle))
                                          : std::get<PolygonObstacle>(obstacle).points;
    const int n = static_cast<int>(corners.size());
    for (int i = 0; i < n; ++i)
        if (segments_intersect(a, b, corners[i], corners[(i + 1) % n])) return true;
    // Fully-inside segments cross no edge; an endpoint test settles those.
    if (std::holds_alternative<RectObstacle>(obstacle))
        return point_in_rect(a, std::get<RectObstacle>(obstacle));
    return point_in_convex_polygon(a, std::get<PolygonObstacle>(obstacle));
}

}  // namespace

void GridMap::validate() const {
    if (!(width > 0.0) || !(height > 0.0))
        throw std::invalid_argument("map dimensions must be positive");
    for (const auto& obstacle : obstacles) {
        std::vector<Vec2> pts;
        if (const auto* r = std::get_if<RectObstacle>(&obstacle)) {
            if (!(r->width > 0.0) || !(r->height > 0.0))
                throw std::invalid_argument("rectangle obstacle must have positive extent");
            pts = rect_corners(*r);
        } else {
            const auto& poly = std::get<PolygonObstacle>(obstacle);
            if (poly.points.size() < 3)
                throw std::invalid_argument("polygon obstacle needs at least 3 points");
            pts = poly.points;
        }
        for (const Vec2& p : pts)
            if (p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height)
                throw std::invalid_argument("obstacle geometry outside map bounds");
    }
}

bool GridMap::in_bounds(const Vec2& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

bool GridMap::is_free(const Vec2& p) const {
    if (!in_bounds(p)) return false;
    for (const auto& obstacle : obstacles) {
        if (const auto* r = std::get_if<RectObstacle>(&obstacle)) {
            if (point_in_rect(p, *r)) return false;
        } else if (point_in_convex_polygon(p, std::get<PolygonObstacle>(obstacle))) {
            return false;
        }
    }
    return true;
}

bool obstacle_free(const Vec2& a, const Vec2& b, const GridMap& map) {
    if (!map.is_free(a) || !map.is_free(b)) return false;
    for (const auto& obstacle : map.obstacles)
        if (segment_hits_obstacle(a, b, obstacle)) return false;
    return true;
}

std::string GridMap::to_json() const {
    json obs = json::array();
    for (const auto& obstacle : obstacles) {
        if (const auto* r = std::get_if<RectObstacle>(&obstacle)) {
            obs.push_back({{"type", "rect"},
                           {"x", r->x},
                           {"y", r->y},
                           {"width", r->width},
                           {"height", r->height}});
        } else {
            const auto& poly = std::get<PolygonObstacle>(obstacle);
            json pts = json::array();
            for (const Vec2& p : poly.points) pts.push_back({p.x, p.y});
            obs.push_back({{"type", "polygon"}, {"points", pts}});
        }
    }
    return json{{"width", width}, {"height", height}, {"obstacles", obs}}.dump(2);
}

GridMap GridMap::from_json(const std::string& text) {
    const json j = json::parse(text);
    GridMap map;
    map.width = j.at("width").get<double>();
    map.height = j.at("height").get<double>();
    for (const auto& o : j.value("obstacles", json::array())) {
        const std::string type = o.at("type").get<std::string>();
        if (type == "rect") {
            map.obstacles.push_back(RectObstacle{o.at("x").get<double>(),
                                                 o.at("y").get<double>(),
                                                 o.at("width").get<double>(),
                                                 o.at("height").get<double>()});
        } else if (type == "polygon") {
            PolygonObstacle poly;
            for (const auto& p : o.at("points"))
                poly.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            map.obstacles.push_back(std::move(poly));
        } else {
            throw std::invalid_argument("unknown obstacle type '" + type + "'");
        }
    }
    map.validate();
    return map;
}

GridMap GridMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void GridMap::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write map file '" + path + "'");
    out << to_json() << "\n";
}

}  // namespace tpgen
