#include "tpgen/plot.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tpgen {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// Locale-independent shortest decimal representation.
std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string render_scenario_svg(const Scenario& scenario, const GridMap& map,
                                const std::vector<int>& changepoints) {
    scenario.validate();
    const double panel = 560.0;
    const double margin = 40.0;
    const double speed_h = 180.0;
    const double width = panel + 2 * margin;
    const double height = panel + speed_h + 3 * margin;
    const double sx = panel / map.width;
    const double sy = panel / map.height;

    // Map frame: y grows upward, SVG y grows downward.
    const auto mx = [&](double x) { return margin + x * sx; };
    const auto my = [&](double y) { return margin + panel - y * sy; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
        << fmt(height) << "\">\n";
    svg << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\""
        << fmt(panel) << "\" height=\"" << fmt(panel)
        << "\" fill=\"white\" stroke=\"black\"/>\n";

    for (const auto& obstacle : map.obstacles) {
        if (const auto* r = std::get_if<RectObstacle>(&obstacle)) {
            svg << "<rect x=\"" << fmt(mx(r->x)) << "\" y=\"" << fmt(my(r->y + r->height))
                << "\" width=\"" << fmt(r->width * sx) << "\" height=\"" << fmt(r->height * sy)
                << "\" fill=\"#b0b0b0\"/>\n";
        } else {
            const auto& poly = std::get<PolygonObstacle>(obstacle);
            svg << "<polygon points=\"";
            for (std::size_t i = 0; i < poly.points.size(); ++i) {
                if (i) svg << " ";
                svg << fmt(mx(poly.points[i].x)) << "," << fmt(my(poly.points[i].y));
            }
            svg << "\" fill=\"#b0b0b0\"/>\n";
        }
    }

    double max_speed = 1e-9;
    for (const auto& v : scenario.vehicles)
        for (double s : v.speeds) max_speed = std::max(max_speed, s);
    const int T = scenario.length();
    const double speed_top = 2 * margin + panel;
    const auto tx = [&](int t) {
        return margin + (T > 1 ? panel * t / (T - 1) : 0.0);
    };
    const auto vy = [&](double s) { return speed_top + speed_h - speed_h * s / max_speed; };

    svg << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(speed_top) << "\" width=\""
        << fmt(panel) << "\" height=\"" << fmt(speed_h)
        << "\" fill=\"white\" stroke=\"black\"/>\n";

    for (int n = 0; n < scenario.num_vehicles(); ++n) {
        const auto& v = scenario.vehicles[n];
        const char* color = kPalette[n % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (int t = 0; t < T; ++t) {
            if (t) svg << " ";
            svg << fmt(mx(v.positions[t].x)) << "," << fmt(my(v.positions[t].y));
        }
        svg << "\"/>\n";
        svg << "<circle cx=\"" << fmt(mx(v.positions.front().x)) << "\" cy=\""
            << fmt(my(v.positions.front().y)) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        svg << "<rect x=\"" << fmt(mx(v.positions.back().x) - 3.5) << "\" y=\""
            << fmt(my(v.positions.back().y) - 3.5)
            << "\" width=\"7\" height=\"7\" fill=\"" << color << "\"/>\n";
        for (int cp : changepoints) {
            if (cp <= 0 || cp >= T) continue;
            const double cx = mx(v.positions[cp].x);
            const double cy = my(v.positions[cp].y);
            svg << "<polygon points=\"" << fmt(cx) << "," << fmt(cy - 5) << " " << fmt(cx - 4)
                << "," << fmt(cy + 3) << " " << fmt(cx + 4) << "," << fmt(cy + 3)
                << "\" fill=\"black\"/>\n";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (int t = 0; t < T; ++t) {
            if (t) svg << " ";
            svg << fmt(tx(t)) << "," << fmt(vy(v.speeds[t]));
        }
        svg << "\"/>\n";
    }
    for (int cp : changepoints) {
        if (cp <= 0 || cp >= T) continue;
        svg << "<line x1=\"" << fmt(tx(cp)) << "\" y1=\"" << fmt(speed_top) << "\" x2=\""
            << fmt(tx(cp)) << "\" y2=\"" << fmt(speed_top + speed_h)
            << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void plot_scenario(const Scenario& scenario, const GridMap& map, const std::string& out_path,
                   const std::vector<int>& changepoints) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write SVG '" + out_path + "'");
    out << render_scenario_svg(scenario, map, changepoints);
}

}  // namespace tpgen
