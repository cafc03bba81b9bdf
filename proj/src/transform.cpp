#include "tpgen/transform.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace tpgen {

using nlohmann::json;

Vec2 AffineTransform::apply(const Vec2& p) const {
    const double c = std::cos(rotation_angle);
    const double s = std::sin(rotation_angle);
    const Vec2 rel = p - pivot;
    const Vec2 rotated{c * rel.x - s * rel.y, s * rel.x + c * rel.y};
    return anchor + scale * rotated;
}

AffineTransform AffineTransform::inverse() const {
    AffineTransform inv;
    inv.rotation_angle = -rotation_angle;
    inv.scale = 1.0 / scale;
    inv.pivot = anchor;
    inv.anchor = pivot;
    return inv;
}

AffineTransform compute_transform(const Vec2& p_start, const Vec2& p_end,
                                  const Vec2& q_start, const Vec2& q_end) {
    const Vec2 vp = p_end - p_start;
    const Vec2 vq = q_end - q_start;
    if (vp.norm() == 0.0 || vq.norm() == 0.0)
        throw std::invalid_argument("compute_transform: degenerate direction vector");
    AffineTransform tr;
    // Signed angle; arccos of the normalized dot product would lose the
    // orientation and fail to carry p_end onto q_end for clockwise turns.
    tr.rotation_angle = std::atan2(cross(vp, vq), dot(vp, vq));
    tr.scale = vq.norm() / vp.norm();
    tr.pivot = p_start;
    tr.anchor = q_start;
    return tr;
}

std::vector<Vec2> apply_to_points(const AffineTransform& tr, const std::vector<Vec2>& points) {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const Vec2& p : points) out.push_back(tr.apply(p));
    return out;
}

ScenarioSkeleton transform_scenario_skeleton(
    const SegmentationResult& seg, const Scenario& scenario,
    const std::map<std::string, TargetEndpoints>& targets,
    const std::string& reference_vehicle) {
    scenario.validate();
    const int T = scenario.length();
    for (const auto& v : scenario.vehicles)
        if (!targets.count(v.vehicle_id))
            throw std::invalid_argument("no targets for vehicle '" + v.vehicle_id + "'");

    const VehicleTrack& ref = scenario.track(reference_vehicle);
    const TargetEndpoints& ref_targets = targets.at(reference_vehicle);
    if (distance(ref.positions.front(), ref.positions.back()) == 0.0)
        throw std::invalid_argument(
            "reference vehicle '" + reference_vehicle +
            "' is stationary; pick a moving reference for the shared transform");

    ScenarioSkeleton skeleton;
    skeleton.transform = compute_transform(ref.positions.front(), ref.positions.back(),
                                           ref_targets.q_start, ref_targets.q_end);

    std::vector<int> boundary_times;
    boundary_times.push_back(0);
    for (int cp : seg.changepoints)
        if (cp > 0 && cp < T - 1) boundary_times.push_back(cp);
    boundary_times.push_back(T - 1);

    for (const auto& v : scenario.vehicles) {
        VehicleSkeleton vs;
        vs.vehicle_id = v.vehicle_id;
        vs.boundary_times = boundary_times;
        for (int t : boundary_times) {
            vs.boundary_points.push_back(skeleton.transform.apply(v.positions[t]));
            vs.boundary_speeds.push_back(v.speeds[t] * skeleton.transform.scale);
        }
        skeleton.vehicles.push_back(std::move(vs));
    }
    return skeleton;
}

std::string ScenarioSkeleton::to_json() const {
    json vehicle_arr = json::array();
    for (const auto& v : vehicles) {
        json points = json::array();
        for (const Vec2& p : v.boundary_points) points.push_back({p.x, p.y});
        vehicle_arr.push_back({{"vehicle_id", v.vehicle_id},
                               {"boundary_times", v.boundary_times},
                               {"boundary_points", points},
                               {"boundary_speeds", v.boundary_speeds}});
    }
    json j{{"transform",
            {{"rotation_angle", transform.rotation_angle},
             {"scale", transform.scale},
             {"translation", {transform.translation().x, transform.translation().y}},
             {"pivot", {transform.pivot.x, transform.pivot.y}},
             {"anchor", {transform.anchor.x, transform.anchor.y}}}},
           {"vehicles", vehicle_arr}};
    return j.dump(2);
}

}  // namespace tpgen
