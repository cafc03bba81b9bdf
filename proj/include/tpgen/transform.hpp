#pragma once

#include <map>
#include <string>
#include <vector>

#include "tpgen/geometry.hpp"
#include "tpgen/scenario.hpp"
#include "tpgen/segmentation.hpp"

namespace tpgen {

// Rotation + uniform scaling about `pivot`, followed by the translation that
// carries pivot onto anchor: f(p) = anchor + scale * R(theta) * (p - pivot).
struct AffineTransform {
    double rotation_angle = 0.0;
    double scale = 1.0;
    Vec2 pivot;   // p_start in the source frame
    Vec2 anchor;  // q_start in the target frame

    Vec2 translation() const { return anchor - pivot; }
    Vec2 apply(const Vec2& p) const;
    AffineTransform inverse() const;
};

// Transform taking the segment p_start->p_end onto q_start->q_end. The
// rotation is the signed angle from V_p to V_q and the scale |V_q|/|V_p|.
AffineTransform compute_transform(const Vec2& p_start, const Vec2& p_end,
                                  const Vec2& q_start, const Vec2& q_end);

std::vector<Vec2> apply_to_points(const AffineTransform& tr, const std::vector<Vec2>& points);

struct TargetEndpoints {
    Vec2 q_start;
    Vec2 q_end;
};

// Per-vehicle primitive boundaries mapped into the target frame. Boundary
// times are [0, changepoints..., T-1]; speeds are template boundary speeds
// scaled by the transform's scale factor.
struct VehicleSkeleton {
    std::string vehicle_id;
    std::vector<int> boundary_times;
    std::vector<Vec2> boundary_points;
    std::vector<double> boundary_speeds;
};

struct ScenarioSkeleton {
    AffineTransform transform;
    std::vector<VehicleSkeleton> vehicles;

    std::string to_json() const;
};

// One shared transform, computed from the reference vehicle's endpoints and
// its targets, applied to every vehicle so relative geometry is preserved.
ScenarioSkeleton transform_scenario_skeleton(
    const SegmentationResult& seg, const Scenario& scenario,
    const std::map<std::string, TargetEndpoints>& targets,
    const std::string& reference_vehicle);

}  // namespace tpgen
