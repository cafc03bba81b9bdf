#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tpgen/geometry.hpp"

namespace tpgen {

// One vehicle's time-aligned state history. Positions are in grid units,
// speeds in grid units per timestep; `timestep` is the wall-clock duration
// of one sample in seconds.
struct VehicleTrack {
    std::string vehicle_id;
    std::vector<Vec2> positions;
    std::vector<double> speeds;
    double timestep = 0.1;

    int length() const { return static_cast<int>(positions.size()); }
    void validate() const;  // throws std::invalid_argument on violation
};

struct Scenario {
    std::vector<VehicleTrack> vehicles;
    std::string label;

    int num_vehicles() const { return static_cast<int>(vehicles.size()); }
    int length() const { return vehicles.empty() ? 0 : vehicles.front().length(); }
    const VehicleTrack& track(const std::string& vehicle_id) const;
    void validate() const;
};

// T x 3N matrix of per-column standardized features; row t is the stacked
// (x, y, v) of every vehicle at time t. Constant raw columns standardize to
// all-zeros and keep std recorded as 0.
struct ObservationMatrix {
    Eigen::MatrixXd values;
    std::vector<double> means;
    std::vector<double> stds;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }

    Eigen::MatrixXd unstandardize() const;
    static ObservationMatrix from_raw(const Eigen::MatrixXd& raw);
};

// Speed magnitudes by forward differencing: v_t = |p_{t+d} - p_t| / d for
// t = 0..T-1-d; the trailing d values replicate the last computed one so the
// output length equals the input length.
std::vector<double> derive_speeds(const std::vector<Vec2>& positions, double d_t = 1.0);

enum class ScenarioFormat { csv };

// CSV schema: header `t,vehicle_id,x,y,speed` with the speed column optional;
// time indices are 0-based contiguous integers shared by all vehicles.
Scenario load_scenario(const std::string& path, ScenarioFormat format = ScenarioFormat::csv,
                       double timestep = 0.1);

ObservationMatrix featurize(const Scenario& scenario);

// Scenario JSON mirrors the type fields verbatim.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario_json(const Scenario& scenario, const std::string& path);
Scenario load_scenario_json(const std::string& path);

// Fixture generation: piecewise-constant-acceleration kinematics.
struct VehicleInit {
    std::string vehicle_id;
    Vec2 position;
    Vec2 velocity;
};

struct Regime {
    int duration = 0;                   // samples, >= 2
    std::vector<Vec2> accelerations;    // one per vehicle, grid units / step^2
};

struct SyntheticSpec {
    std::vector<VehicleInit> vehicles;
    std::vector<Regime> regimes;
    double noise_std = 0.0;             // additive Gaussian position noise
    double timestep = 0.1;
    std::string label = "synthetic";
};

struct SyntheticScenario {
    Scenario scenario;
    std::vector<int> changepoints;      // ground-truth regime boundaries
};

SyntheticScenario make_synthetic_scenario(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace tpgen
