#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tpgen/evaluation.hpp"
#include "tpgen/gp.hpp"
#include "tpgen/grid_map.hpp"
#include "tpgen/planner.hpp"
#include "tpgen/scenario.hpp"
#include "tpgen/segmentation.hpp"
#include "tpgen/transform.hpp"

namespace tpgen {

struct VehicleTargets {
    Vec2 q_start;
    Vec2 q_end;
    double v_start = 0.0;
    double v_end = 0.0;
};

struct PipelineConfig {
    std::string scenario_path;
    std::string map_path;
    std::map<std::string, VehicleTargets> targets;
    std::string reference_vehicle;      // empty: vehicle with longest displacement
    StickyHdpHmmConfig segmentation;
    PlannerConfig planner;
    GpHyperparams gp;
    int n_generate = 50;
    double min_separation_threshold = 15.0;
    int retry_factor = 10;              // draw budget = retry_factor * n_generate
    double degenerate_eps = 1.0;        // displacement below this skips the planner
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool write_plots = true;

    void validate() const;
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::string& path);
    std::string to_json() const;
};

struct GeneratedScenario {
    Scenario scenario;
    // provenance
    std::string template_label;
    std::uint64_t seed = 0;
    int draw_index = 0;
    std::vector<int> changepoints;      // template changepoint times, unwarped
    std::map<std::string, std::vector<double>> planner_costs;
    bool uniform_fallback = false;      // any segment used the uniform profile
    // audit
    double min_sep = 0.0;
    double endpoint_residual = 0.0;

    std::string to_json() const;
};

// Assembled GP training data for one vehicle (global time indexing).
struct VehicleTraining {
    std::string vehicle_id;
    Eigen::VectorXd times;
    Eigen::VectorXd xs;
    Eigen::VectorXd ys;
    Eigen::VectorXd noise_var;
    std::vector<double> planner_costs;
    bool uniform_fallback = false;
};

struct GenerationResult {
    std::vector<GeneratedScenario> scenarios;
    std::vector<int> changepoints;
    AffineTransform transform;
    std::vector<VehicleTraining> training;
    int draws_used = 0;
};

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Skeleton boundaries -> per-segment plans -> constant-acceleration training
// points, one point per template timestep.
std::vector<VehicleTraining> build_training_sets(const PipelineConfig& cfg,
                                                 const Scenario& scenario, const GridMap& map,
                                                 const std::vector<int>& changepoints);

// Full pipeline: segment, transform, plan, synthesize, GP-sample, audit.
GenerationResult generate(const PipelineConfig& cfg, const Scenario& scenario,
                          const GridMap& map);

// Ablation baseline: a single planned segment per vehicle (no changepoints).
GenerationResult generate_without_changepoints(const PipelineConfig& cfg,
                                               const Scenario& scenario, const GridMap& map);

// Convenience wrappers that load the scenario and map from cfg paths.
GenerationResult run_generate(const PipelineConfig& cfg, bool use_changepoints = true);

Scenario load_scenario_any(const std::string& path, double timestep = 0.1);

}  // namespace tpgen
