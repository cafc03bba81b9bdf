// tpgen: extract traffic primitives from multi-vehicle trajectory logs and
// generate road-constrained scenario variations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tpgen/evaluation.hpp"
#include "tpgen/gp.hpp"
#include "tpgen/grid_map.hpp"
#include "tpgen/pipeline.hpp"
#include "tpgen/planner.hpp"
#include "tpgen/plot.hpp"
#include "tpgen/rng.hpp"
#include "tpgen/scenario.hpp"
#include "tpgen/segmentation.hpp"
#include "tpgen/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tpgen;

namespace {

void write_file(const std::string& path, const std::string& content) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

Vec2 parse_point(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("expected x,y but got '" + s + "'");
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

SyntheticSpec preset_spec(const std::string& name) {
    SyntheticSpec spec;
    spec.label = name;
    if (name == "stop_and_go") {
        // A decelerates to a stop, dwells, accelerates; B cruises past.
        spec.vehicles = {{"A", {100.0, 400.0}, {5.0, 0.0}},
                         {"B", {100.0, 600.0}, {5.0, 0.0}}};
        spec.regimes = {{40, {{-0.125, 0.0}, {0.0, 0.0}}},
                        {40, {{0.0, 0.0}, {0.0, 0.0}}},
                        {40, {{0.125, 0.0}, {0.0, 0.0}}}};
        spec.noise_std = 0.3;
    } else if (name == "negotiation") {
        // A decelerates to a stop while B waits, then B pulls away.
        spec.vehicles = {{"A", {100.0, 480.0}, {6.0, 0.0}},
                         {"B", {520.0, 520.0}, {0.0, 0.0}}};
        spec.regimes = {{40, {{-0.15, 0.0}, {0.0, 0.0}}},
                        {40, {{0.0, 0.0}, {0.0, 0.0}}},
                        {40, {{0.0, 0.0}, {0.1, 0.05}}}};
        spec.noise_std = 0.5;
    } else if (name == "crossing") {
        // Constant-speed orthogonal crossing with an acceleration change.
        spec.vehicles = {{"A", {100.0, 500.0}, {6.0, 0.0}},
                         {"B", {500.0, 100.0}, {0.0, 6.0}}};
        spec.regimes = {{50, {{0.0, 0.0}, {0.0, 0.0}}},
                        {50, {{0.08, 0.0}, {0.0, -0.08}}}};
        spec.noise_std = 0.5;
    } else {
        throw std::runtime_error("unknown preset '" + name +
                                 "' (try stop_and_go, negotiation, crossing)");
    }
    return spec;
}

SyntheticSpec spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synth spec '" + path + "'");
    json j = json::parse(in);
    SyntheticSpec spec;
    spec.label = j.value("label", "synthetic");
    spec.noise_std = j.value("noise_std", 0.0);
    spec.timestep = j.value("timestep", 0.1);
    for (const auto& v : j.at("vehicles"))
        spec.vehicles.push_back({v.at("vehicle_id").get<std::string>(),
                                 {v.at("position").at(0).get<double>(),
                                  v.at("position").at(1).get<double>()},
                                 {v.at("velocity").at(0).get<double>(),
                                  v.at("velocity").at(1).get<double>()}});
    for (const auto& r : j.at("regimes")) {
        Regime regime;
        regime.duration = r.at("duration").get<int>();
        for (const auto& a : r.at("accelerations"))
            regime.accelerations.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        spec.regimes.push_back(std::move(regime));
    }
    return spec;
}

json path_to_json(const PlannedPath& path) {
    json waypoints = json::array();
    for (const Vec2& p : path.waypoints) waypoints.push_back({p.x, p.y});
    return json{{"waypoints", waypoints},
                {"cost", path.cost},
                {"nodes_start_tree", path.nodes_start_tree},
                {"nodes_goal_tree", path.nodes_goal_tree},
                {"connections", path.connections}};
}

void write_generation_outputs(const GenerationResult& result, const PipelineConfig& cfg,
                              const GridMap& map) {
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    json audits = json::array();
    for (std::size_t k = 0; k < result.scenarios.size(); ++k) {
        const auto& gen = result.scenarios[k];
        write_file((out_dir / ("scenario_" + std::to_string(k) + ".json")).string(),
                   gen.to_json() + "\n");
        audits.push_back({{"draw_index", gen.draw_index},
                          {"min_separation", gen.min_sep},
                          {"endpoint_residual", gen.endpoint_residual}});
        if (cfg.write_plots)
            plot_scenario(gen.scenario, map,
                          (out_dir / "plots" / ("scenario_" + std::to_string(k) + ".svg")).string(),
                          gen.changepoints);
    }
    json report{{"n_generated", result.scenarios.size()},
                {"draws_used", result.draws_used},
                {"acceptance_rate",
                 result.draws_used > 0
                     ? static_cast<double>(result.scenarios.size()) / result.draws_used
                     : 0.0},
                {"changepoints", result.changepoints},
                {"transform",
                 {{"rotation_angle", result.transform.rotation_angle},
                  {"scale", result.transform.scale}}},
                {"seed", cfg.seed}};
    write_file((out_dir / "report.json").string(), report.dump(2) + "\n");
}

int run(int argc, char** argv) {
    CLI::App app{"Traffic-primitive scenario extraction and generation"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Emit a synthetic fixture scenario");
    std::string synth_preset = "stop_and_go", synth_spec_path, synth_out = "scenario.json";
    std::string synth_truth_out;
    std::uint64_t synth_seed = 0;
    double synth_noise = -1.0;
    synth->add_option("--preset", synth_preset, "stop_and_go | negotiation | crossing");
    synth->add_option("--spec", synth_spec_path, "JSON spec file (overrides --preset)");
    synth->add_option("--out", synth_out, "output scenario JSON");
    synth->add_option("--truth-out", synth_truth_out, "ground-truth changepoints JSON");
    synth->add_option("--seed", synth_seed);
    synth->add_option("--noise", synth_noise, "override position noise std");
    synth->callback([&] {
        SyntheticSpec spec = synth_spec_path.empty() ? preset_spec(synth_preset)
                                                     : spec_from_json_file(synth_spec_path);
        if (synth_noise >= 0.0) spec.noise_std = synth_noise;
        const SyntheticScenario synthetic = make_synthetic_scenario(spec, synth_seed);
        write_file(synth_out, scenario_to_json(synthetic.scenario) + "\n");
        const json truth{{"changepoints", synthetic.changepoints}};
        if (!synth_truth_out.empty()) write_file(synth_truth_out, truth.dump(2) + "\n");
        std::cout << truth.dump() << "\n";
    });

    // --- segment ---
    auto* segment = app.add_subcommand("segment", "Extract traffic primitives");
    std::string seg_scenario, seg_out = "segmentation.json";
    StickyHdpHmmConfig seg_cfg;
    segment->add_option("--scenario", seg_scenario, "scenario CSV or JSON")->required();
    segment->add_option("--out", seg_out);
    segment->add_option("--iterations", seg_cfg.iterations, "Gibbs sweeps")
        ->default_val(200);
    segment->add_option("--truncation", seg_cfg.truncation_L);
    segment->add_option("--gamma", seg_cfg.gamma);
    segment->add_option("--alpha", seg_cfg.alpha);
    segment->add_option("--kappa", seg_cfg.kappa);
    segment->add_option("--min-primitive-len", seg_cfg.min_primitive_len);
    segment->add_option("--seed", seg_cfg.seed);
    segment->callback([&] {
        const Scenario scenario = load_scenario_any(seg_scenario);
        const SegmentationResult result = fit_sticky_hdphmm(featurize(scenario), seg_cfg);
        write_file(seg_out, result.to_json() + "\n");
        std::cout << json{{"changepoints", result.changepoints}}.dump() << "\n";
    });

    // --- transform ---
    auto* transform = app.add_subcommand("transform", "Map changepoints onto target frame");
    std::string tr_config, tr_segmentation, tr_out = "skeleton.json";
    transform->add_option("--config", tr_config, "pipeline config JSON")->required();
    transform->add_option("--segmentation", tr_segmentation, "segmentation JSON")->required();
    transform->add_option("--out", tr_out);
    transform->callback([&] {
        const PipelineConfig cfg = PipelineConfig::load(tr_config);
        const Scenario scenario = load_scenario_any(cfg.scenario_path);
        std::ifstream in(tr_segmentation);
        if (!in) throw std::runtime_error("cannot open '" + tr_segmentation + "'");
        const json seg_json = json::parse(in);
        SegmentationResult seg;
        seg.changepoints = seg_json.at("changepoints").get<std::vector<int>>();
        std::map<std::string, TargetEndpoints> targets;
        for (const auto& [id, t] : cfg.targets) targets[id] = {t.q_start, t.q_end};
        std::string reference = cfg.reference_vehicle;
        if (reference.empty()) {
            double best = -1.0;
            for (const auto& v : scenario.vehicles) {
                const double d = distance(v.positions.front(), v.positions.back());
                if (d > best) {
                    best = d;
                    reference = v.vehicle_id;
                }
            }
        }
        const ScenarioSkeleton skeleton =
            transform_scenario_skeleton(seg, scenario, targets, reference);
        write_file(tr_out, skeleton.to_json() + "\n");
        std::cout << json{{"scale", skeleton.transform.scale},
                          {"rotation_angle", skeleton.transform.rotation_angle}}
                         .dump()
                  << "\n";
    });

    // --- plan ---
    auto* plan_cmd = app.add_subcommand("plan", "Plan a collision-free path");
    std::string plan_map, plan_from, plan_to, plan_out = "path.json";
    PlannerConfig plan_cfg;
    plan_cmd->add_option("--map", plan_map, "grid map JSON")->required();
    plan_cmd->add_option("--from", plan_from, "start x,y")->required();
    plan_cmd->add_option("--to", plan_to, "goal x,y")->required();
    plan_cmd->add_option("--out", plan_out);
    plan_cmd->add_option("--step", plan_cfg.step_size)->default_val(5.0);
    plan_cmd->add_option("--iterations", plan_cfg.max_iterations)->default_val(5000);
    plan_cmd->add_option("--gamma-rrt", plan_cfg.gamma_rrt);
    plan_cmd->add_option("--zeta", plan_cfg.zeta);
    plan_cmd->add_option("--seed", plan_cfg.seed);
    plan_cmd->callback([&] {
        const GridMap map = GridMap::load(plan_map);
        const PlannedPath path =
            plan(map, parse_point(plan_from), parse_point(plan_to), plan_cfg);
        write_file(plan_out, path_to_json(path).dump(2) + "\n");
        std::cout << json{{"cost", path.cost}, {"waypoints", path.waypoints.size()}}.dump()
                  << "\n";
    });

    // --- generate / ablate ---
    for (const bool with_cps : {true, false}) {
        auto* cmd = app.add_subcommand(
            with_cps ? "generate" : "ablate",
            with_cps ? "Generate scenarios via traffic primitives"
                     : "Generate baseline scenarios without changepoints");
        auto config_path = std::make_shared<std::string>();
        auto seed_override = std::make_shared<std::int64_t>(-1);
        auto n_override = std::make_shared<int>(-1);
        auto out_override = std::make_shared<std::string>();
        cmd->add_option("--config", *config_path, "pipeline config JSON")->required();
        cmd->add_option("--seed", *seed_override, "override config seed");
        cmd->add_option("--n", *n_override, "override n_generate");
        cmd->add_option("--out", *out_override, "override output directory");
        cmd->callback([config_path, seed_override, n_override, out_override, with_cps] {
            PipelineConfig cfg = PipelineConfig::load(*config_path);
            if (*seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(*seed_override);
            if (*n_override > 0) cfg.n_generate = *n_override;
            if (!out_override->empty()) cfg.output_dir = *out_override;
            const Scenario scenario = load_scenario_any(cfg.scenario_path);
            const GridMap map = GridMap::load(cfg.map_path);
            const GenerationResult result = with_cps
                                                ? generate(cfg, scenario, map)
                                                : generate_without_changepoints(cfg, scenario, map);
            write_generation_outputs(result, cfg, map);
            std::cout << json{{"n_generated", result.scenarios.size()},
                              {"draws_used", result.draws_used},
                              {"changepoints", result.changepoints}}
                             .dump()
                      << "\n";
        });
    }

    // --- evaluate ---
    auto* evaluate = app.add_subcommand("evaluate", "DTW comparison against a template");
    std::string eval_template, eval_generated, eval_out = "report.json";
    bool eval_matrices = false;
    evaluate->add_option("--template", eval_template, "template scenario JSON/CSV")->required();
    evaluate->add_option("--generated", eval_generated, "directory of scenario_<k>.json")
        ->required();
    evaluate->add_option("--out", eval_out, "report path");
    evaluate->add_flag("--matrices", eval_matrices, "write features_<k>.json with matrices");
    evaluate->callback([&] {
        const Scenario templ = load_scenario_any(eval_template);
        if (templ.num_vehicles() < 2)
            throw std::runtime_error("evaluation needs at least two vehicles");
        std::vector<Scenario> generated;
        for (int k = 0;; ++k) {
            const fs::path p = fs::path(eval_generated) / ("scenario_" + std::to_string(k) + ".json");
            if (!fs::exists(p)) break;
            std::ifstream in(p);
            const json j = json::parse(in);
            generated.push_back(scenario_from_json(j.at("scenario").dump()));
        }
        if (generated.empty())
            throw std::runtime_error("no scenario_<k>.json files in '" + eval_generated + "'");

        json report{{"n_generated", generated.size()}, {"pairs", json::array()}};
        const auto& vehicles = templ.vehicles;
        for (std::size_t a = 0; a < vehicles.size(); ++a)
            for (std::size_t b = a + 1; b < vehicles.size(); ++b) {
                const auto& id_a = vehicles[a].vehicle_id;
                const auto& id_b = vehicles[b].vehicle_id;
                const InteractionFeature templ_f =
                    scenario_interaction_feature(templ, id_a, id_b);
                std::vector<DtwFeature> traj, speed;
                json per_scenario = json::array();
                for (std::size_t k = 0; k < generated.size(); ++k) {
                    const InteractionFeature f =
                        scenario_interaction_feature(generated[k], id_a, id_b);
                    traj.push_back(f.trajectory);
                    speed.push_back(f.speed);
                    per_scenario.push_back(
                        {{"scenario", k},
                         {"trajectory_discrepancy",
                          feature_discrepancy(f.trajectory, templ_f.trajectory)},
                         {"speed_discrepancy", feature_discrepancy(f.speed, templ_f.speed)}});
                    if (eval_matrices) {
                        const json feat{{"vehicle_a", id_a},
                                        {"vehicle_b", id_b},
                                        {"trajectory", json::parse(f.trajectory.to_json())},
                                        {"speed", json::parse(f.speed.to_json())}};
                        write_file((fs::path(eval_generated) /
                                    ("features_" + std::to_string(k) + ".json"))
                                       .string(),
                                   feat.dump(2) + "\n");
                    }
                }
                const int rows = static_cast<int>(templ_f.trajectory.matrix.rows());
                const int cols = static_cast<int>(templ_f.trajectory.matrix.cols());
                const DtwFeature mean_traj = aggregate_features(traj, rows, cols);
                const DtwFeature mean_speed = aggregate_features(speed, rows, cols);
                report["pairs"].push_back(
                    {{"vehicle_a", id_a},
                     {"vehicle_b", id_b},
                     {"mean_trajectory_discrepancy",
                      feature_discrepancy(mean_traj, templ_f.trajectory)},
                     {"mean_speed_discrepancy", feature_discrepancy(mean_speed, templ_f.speed)},
                     {"per_scenario", per_scenario}});
            }
        write_file(eval_out, report.dump(2) + "\n");
        std::cout << json{{"n_generated", generated.size()}}.dump() << "\n";
    });

    // --- plot ---
    auto* plot = app.add_subcommand("plot", "Render a scenario to SVG");
    std::string plot_scenario_path, plot_map_path, plot_out = "scenario.svg";
    std::vector<int> plot_cps;
    plot->add_option("--scenario", plot_scenario_path)->required();
    plot->add_option("--map", plot_map_path, "grid map JSON (default: empty 1000x1000)");
    plot->add_option("--out", plot_out);
    plot->add_option("--changepoints", plot_cps, "changepoint indices to mark");
    plot->callback([&] {
        const Scenario scenario = load_scenario_any(plot_scenario_path);
        const GridMap map = plot_map_path.empty() ? GridMap{} : GridMap::load(plot_map_path);
        if (const fs::path parent = fs::path(plot_out).parent_path(); !parent.empty())
            fs::create_directories(parent);
        plot_scenario(scenario, map, plot_out, plot_cps);
        std::cout << json{{"out", plot_out}}.dump() << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
