#include "tpgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tpgen/rng.hpp"

namespace tpgen {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

constexpr double kEndpointNoiseVar = 1e-8;   // pins targets to ~1e-4 std
constexpr double kEndpointTolerance = 1e-3;

enum SeedTag : std::uint64_t { kSegment = 1, kPlan = 2, kGp = 3 };

}  // namespace

void PipelineConfig::validate() const {
    if (n_generate < 1) throw std::invalid_argument("n_generate must be >= 1");
    if (min_separation_threshold < 0.0)
        throw std::invalid_argument("min_separation_threshold must be >= 0");
    if (retry_factor < 1) throw std::invalid_argument("retry_factor must be >= 1");
    if (degenerate_eps < 0.0) throw std::invalid_argument("degenerate_eps must be >= 0");
    planner.validate();
    gp.validate();
}

Scenario load_scenario_any(const std::string& path, double timestep) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return load_scenario(path, ScenarioFormat::csv, timestep);
    return load_scenario_json(path);
}

namespace {

std::string pick_reference(const PipelineConfig& cfg, const Scenario& scenario) {
    if (!cfg.reference_vehicle.empty()) return cfg.reference_vehicle;
    std::string best;
    double best_disp = -1.0;
    for (const auto& v : scenario.vehicles) {
        const double disp = distance(v.positions.front(), v.positions.back());
        if (disp > best_disp) {
            best_disp = disp;
            best = v.vehicle_id;
        }
    }
    return best;
}

std::map<std::string, TargetEndpoints> position_targets(const PipelineConfig& cfg) {
    std::map<std::string, TargetEndpoints> out;
    for (const auto& [id, t] : cfg.targets) out[id] = TargetEndpoints{t.q_start, t.q_end};
    return out;
}

}  // namespace

std::vector<VehicleTraining> build_training_sets(const PipelineConfig& cfg,
                                                 const Scenario& scenario, const GridMap& map,
                                                 const std::vector<int>& changepoints) {
    SegmentationResult seg;
    seg.changepoints = changepoints;
    const std::string reference = pick_reference(cfg, scenario);
    ScenarioSkeleton skeleton =
        transform_scenario_skeleton(seg, scenario, position_targets(cfg), reference);

    // Targets override the transformed endpoints and boundary speeds; interior
    // changepoints stay where the shared transform put them.
    for (auto& v : skeleton.vehicles) {
        const VehicleTargets& t = cfg.targets.at(v.vehicle_id);
        v.boundary_points.front() = t.q_start;
        v.boundary_points.back() = t.q_end;
        v.boundary_speeds.front() = t.v_start;
        v.boundary_speeds.back() = t.v_end;
    }

    std::vector<VehicleTraining> out;
    for (std::size_t vi = 0; vi < skeleton.vehicles.size(); ++vi) {
        const auto& v = skeleton.vehicles[vi];
        VehicleTraining training;
        training.vehicle_id = v.vehicle_id;
        std::vector<double> times, xs, ys;
        const int n_seg = static_cast<int>(v.boundary_times.size()) - 1;
        for (int k = 0; k < n_seg; ++k) {
            const int t0 = v.boundary_times[k];
            const int t1 = v.boundary_times[k + 1];
            const Vec2 p0 = v.boundary_points[k];
            const Vec2 p1 = v.boundary_points[k + 1];
            const int duration = t1 - t0;

            TrainingPoints pts;
            if (duration < 2 || distance(p0, p1) <= cfg.degenerate_eps) {
                // Stationary or single-step primitive: no plan, points pinned
                // at the boundary (linear blend keeps the endpoints exact).
                for (int t = 0; t <= duration; ++t) {
                    const double f = static_cast<double>(t) / duration;
                    const Vec2 p = p0 + (p1 - p0) * f;
                    pts.times.push_back(t);
                    pts.xs.push_back(p.x);
                    pts.ys.push_back(p.y);
                }
            } else {
                PlannerConfig pc = cfg.planner;
                pc.seed = mix_seed(cfg.seed, kPlan, vi, k);
                const PlannedPath path = plan(map, p0, p1, pc);
                training.planner_costs.push_back(path.cost);
                pts = synthesize_training_points(path.waypoints, v.boundary_speeds[k],
                                                 v.boundary_speeds[k + 1], duration);
                training.uniform_fallback |= pts.uniform_fallback;
            }
            const std::size_t skip = k > 0 ? 1 : 0;  // boundary point is shared
            for (std::size_t i = skip; i < pts.times.size(); ++i) {
                times.push_back(pts.times[i] + t0);
                xs.push_back(pts.xs[i]);
                ys.push_back(pts.ys[i]);
            }
        }
        const int n = static_cast<int>(times.size());
        training.times = Eigen::Map<VectorXd>(times.data(), n);
        training.xs = Eigen::Map<VectorXd>(xs.data(), n);
        training.ys = Eigen::Map<VectorXd>(ys.data(), n);
        training.noise_var = VectorXd::Constant(n, cfg.gp.sigma_n * cfg.gp.sigma_n);
        training.noise_var(0) = kEndpointNoiseVar;
        training.noise_var(n - 1) = kEndpointNoiseVar;
        out.push_back(std::move(training));
    }
    return out;
}

namespace {

struct CoordSampler {
    VectorXd mean;
    MatrixXd factor;
    Rng rng;

    VectorXd draw() {
        VectorXd z(mean.size());
        for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
        return mean + factor * z;
    }
};

GenerationResult run_pipeline(const PipelineConfig& cfg, const Scenario& scenario,
                              const GridMap& map, bool use_changepoints) {
    cfg.validate();
    scenario.validate();
    map.validate();
    const int T = scenario.length();
    for (const auto& v : scenario.vehicles)
        if (!cfg.targets.count(v.vehicle_id))
            throw std::invalid_argument("config has no targets for vehicle '" +
                                        v.vehicle_id + "'");

    GenerationResult result;
    if (use_changepoints) {
        StickyHdpHmmConfig seg_cfg = cfg.segmentation;
        seg_cfg.seed = mix_seed(cfg.seed, kSegment);
        const SegmentationResult seg = fit_sticky_hdphmm(featurize(scenario), seg_cfg);
        result.changepoints = seg.changepoints;
    }

    result.training = build_training_sets(cfg, scenario, map, result.changepoints);
    const std::string reference = pick_reference(cfg, scenario);
    const auto& ref_track = scenario.track(reference);
    const auto& ref_targets = cfg.targets.at(reference);
    result.transform = compute_transform(ref_track.positions.front(),
                                         ref_track.positions.back(), ref_targets.q_start,
                                         ref_targets.q_end);

    // One GP per coordinate per vehicle; posteriors are factorized once and
    // shared across all draws.
    VectorXd x_star(T);
    for (int t = 0; t < T; ++t) x_star(t) = t;
    std::vector<std::array<CoordSampler, 2>> samplers;
    for (std::size_t vi = 0; vi < result.training.size(); ++vi) {
        const auto& tr = result.training[vi];
        std::array<CoordSampler, 2> pair{
            CoordSampler{{}, {}, Rng(mix_seed(cfg.seed, kGp, vi, 0))},
            CoordSampler{{}, {}, Rng(mix_seed(cfg.seed, kGp, vi, 1))}};
        for (int c = 0; c < 2; ++c) {
            const VectorXd& y = c == 0 ? tr.xs : tr.ys;
            GpModel model(tr.times, y, cfg.gp, tr.noise_var, PriorMode::fitted_poly, 3);
            MatrixXd cov;
            model.posterior(x_star, pair[c].mean, cov);
            pair[c].factor = psd_sampling_factor(cov);
        }
        samplers.push_back(std::move(pair));
    }

    const int budget = cfg.retry_factor * cfg.n_generate;
    int draw_index = 0;
    while (static_cast<int>(result.scenarios.size()) < cfg.n_generate &&
           draw_index < budget) {
        GeneratedScenario gen;
        gen.template_label = scenario.label;
        gen.seed = cfg.seed;
        gen.draw_index = draw_index;
        gen.changepoints = result.changepoints;
        gen.scenario.label = "generated_" + std::to_string(draw_index);

        for (std::size_t vi = 0; vi < result.training.size(); ++vi) {
            const VectorXd gx = samplers[vi][0].draw();
            const VectorXd gy = samplers[vi][1].draw();
            VehicleTrack track;
            track.vehicle_id = result.training[vi].vehicle_id;
            track.timestep = scenario.vehicles[vi].timestep;
            for (int t = 0; t < T; ++t) track.positions.push_back({gx(t), gy(t)});
            track.speeds = derive_speeds(track.positions, 1.0);
            gen.scenario.vehicles.push_back(std::move(track));
            gen.planner_costs[result.training[vi].vehicle_id] =
                result.training[vi].planner_costs;
            gen.uniform_fallback |= result.training[vi].uniform_fallback;
        }
        ++draw_index;

        // Audit: endpoint residuals, free space, inter-vehicle separation.
        double residual = 0.0;
        bool free_ok = true;
        for (const auto& track : gen.scenario.vehicles) {
            const VehicleTargets& t = cfg.targets.at(track.vehicle_id);
            residual = std::max(residual, distance(track.positions.front(), t.q_start));
            residual = std::max(residual, distance(track.positions.back(), t.q_end));
            for (const Vec2& p : track.positions)
                if (!map.is_free(p)) {
                    free_ok = false;
                    break;
                }
            if (!free_ok) break;
        }
        gen.endpoint_residual = residual;
        gen.min_sep = min_separation(gen.scenario);
        if (residual < kEndpointTolerance && free_ok &&
            gen.min_sep >= cfg.min_separation_threshold)
            result.scenarios.push_back(std::move(gen));
    }
    result.draws_used = draw_index;
    if (static_cast<int>(result.scenarios.size()) < cfg.n_generate) {
        std::ostringstream msg;
        msg << "draw budget exhausted: accepted " << result.scenarios.size() << "/"
            << cfg.n_generate << " after " << draw_index << " draws (acceptance rate "
            << (draw_index > 0 ? static_cast<double>(result.scenarios.size()) / draw_index
                               : 0.0)
            << ")";
        throw PipelineError(msg.str());
    }
    return result;
}

}  // namespace

GenerationResult generate(const PipelineConfig& cfg, const Scenario& scenario,
                          const GridMap& map) {
    return run_pipeline(cfg, scenario, map, true);
}

GenerationResult generate_without_changepoints(const PipelineConfig& cfg,
                                               const Scenario& scenario,
                                               const GridMap& map) {
    return run_pipeline(cfg, scenario, map, false);
}

GenerationResult run_generate(const PipelineConfig& cfg, bool use_changepoints) {
    const Scenario scenario = load_scenario_any(cfg.scenario_path);
    const GridMap map = GridMap::load(cfg.map_path);
    return use_changepoints ? generate(cfg, scenario, map)
                            : generate_without_changepoints(cfg, scenario, map);
}

std::string GeneratedScenario::to_json() const {
    json costs = json::object();
    for (const auto& [id, c] : planner_costs) costs[id] = c;
    json j{{"scenario", json::parse(scenario_to_json(scenario))},
           {"provenance",
            {{"template_label", template_label},
             {"seed", seed},
             {"draw_index", draw_index},
             {"changepoints", changepoints},
             {"planner_costs", costs},
             {"uniform_fallback", uniform_fallback}}},
           {"audit", {{"min_separation", min_sep}, {"endpoint_residual", endpoint_residual}}}};
    return j.dump(2);
}

namespace {

Vec2 parse_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    PipelineConfig cfg;
    cfg.scenario_path = j.value("scenario", "");
    cfg.map_path = j.value("map", "");
    cfg.reference_vehicle = j.value("reference_vehicle", "");
    for (const auto& [id, t] : j.value("targets", json::object()).items()) {
        VehicleTargets vt;
        vt.q_start = parse_vec2(t.at("q_start"));
        vt.q_end = parse_vec2(t.at("q_end"));
        vt.v_start = t.value("v_start", 0.0);
        vt.v_end = t.value("v_end", 0.0);
        cfg.targets[id] = vt;
    }
    if (j.count("segmentation")) {
        const auto& s = j.at("segmentation");
        cfg.segmentation.truncation_L = s.value("truncation_L", cfg.segmentation.truncation_L);
        cfg.segmentation.gamma = s.value("gamma", cfg.segmentation.gamma);
        cfg.segmentation.alpha = s.value("alpha", cfg.segmentation.alpha);
        cfg.segmentation.kappa = s.value("kappa", cfg.segmentation.kappa);
        cfg.segmentation.iterations = s.value("iterations", cfg.segmentation.iterations);
        cfg.segmentation.min_primitive_len =
            s.value("min_primitive_len", cfg.segmentation.min_primitive_len);
    }
    if (j.count("planner")) {
        const auto& p = j.at("planner");
        cfg.planner.step_size = p.value("step_size", cfg.planner.step_size);
        cfg.planner.max_iterations = p.value("max_iterations", cfg.planner.max_iterations);
        cfg.planner.gamma_rrt = p.value("gamma_rrt", cfg.planner.gamma_rrt);
        cfg.planner.zeta = p.value("zeta", cfg.planner.zeta);
        cfg.planner.goal_tolerance = p.value("goal_tolerance", cfg.planner.goal_tolerance);
    }
    if (j.count("gp")) {
        const auto& g = j.at("gp");
        cfg.gp.sigma_omega = g.value("sigma_omega", cfg.gp.sigma_omega);
        cfg.gp.sigma_f = g.value("sigma_f", cfg.gp.sigma_f);
        cfg.gp.length_scale = g.value("length_scale", cfg.gp.length_scale);
        cfg.gp.sigma_n = g.value("sigma_n", cfg.gp.sigma_n);
    }
    cfg.n_generate = j.value("n_generate", cfg.n_generate);
    cfg.min_separation_threshold =
        j.value("min_separation_threshold", cfg.min_separation_threshold);
    cfg.retry_factor = j.value("retry_factor", cfg.retry_factor);
    cfg.degenerate_eps = j.value("degenerate_eps", cfg.degenerate_eps);
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.write_plots = j.value("write_plots", cfg.write_plots);
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string PipelineConfig::to_json() const {
    json targets_json = json::object();
    for (const auto& [id, t] : targets)
        targets_json[id] = {{"q_start", {t.q_start.x, t.q_start.y}},
                            {"q_end", {t.q_end.x, t.q_end.y}},
                            {"v_start", t.v_start},
                            {"v_end", t.v_end}};
    json j{{"scenario", scenario_path},
           {"map", map_path},
           {"reference_vehicle", reference_vehicle},
           {"targets", targets_json},
           {"segmentation",
            {{"truncation_L", segmentation.truncation_L},
             {"gamma", segmentation.gamma},
             {"alpha", segmentation.alpha},
             {"kappa", segmentation.kappa},
             {"iterations", segmentation.iterations},
             {"min_primitive_len", segmentation.min_primitive_len}}},
           {"planner",
            {{"step_size", planner.step_size},
             {"max_iterations", planner.max_iterations},
             {"gamma_rrt", planner.gamma_rrt},
             {"zeta", planner.zeta},
             {"goal_tolerance", planner.goal_tolerance}}},
           {"gp",
            {{"sigma_omega", gp.sigma_omega},
             {"sigma_f", gp.sigma_f},
             {"length_scale", gp.length_scale},
             {"sigma_n", gp.sigma_n}}},
           {"n_generate", n_generate},
           {"min_separation_threshold", min_separation_threshold},
           {"retry_factor", retry_factor},
           {"degenerate_eps", degenerate_eps},
           {"seed", seed},
           {"output_dir", output_dir},
           {"write_plots", write_plots}};
    return j.dump(2);
}

}  // namespace tpgen
