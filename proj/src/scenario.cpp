#include "tpgen/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tpgen/rng.hpp"

namespace tpgen {

using nlohmann::json;

std::vector<double> cumulative_lengths(const std::vector<Vec2>& polyline) {
    std::vector<double> cum(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i)
        cum[i] = cum[i - 1] + distance(polyline[i - 1], polyline[i]);
    return cum;
}

Vec2 point_at_arc_length(const std::vector<Vec2>& polyline,
                         const std::vector<double>& cumulative, double s) {
    if (polyline.empty()) throw std::invalid_argument("empty polyline");
    if (polyline.size() == 1 || s <= 0.0) return polyline.front();
    const double total = cumulative.back();
    if (s >= total) return polyline.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - cumulative.begin());
    const std::size_t lo = hi - 1;
    const double seg = cumulative[hi] - cumulative[lo];
    if (seg <= 0.0) return polyline[lo];
    const double f = (s - cumulative[lo]) / seg;
    return polyline[lo] + (polyline[hi] - polyline[lo]) * f;
}

void VehicleTrack::validate() const {
    if (positions.size() < 2)
        throw std::invalid_argument("track '" + vehicle_id + "': needs at least 2 samples");
    if (speeds.size() != positions.size())
        throw std::invalid_argument("track '" + vehicle_id + "': positions/speeds length mismatch");
    if (!(timestep > 0.0))
        throw std::invalid_argument("track '" + vehicle_id + "': timestep must be positive");
    for (const Vec2& p : positions)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("track '" + vehicle_id + "': non-finite position");
    for (double v : speeds)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("track '" + vehicle_id + "': speeds must be finite and >= 0");
}

const VehicleTrack& Scenario::track(const std::string& vehicle_id) const {
    for (const auto& v : vehicles)
        if (v.vehicle_id == vehicle_id) return v;
    throw std::invalid_argument("unknown vehicle '" + vehicle_id + "'");
}

void Scenario::validate() const {
    if (vehicles.empty())
        throw std::invalid_argument("scenario needs at least one vehicle");
    const int T = vehicles.front().length();
    const double dt = vehicles.front().timestep;
    std::set<std::string> ids;
    for (const auto& v : vehicles) {
        v.validate();
        if (v.length() != T)
            throw std::invalid_argument("ragged time ranges: vehicle '" + v.vehicle_id +
                                        "' has T=" + std::to_string(v.length()) +
                                        ", expected " + std::to_string(T));
        if (v.timestep != dt)
            throw std::invalid_argument("vehicles disagree on timestep");
        if (!ids.insert(v.vehicle_id).second)
            throw std::invalid_argument("duplicate vehicle id '" + v.vehicle_id + "'");
    }
}

std::vector<double> derive_speeds(const std::vector<Vec2>& positions, double d_t) {
    if (positions.size() < 2)
        throw std::invalid_argument("derive_speeds: need at least 2 positions");
    if (!(d_t > 0.0))
        throw std::invalid_argument("derive_speeds: d_t must be positive");
    const int T = static_cast<int>(positions.size());
    const int d = std::max(1, static_cast<int>(std::lround(d_t)));
    if (d >= T)
        throw std::invalid_argument("derive_speeds: d_t exceeds sequence length");
    std::vector<double> speeds(T);
    for (int t = 0; t + d < T; ++t)
        speeds[t] = distance(positions[t + d], positions[t]) / d_t;
    for (int t = T - d; t < T; ++t) speeds[t] = speeds[T - d - 1];
    return speeds;
}

namespace {

struct CsvRow {
    long t;
    std::string vehicle_id;
    double x, y, speed;
    bool has_speed;
};

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw std::invalid_argument("bad " + what + " value '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Scenario load_scenario(const std::string& path, ScenarioFormat format, double timestep) {
    if (format != ScenarioFormat::csv)
        throw std::invalid_argument("unsupported scenario format");
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty scenario file '" + path + "'");
    auto header = split_csv_line(line);
    bool has_speed = false;
    if (header.size() == 5 && header[4] == "speed")
        has_speed = true;
    else if (header.size() != 4)
        throw std::runtime_error("expected header t,vehicle_id,x,y[,speed]");
    if (header[0] != "t" || header[1] != "vehicle_id" || header[2] != "x" || header[3] != "y")
        throw std::runtime_error("expected header t,vehicle_id,x,y[,speed]");

    std::vector<CsvRow> rows;
    std::set<std::pair<long, std::string>> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw std::runtime_error("line " + std::to_string(lineno) + ": wrong field count");
        CsvRow r;
        r.t = static_cast<long>(parse_double(f[0], "t"));
        r.vehicle_id = f[1];
        r.x = parse_double(f[2], "x");
        r.y = parse_double(f[3], "y");
        r.has_speed = has_speed;
        r.speed = has_speed ? parse_double(f[4], "speed") : 0.0;
        if (!std::isfinite(r.x) || !std::isfinite(r.y) || (has_speed && !std::isfinite(r.speed)))
            throw std::runtime_error("line " + std::to_string(lineno) + ": non-finite value");
        if (!seen.insert({r.t, r.vehicle_id}).second)
            throw std::runtime_error("duplicate (time, vehicle) row t=" + std::to_string(r.t) +
                                     " vehicle=" + r.vehicle_id);
        rows.push_back(std::move(r));
    }
    if (rows.empty())
        throw std::runtime_error("scenario file '" + path + "' has no data rows");

    // Group per vehicle, preserving first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<CsvRow>> per_vehicle;
    for (auto& r : rows) {
        if (!per_vehicle.count(r.vehicle_id)) order.push_back(r.vehicle_id);
        per_vehicle[r.vehicle_id].push_back(r);
    }

    const std::size_t T = per_vehicle[order.front()].size();
    Scenario scenario;
    scenario.label = path;
    for (const auto& id : order) {
        auto& vrows = per_vehicle[id];
        if (vrows.size() != T)
            throw std::runtime_error("ragged time ranges: vehicle '" + id + "' has " +
                                     std::to_string(vrows.size()) + " rows, expected " +
                                     std::to_string(T));
        std::sort(vrows.begin(), vrows.end(),
                  [](const CsvRow& a, const CsvRow& b) { return a.t < b.t; });
        for (std::size_t i = 0; i < vrows.size(); ++i)
            if (vrows[i].t != static_cast<long>(i))
                throw std::runtime_error("vehicle '" + id +
                                         "': time indices must be 0-based and contiguous");
        VehicleTrack track;
        track.vehicle_id = id;
        track.timestep = timestep;
        for (const auto& r : vrows) track.positions.push_back({r.x, r.y});
        if (has_speed)
            for (const auto& r : vrows) track.speeds.push_back(r.speed);
        else
            track.speeds = derive_speeds(track.positions);
        scenario.vehicles.push_back(std::move(track));
    }
    scenario.validate();
    return scenario;
}

ObservationMatrix ObservationMatrix::from_raw(const Eigen::MatrixXd& raw) {
    const int T = static_cast<int>(raw.rows());
    const int D = static_cast<int>(raw.cols());
    if (T < 1 || D < 1) throw std::invalid_argument("empty observation matrix");
    ObservationMatrix obs;
    obs.values.resize(T, D);
    obs.means.resize(D);
    obs.stds.resize(D);
    for (int j = 0; j < D; ++j) {
        const double mean = raw.col(j).mean();
        const double var = (raw.col(j).array() - mean).square().sum() / T;
        const double std = std::sqrt(var);
        obs.means[j] = mean;
        if (std > 0.0) {
            obs.stds[j] = std;
            obs.values.col(j) = (raw.col(j).array() - mean) / std;
        } else {
            obs.stds[j] = 0.0;
            obs.values.col(j).setZero();
        }
    }
    return obs;
}

Eigen::MatrixXd ObservationMatrix::unstandardize() const {
    Eigen::MatrixXd raw(values.rows(), values.cols());
    for (int j = 0; j < values.cols(); ++j) {
        const double s = stds[j] > 0.0 ? stds[j] : 0.0;
        raw.col(j) = values.col(j).array() * s + means[j];
    }
    return raw;
}

ObservationMatrix featurize(const Scenario& scenario) {
    scenario.validate();
    const int T = scenario.length();
    const int N = scenario.num_vehicles();
    Eigen::MatrixXd raw(T, 3 * N);
    for (int n = 0; n < N; ++n) {
        const auto& v = scenario.vehicles[n];
        for (int t = 0; t < T; ++t) {
            raw(t, 3 * n + 0) = v.positions[t].x;
            raw(t, 3 * n + 1) = v.positions[t].y;
            raw(t, 3 * n + 2) = v.speeds[t];
        }
    }
    return ObservationMatrix::from_raw(raw);
}

namespace {

json track_to_json(const VehicleTrack& v) {
    json positions = json::array();
    for (const Vec2& p : v.positions) positions.push_back({p.x, p.y});
    return json{{"vehicle_id", v.vehicle_id},
                {"positions", positions},
                {"speeds", v.speeds},
                {"timestep", v.timestep}};
}

VehicleTrack track_from_json(const json& j) {
    VehicleTrack v;
    v.vehicle_id = j.at("vehicle_id").get<std::string>();
    for (const auto& p : j.at("positions"))
        v.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    v.speeds = j.at("speeds").get<std::vector<double>>();
    v.timestep = j.at("timestep").get<double>();
    return v;
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
    json vehicles = json::array();
    for (const auto& v : scenario.vehicles) vehicles.push_back(track_to_json(v));
    json j{{"label", scenario.label}, {"vehicles", vehicles}};
    return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
    const json j = json::parse(text);
    Scenario s;
    s.label = j.at("label").get<std::string>();
    for (const auto& v : j.at("vehicles")) s.vehicles.push_back(track_from_json(v));
    s.validate();
    return s;
}

void save_scenario_json(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << scenario_to_json(scenario) << "\n";
}

Scenario load_scenario_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

SyntheticScenario make_synthetic_scenario(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.regimes.empty())
        throw std::invalid_argument("make_synthetic_scenario: empty regime spec");
    if (spec.vehicles.empty())
        throw std::invalid_argument("make_synthetic_scenario: no vehicles");
    const int N = static_cast<int>(spec.vehicles.size());
    for (const auto& r : spec.regimes) {
        if (r.duration < 2)
            throw std::invalid_argument("make_synthetic_scenario: regime duration must be >= 2");
        if (static_cast<int>(r.accelerations.size()) != N)
            throw std::invalid_argument(
                "make_synthetic_scenario: regime needs one acceleration per vehicle");
    }

    SyntheticScenario out;
    out.scenario.label = spec.label;
    Rng rng(seed);

    // Sample t belongs to the regime active at time t; the step t -> t+1
    // integrates with that regime's acceleration.
    std::vector<int> regime_of_sample;
    for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
        if (r > 0) out.changepoints.push_back(static_cast<int>(regime_of_sample.size()));
        regime_of_sample.insert(regime_of_sample.end(), spec.regimes[r].duration,
                                static_cast<int>(r));
    }
    const int T = static_cast<int>(regime_of_sample.size());

    std::vector<std::vector<Vec2>> positions(N);
    std::vector<Vec2> pos(N), vel(N);
    for (int n = 0; n < N; ++n) {
        pos[n] = spec.vehicles[n].position;
        vel[n] = spec.vehicles[n].velocity;
        positions[n].push_back(pos[n]);
    }
    for (int t = 0; t + 1 < T; ++t) {
        const auto& regime = spec.regimes[regime_of_sample[t]];
        for (int n = 0; n < N; ++n) {
            const Vec2 a = regime.accelerations[n];
            pos[n] += vel[n] + 0.5 * a;
            vel[n] += a;
            positions[n].push_back(pos[n]);
        }
    }

    // Noise on positions; speeds are then derived the same way downstream
    // consumers compute them, so noisy fixtures have noisy speed columns too.
    for (int n = 0; n < N; ++n) {
        VehicleTrack track;
        track.vehicle_id = spec.vehicles[n].vehicle_id;
        track.timestep = spec.timestep;
        track.positions = positions[n];
        if (spec.noise_std > 0.0)
            for (Vec2& p : track.positions) {
                p.x += rng.normal(0.0, spec.noise_std);
                p.y += rng.normal(0.0, spec.noise_std);
            }
        track.speeds = derive_speeds(track.positions);
        out.scenario.vehicles.push_back(std::move(track));
    }
    out.scenario.validate();
    return out;
}

}  // namespace tpgen
